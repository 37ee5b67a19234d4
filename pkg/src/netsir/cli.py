"""Command line front end.

Every subcommand talks to the analysis service over HTTP. By default an
in-process application instance is used, so no server needs to be running;
pass --server to point at a remote instance instead.
"""
from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

import httpx

from . import __version__

_SUBCOMMAND_ANALYSES = {
    "simulate": ["simulate"],
    "classify": ["classify"],
    "limit": ["limit", "spectral"],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netsir",
        description="Analyze network SIR epidemics: simulate trajectories, "
                    "classify infection-curve shapes, and compute limit "
                    "equilibria in closed form.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--server", metavar="URL", default=None,
                       help="base URL of a running service; default is an "
                            "in-process instance")
        p.add_argument("--out-dir", metavar="DIR", default="netsir-out",
                       help="directory for output files (default: "
                            "%(default)s)")

    def add_analysis(p: argparse.ArgumentParser) -> None:
        add_common(p)
        p.add_argument("--svg", action="store_true",
                       help="also render SVG charts of the trajectory")
        p.add_argument("--resolve-undetermined", action="store_true",
                       help="resolve undetermined shape predictions by "
                            "simulation")
        p.add_argument("--tol-abs", type=float, metavar="TOL", default=None,
                       help="override the integrator's absolute tolerance")
        p.add_argument("--tol-rel", type=float, metavar="TOL", default=None,
                       help="override the integrator's relative tolerance")
        p.add_argument("--horizon", type=float, metavar="T", default=None,
                       help="override the simulation horizon")

    for name, text in (
            ("simulate", "integrate a scenario file and write the "
                         "trajectory"),
            ("classify", "classify each node's infection curve from the "
                         "initial data"),
            ("limit", "compute the limiting equilibrium and its stability"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("scenario", metavar="FILE",
                       help="scenario description (JSON)")
        add_analysis(p)

    p = sub.add_parser("reproduce",
                       help="run a built-in scenario with its full analysis "
                            "set")
    p.add_argument("name", metavar="NAME",
                   help="built-in scenario name (see the service's "
                        "/scenarios endpoint)")
    add_analysis(p)

    p = sub.add_parser("sweep", help="run a parameter sweep and write a CSV "
                                     "of per-value outcomes")
    p.add_argument("sweep", metavar="FILE", help="sweep description (JSON)")
    add_common(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    return parser


class _InProcessTransport(httpx.BaseTransport):
    """Bridge a sync client to the ASGI application, no socket involved.

    httpx ships an ASGI transport for async clients only; this wrapper
    runs each request through it on a private event loop.
    """

    def __init__(self, app) -> None:
        self._asgi = httpx.ASGITransport(app=app)

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        content = request.read()

        async def dispatch() -> tuple[int, httpx.Headers, bytes]:
            req = httpx.Request(request.method, request.url,
                                headers=request.headers, content=content)
            resp = await self._asgi.handle_async_request(req)
            try:
                body = await resp.aread()
            finally:
                await resp.aclose()
            return resp.status_code, resp.headers, body

        status, headers, body = asyncio.run(dispatch())
        return httpx.Response(status, headers=headers, content=body)


def _client(server: str | None) -> httpx.Client:
    if server is not None:
        return httpx.Client(base_url=server.rstrip("/"), timeout=600.0)
    from .service import create_app
    return httpx.Client(transport=_InProcessTransport(create_app()),
                        base_url="http://netsir", timeout=None)


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise SystemExit(f"netsir: cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise SystemExit(f"netsir: {path} is not valid JSON: {exc}")


def _apply_overrides(doc: dict, args: argparse.Namespace) -> dict:
    if args.horizon is not None:
        doc["horizon"] = args.horizon
    overrides = {}
    if args.tol_abs is not None:
        overrides["abs_tol"] = args.tol_abs
    if args.tol_rel is not None:
        overrides["rel_tol"] = args.tol_rel
    if overrides:
        doc["integrator"] = {**doc.get("integrator", {}), **overrides}
    return doc


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise SystemExit(f"netsir: request failed: {exc}")
    if resp.status_code == 422:
        detail = resp.json().get("detail", resp.text)
        raise SystemExit(f"netsir: invalid input: {detail}")
    if resp.status_code != 200:
        raise SystemExit(f"netsir: server error {resp.status_code}: "
                         f"{resp.text}")
    return resp.json()


def _write(out_dir: Path, filename: str, text: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / filename).write_text(text, encoding="utf-8")


def _run_analysis(args: argparse.Namespace, doc: dict) -> int:
    payload = {
        "scenario": doc,
        "svg": args.svg,
        "resolve_undetermined": args.resolve_undetermined,
    }
    with _client(args.server) as client:
        body = _post(client, "/analyze", payload)
    out_dir = Path(args.out_dir)
    name = body["name"]
    if body.get("csv"):
        _write(out_dir, f"{name}_trajectory.csv", body["csv"])
    _write(out_dir, f"{name}_report.txt", body["report"])
    if body.get("svg_y"):
        _write(out_dir, f"{name}_y.svg", body["svg_y"])
    if body.get("svg_ybar"):
        _write(out_dir, f"{name}_ybar.svg", body["svg_ybar"])
    print(body["report"], end="")
    return 0 if body["theory_ok"] else 2


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn
        from .service import create_app
        uvicorn.run(create_app(), host=args.host, port=args.port)
        return 0

    if args.command == "sweep":
        doc = _load_json(args.sweep)
        with _client(args.server) as client:
            body = _post(client, "/sweep", {"sweep": doc})
        out_dir = Path(args.out_dir)
        _write(out_dir, f"{body['name']}_sweep.csv", body["csv"])
        print(f"sweep {body['name']}: {body['n_rows']} rows "
              f"({body['n_errors']} errors) written to "
              f"{out_dir / (body['name'] + '_sweep.csv')}")
        return 0

    if args.command == "reproduce":
        with _client(args.server) as client:
            try:
                resp = client.get(f"/scenarios/{args.name}")
            except httpx.HTTPError as exc:
                raise SystemExit(f"netsir: request failed: {exc}")
            if resp.status_code == 404:
                raise SystemExit(f"netsir: unknown scenario {args.name!r}")
            if resp.status_code != 200:
                raise SystemExit(f"netsir: server error {resp.status_code}: "
                                 f"{resp.text}")
            doc = resp.json()
        return _run_analysis(args, _apply_overrides(doc, args))

    doc = _load_json(args.scenario)
    doc = _apply_overrides(doc, args)
    doc["analyses"] = _SUBCOMMAND_ANALYSES[args.command]
    return _run_analysis(args, doc)


if __name__ == "__main__":
    sys.exit(main())
