"""HTTP service wrapping the analysis core."""

from .app import create_app

__all__ = ["create_app"]
