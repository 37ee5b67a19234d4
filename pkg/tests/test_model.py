"""Core model types: parameter validation, vector field, aggregates."""
import numpy as np
import pytest

from netsir import (
    EPS_S,
    DimensionMismatch,
    EpidemicParams,
    NotRankOne,
    OutOfSimplex,
    State,
    ZeroMatrix,
    aggregates,
    rank1_factorize,
    validate_state,
    vector_field,
    w_values,
)


def test_rank_one_params_basic():
    p = EpidemicParams.rank_one([1.0, 2.0], [0.5, 0.5], gamma=1.0)
    assert p.n == 2
    assert p.is_rank_one
    assert np.array_equal(p.dense_matrix(), np.outer([1.0, 2.0], [0.5, 0.5]))
    a, b = p.rank_one_factors()
    assert np.array_equal(a, [1.0, 2.0])
    assert np.array_equal(b, [0.5, 0.5])


def test_dense_params_basic():
    m = [[0.0, 1.0], [1.0, 0.0]]
    p = EpidemicParams.dense(m, gamma=0.5)
    assert p.n == 2
    assert not p.is_rank_one
    assert np.array_equal(p.dense_matrix(), m)
    with pytest.raises(NotRankOne):
        p.rank_one_factors()


def test_params_rejects_bad_gamma():
    for gamma in (0.0, -1.0, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            EpidemicParams.rank_one([1.0], [1.0], gamma=gamma)


def test_params_requires_exactly_one_form():
    with pytest.raises(ValueError):
        EpidemicParams(gamma=1.0)
    with pytest.raises(ValueError):
        EpidemicParams(gamma=1.0, a=np.ones(2), b=np.ones(2),
                       matrix=np.ones((2, 2)))
    with pytest.raises(ValueError):
        EpidemicParams(gamma=1.0, a=np.ones(2))


def test_params_rejects_bad_factors():
    with pytest.raises(DimensionMismatch):
        EpidemicParams.rank_one([1.0, 1.0], [1.0], gamma=1.0)
    with pytest.raises(ValueError):
        EpidemicParams.rank_one([1.0, -1.0], [1.0, 1.0], gamma=1.0)
    with pytest.raises(ValueError):
        EpidemicParams.rank_one([1.0, 0.0], [1.0, 1.0], gamma=1.0)
    with pytest.raises(DimensionMismatch):
        EpidemicParams.dense([[1.0, 2.0]], gamma=1.0)
    with pytest.raises(ValueError):
        EpidemicParams.dense([[1.0, -0.1], [0.0, 1.0]], gamma=1.0)


def test_params_arrays_are_frozen():
    p = EpidemicParams.rank_one([1.0, 2.0], [0.5, 0.5], gamma=1.0)
    with pytest.raises(ValueError):
        p.a[0] = 5.0


def test_state_validation():
    s = State(x=np.array([0.3, 0.4]), y=np.array([0.2, 0.1]))
    assert s.n == 2
    with pytest.raises(DimensionMismatch):
        State(x=np.array([0.3]), y=np.array([0.2, 0.1]))
    with pytest.raises(OutOfSimplex):
        State(x=np.array([0.8, 0.4]), y=np.array([0.4, 0.1]))
    with pytest.raises(OutOfSimplex):
        State(x=np.array([-0.1, 0.4]), y=np.array([0.2, 0.1]))


def test_validate_state_clamps_roundoff():
    p = EpidemicParams.rank_one([1.0, 1.0], [1.0, 1.0], gamma=1.0)
    s = validate_state(p, [-0.5 * EPS_S, 0.5], [0.25, 0.5 + 0.5 * EPS_S])
    assert s.x[0] == 0.0
    assert s.x[1] + s.y[1] <= 1.0
    with pytest.raises(OutOfSimplex):
        validate_state(p, [-10 * EPS_S, 0.5], [0.25, 0.25])
    with pytest.raises(OutOfSimplex):
        validate_state(p, [0.5, 0.5], [0.5 + 10 * EPS_S, 0.25])
    with pytest.raises(DimensionMismatch):
        validate_state(p, [0.5], [0.25])
    with pytest.raises(OutOfSimplex):
        validate_state(p, [float("nan"), 0.5], [0.25, 0.25])


def test_vector_field_matches_componentwise_formula():
    rng = np.random.default_rng(42)
    for _ in range(25):
        n = int(rng.integers(1, 7))
        a = rng.uniform(0.1, 2.0, n)
        b = rng.uniform(0.1, 2.0, n)
        x = rng.uniform(0.0, 0.6, n)
        y = rng.uniform(0.0, 0.4, n)
        gamma = float(rng.uniform(0.2, 3.0))
        p = EpidemicParams.rank_one(a, b, gamma)
        s = State(x=x, y=y)
        d = vector_field(p, s)
        for i in range(n):
            rate = a[i] * x[i] * float(b @ y)
            assert d.dx[i] == pytest.approx(-rate, abs=1e-15)
            assert d.dy[i] == pytest.approx(rate - gamma * y[i], abs=1e-15)


def test_vector_field_dense_agrees_with_rank_one():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        a = rng.uniform(0.2, 1.5, n)
        b = rng.uniform(0.2, 1.5, n)
        gamma = float(rng.uniform(0.3, 2.0))
        x = rng.uniform(0.0, 0.5, n)
        y = rng.uniform(0.0, 0.4, n)
        s = State(x=x, y=y)
        d1 = vector_field(EpidemicParams.rank_one(a, b, gamma), s)
        d2 = vector_field(EpidemicParams.dense(np.outer(a, b), gamma), s)
        assert np.allclose(d1.dx, d2.dx, atol=1e-14)
        assert np.allclose(d1.dy, d2.dy, atol=1e-14)


def test_vector_field_mass_balance():
    # d(x_i + y_i)/dt = -gamma y_i: recovery is the only leak
    rng = np.random.default_rng(3)
    p = EpidemicParams.rank_one(rng.uniform(0.5, 1.5, 4),
                                rng.uniform(0.5, 1.5, 4), gamma=0.7)
    s = State(x=rng.uniform(0.1, 0.5, 4), y=rng.uniform(0.0, 0.3, 4))
    d = vector_field(p, s)
    assert np.allclose(d.dx + d.dy, -0.7 * s.y, atol=1e-15)


def test_aggregates_and_w_values():
    a = np.array([1.0, 2.0, 0.5])
    b = np.array([0.2, 0.3, 0.5])
    p = EpidemicParams.rank_one(a, b, gamma=0.8)
    s = State(x=np.array([0.5, 0.4, 0.6]), y=np.array([0.1, 0.0, 0.2]))
    agg = aggregates(p, s)
    assert agg.xbar == pytest.approx(float(b @ s.x), abs=0)
    assert agg.xtilde == pytest.approx(float((a * b) @ s.x), abs=0)
    assert agg.ybar == pytest.approx(float(b @ s.y), abs=0)
    w = w_values(p, s)
    assert np.allclose(w, agg.xtilde - 0.8 - a * agg.ybar, atol=0)


def test_rank1_factorize_recovers_outer_products():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 8))
        a = rng.uniform(0.1, 3.0, n)
        b = rng.uniform(0.1, 3.0, n)
        A = np.outer(a, b)
        out = rank1_factorize(A)
        assert out is not None
        fa, fb = out
        assert fb.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.abs(A - np.outer(fa, fb)).max() <= 1e-9 * A.max()


def test_rank1_factorize_rejects_non_rank_one():
    assert rank1_factorize(np.array([[1.0, 1.0], [1.0, 2.0]])) is None
    # zero entries rule out strictly positive factors
    assert rank1_factorize(np.array([[0.0, 1.0], [1.0, 1.0]])) is None
    with pytest.raises(ZeroMatrix):
        rank1_factorize(np.zeros((3, 3)))
    with pytest.raises(DimensionMismatch):
        rank1_factorize(np.ones((2, 3)))


def test_rank1_factorize_normalization_matches_stored_factors():
    # factored dense matrix must reproduce the same aggregates as the
    # (a, b) pair that generated it, whatever the original scaling
    a = np.array([2.0, 4.0])
    b = np.array([0.3, 0.9])
    p_dense = EpidemicParams.dense(np.outer(a, b), gamma=1.0)
    fa, fb = p_dense.rank_one_factors()
    s = State(x=np.array([0.5, 0.5]), y=np.array([0.1, 0.1]))
    agg_d = aggregates(p_dense, s)
    assert agg_d.xtilde == pytest.approx(float((a * b) @ s.x), rel=1e-12)
    assert fa[0] * fb[0] == pytest.approx(a[0] * b[0], rel=1e-12)
