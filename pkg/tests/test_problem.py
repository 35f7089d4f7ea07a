import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from dualpath import (
    AffineProblem,
    Iterate,
    LinearProgram,
    ShiftedProblem,
    lagrangian_gradient,
    residuals,
    to_inequality_form,
)
from dualpath.problems import circles, closed_form_toy_path, toy_lp


# --- LinearProgram invariants -------------------------------------------------

def test_coordinate_triples_sum_duplicates():
    lp = LinearProgram([1.0, 1.0], ([0, 0, 0], [1, 1, 0], [2.0, 3.0, 1.0]), [1.0])
    assert lp.A.toarray().tolist() == [[1.0, 5.0]]
    assert lp.nnz == 2


@pytest.mark.parametrize("kwargs, msg", [
    (dict(c=[1.0, 2.0], A=np.ones((1, 3)), b=[1.0]), "inconsistent"),
    (dict(c=[1.0], A=np.ones((1, 1)), b=[1.0], lower=[2.0], upper=[1.0]), "lower > upper"),
    (dict(c=[1.0], A=np.ones((1, 1)), b=[1.0], lower=[1.0, 2.0]), "length"),
])
def test_invalid_lp_rejected(kwargs, msg):
    with pytest.raises(ValueError, match=msg):
        LinearProgram(**kwargs)


def test_fixed_variable_allowed():
    lp = LinearProgram([0.0], np.zeros((0, 1)), np.zeros(0), [1.0], [1.0])
    assert lp.lower[0] == lp.upper[0]


# --- to_inequality_form -------------------------------------------------------

def test_toy_lp_inequality_form():
    p = toy_lp().problem
    assert p.m == 2
    np.testing.assert_array_equal(p.constraints(np.array([1.0])), [0.0, 0.0])
    np.testing.assert_array_equal(p.constraints(np.array([2.0])), [1.0, -1.0])


def test_bounds_only_lp():
    p = to_inequality_form(LinearProgram([1.0], np.zeros((0, 1)), np.zeros(0), [0.0], [np.inf]))
    assert p.m == 1
    np.testing.assert_array_equal(p.constraints(np.array([3.0])), [-3.0])


def test_row_count_and_order():
    lp = LinearProgram([1.0, 1.0], [[1.0, 2.0]], [2.0], [0.0, -1.0], [4.0, 3.0])
    p = to_inequality_form(lp)
    assert p.m == 2 + 2 + 2
    x = np.array([0.5, 0.25])
    J = p.dense_jacobian(x) if hasattr(p, "dense_jacobian") else p.J.toarray()
    np.testing.assert_array_equal(J, [[1, 2], [-1, -2], [-1, 0], [0, -1], [1, 0], [0, 1]])
    np.testing.assert_allclose(p.constraints(x), [-1.0, 1.0, -0.5, -1.25, -3.5, -2.75])


def test_infinite_bounds_emit_no_rows():
    lp = LinearProgram([1.0, 1.0, 1.0], np.zeros((0, 3)), np.zeros(0),
                       [-np.inf, 0.0, -np.inf], [np.inf, np.inf, 5.0])
    assert to_inequality_form(lp).m == 2


def test_conversion_round_trip_on_grid():
    # a(x) <= 0 exactly when x satisfies Ax = b and the bounds (brute force on a grid)
    lp = LinearProgram([0.0, 0.0], [[1.0, 1.0]], [1.0], [0.0, 0.0], [1.0, 0.75])
    p = to_inequality_form(lp)
    grid = np.linspace(-0.5, 1.5, 9)
    for x1 in grid:
        for x2 in grid:
            x = np.array([x1, x2])
            assert bool(np.all(p.constraints(x) <= 1e-12)) == lp.is_feasible(x, tol=1e-12)


@given(st.integers(0, 10_000))
def test_conversion_round_trip_random(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    A = rng.integers(-2, 3, (1, n)).astype(float)
    lo = rng.integers(-1, 1, n).astype(float)
    up = lo + rng.integers(0, 3, n)
    x = rng.integers(-2, 4, n).astype(float)
    lp = LinearProgram(np.zeros(n), A, A @ x if rng.random() < 0.5 else A @ x + 1.0, lo, up)
    p = to_inequality_form(lp)
    assert bool(np.all(p.constraints(x) <= 0.0)) == lp.is_feasible(x, tol=0.0)


# --- residuals and the Lagrangian gradient ------------------------------------

def _random_affine(rng, m=3, n=2):
    return AffineProblem(rng.standard_normal(n), rng.standard_normal((m, n)), rng.standard_normal(m))


def test_toy_closed_form_residuals():
    delta, mu = 1e-3, 1e-6
    x, s, y = closed_form_toy_path(delta, mu)
    p = ShiftedProblem(toy_lp().problem, delta)
    rep = residuals(p, Iterate(np.array([x]), y, s, mu))
    assert rep.primal_inf == 0.0
    assert rep.comp_max == pytest.approx(mu, rel=1e-15)
    assert rep.comp_min == pytest.approx(mu, rel=1e-15)


def test_unit_iterate_on_negative_identity_constraints():
    p = AffineProblem([0.0, 0.0], np.zeros((2, 2)), [1.0, 1.0])  # a(x) = -e
    rep = residuals(p, Iterate(np.zeros(2), np.ones(2), np.ones(2), 1.0))
    assert rep.primal_inf == 0.0
    assert rep.comp_max == 1.0


def test_residuals_match_dense_recomputation():
    rng = np.random.default_rng(7)
    J = rng.standard_normal((3, 2))
    c, h = rng.standard_normal(2), rng.standard_normal(3)
    p = AffineProblem(c, sp.csr_matrix(J), h)
    it = Iterate(rng.standard_normal(2), rng.uniform(0.1, 2, 3), rng.uniform(0.1, 2, 3), 0.3)
    rep = residuals(p, it)
    r = J @ it.x - h + it.s
    g = c + J.T @ it.y
    assert rep.primal_inf == pytest.approx(np.abs(r).max(), rel=1e-14)
    assert rep.dual_inf == pytest.approx(np.abs(g).max(), rel=1e-14)
    assert rep.comp_max == pytest.approx((it.s * it.y).max(), rel=1e-14)
    assert rep.comp_min == pytest.approx((it.s * it.y).min(), rel=1e-14)
    assert rep.dual_l1 == pytest.approx(it.y.sum(), rel=1e-14)
    assert rep.strict_comp == pytest.approx((it.s + it.y).min(), rel=1e-14)
    assert rep.feas_over_mu == pytest.approx(np.abs(r).max() / 0.3, rel=1e-14)


def test_residuals_dimension_mismatch():
    p = _random_affine(np.random.default_rng(0))
    with pytest.raises(ValueError):
        residuals(p, Iterate(np.zeros(3), np.ones(3), np.ones(3), 1.0))


@given(st.integers(0, 10_000), st.floats(0.1, 10.0))
def test_residual_homogeneity(seed, t):
    rng = np.random.default_rng(seed)
    p = _random_affine(rng)
    x = rng.standard_normal(2)
    y, s = rng.uniform(0.1, 2, 3), rng.uniform(0.1, 2, 3)
    r1 = residuals(p, Iterate(x, y, s, 1.0))
    r2 = residuals(p, Iterate(x, t * y, t * s, 1.0))
    assert r2.comp_max == pytest.approx(t * t * r1.comp_max, rel=1e-12)
    assert r2.comp_min == pytest.approx(t * t * r1.comp_min, rel=1e-12)
    assert r2.dual_l1 == pytest.approx(t * r1.dual_l1, rel=1e-12)


def test_circles_gradient_vanishes_at_solution():
    p = circles().problem
    np.testing.assert_allclose(lagrangian_gradient(p, np.array([1.0, 0.0]), np.ones(2)), 0.0,
                               atol=1e-15)


def test_gradient_with_zero_multipliers_is_objective_gradient():
    p = circles().problem
    x = np.array([0.3, -0.7])
    np.testing.assert_array_equal(lagrangian_gradient(p, x, np.zeros(2)), p.gradient(x))


def test_converted_lp_gradient_dense_product_and_constant_in_x():
    rng = np.random.default_rng(3)
    lp = LinearProgram(rng.standard_normal(3), rng.standard_normal((2, 3)), rng.standard_normal(2),
                       [0.0, -1.0, -np.inf], [np.inf, 2.0, 1.0])
    p = to_inequality_form(lp)
    y = rng.uniform(0.1, 1.0, p.m)
    A = lp.A.toarray()
    J = np.vstack([A, -A, -np.eye(3)[[0, 1]], np.eye(3)[[1, 2]]])
    g1 = lagrangian_gradient(p, rng.standard_normal(3), y)
    g2 = lagrangian_gradient(p, rng.standard_normal(3), y)
    np.testing.assert_allclose(g1, lp.c + J.T @ y, rtol=1e-13)
    np.testing.assert_array_equal(g1, g2)
    assert p.lagrangian_hessian(np.zeros(3), y) is None
