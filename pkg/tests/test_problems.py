import numpy as np
import pytest
from scipy.optimize import nnls

from dualpath.problems import (
    BUILTINS,
    closed_form_toy_path,
    dup_path_limit,
    get_builtin,
    lpcc,
    water_network,
)

NAMES = sorted(BUILTINS)
H = 1e-6


def sample_points(ex, rng, k=10):
    n = ex.problem.n
    x0 = ex.known_solution
    # strictly positive flows keep the water losses smooth
    return [np.abs(x0 + rng.uniform(0.05, 0.5, n) * rng.choice([-1, 1], n)) + 0.05 for _ in range(k)]


def central(fun, x):
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = H
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * H))
    return np.stack(cols, axis=-1)


@pytest.mark.parametrize("name", NAMES)
def test_derivatives_match_finite_differences(name):
    ex = get_builtin(name)
    p = ex.problem
    rng = np.random.default_rng(7)
    for x in sample_points(ex, rng):
        np.testing.assert_allclose(p.gradient(x), central(p.objective, x), atol=1e-6)
        np.testing.assert_allclose(p.dense_jacobian(x), central(p.constraints, x), atol=1e-6)
        y = rng.uniform(0.0, 2.0, p.m)
        hess = p.lagrangian_hessian(x, y)
        grad_l = lambda z: p.gradient(z) + p.dense_jacobian(z).T @ y  # noqa: E731
        fd = central(grad_l, x)
        if hess is None:
            np.testing.assert_allclose(fd, 0.0, atol=1e-6)
        else:
            np.testing.assert_allclose(hess, fd, atol=1e-6)
            np.testing.assert_allclose(hess, hess.T, atol=1e-12)


def kkt_multiplier(ex):
    """Known multiplier, or the best nonnegative one on the active rows."""
    p = ex.problem
    x = ex.known_solution
    if ex.known_multiplier is not None:
        return ex.known_multiplier
    J = p.dense_jacobian(x)
    active = np.abs(p.constraints(x)) <= 1e-12
    y = np.zeros(p.m)
    y[active], _ = nnls(J[active].T, -p.gradient(x))
    return y


@pytest.mark.parametrize("name", NAMES)
def test_known_solution_is_kkt(name):
    ex = get_builtin(name)
    p = ex.problem
    x = ex.known_solution
    a = p.constraints(x)
    assert np.all(a <= 1e-9)
    y = kkt_multiplier(ex)
    assert np.all(y >= 0)
    assert np.linalg.norm(p.gradient(x) + p.dense_jacobian(x).T @ y) <= 1e-9
    assert np.max(np.abs(y * a)) <= 1e-9
    if ex.known_multiplier_set is not None:
        assert ex.known_multiplier_set.contains(y)


@pytest.mark.parametrize("delta, mu", [(1.0, 1.0), (1e-3, 1e-6), (0.5, 0.0)])
def test_closed_form_toy_path(delta, mu):
    p = get_builtin("toy_lp").problem
    x, s, y = closed_form_toy_path(delta, mu)
    xv = np.array([x])
    np.testing.assert_allclose(p.constraints(xv) + s, delta)
    np.testing.assert_allclose(s * y, mu)
    np.testing.assert_allclose(p.gradient(xv) + p.dense_jacobian(xv).T @ y, 0.0, atol=1e-15)


def test_closed_form_toy_path_rejects_bad_input():
    with pytest.raises(ValueError):
        closed_form_toy_path(0.0, 1.0)
    with pytest.raises(ValueError):
        closed_form_toy_path(1.0, -1.0)


@pytest.mark.parametrize("mu", [1e-1, 1e-4, 1e-8])
def test_dup_path_limit_is_on_the_unit_shift_path(mu):
    # x = t mu, s = mu - a(x), y = mu / s satisfies dual feasibility
    p = get_builtin("duplicated_constraint_lp").problem
    t = (1 + np.sqrt(17)) / 4
    x = np.array([t * mu])
    s = mu * np.ones(2) - p.constraints(x)
    y = mu / s
    np.testing.assert_allclose(p.gradient(x) + p.dense_jacobian(x).T @ y, 0.0, atol=1e-14)
    np.testing.assert_allclose(y, dup_path_limit(), rtol=1e-12)


def test_lpcc_multiplier_family():
    ex = lpcc()
    p = ex.problem
    x = ex.known_solution
    for y2 in (0.0, 1.0, 10.0):
        y = np.array([3.0, y2, 0.0, 11.0 + 2 * y2])
        assert ex.known_multiplier_set.contains(y)
        assert np.linalg.norm(p.gradient(x) + p.dense_jacobian(x).T @ y) <= 1e-12


def test_lpcc_solution_beats_feasible_neighbours():
    p = lpcc().problem
    best = p.objective(np.array([2.0, 0.0]))
    for x in ([0.0, 0.0], [1.0, 0.0], [0.0, 2 / 3], [1.9, 0.0]):
        assert p.objective(np.array(x)) > best


def test_water_heads_from_losses():
    p = water_network().problem
    z = water_network().known_solution
    a = p.constraints(z)
    np.testing.assert_allclose(a[:12], 0.0, atol=1e-15)
    assert p.objective(z) == 1.0


def test_get_builtin_unknown():
    with pytest.raises(KeyError, match="unknown builtin"):
        get_builtin("nope")


def test_builtins_are_fresh_instances():
    assert get_builtin("circles") is not get_builtin("circles")
