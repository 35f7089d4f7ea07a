"""Small problems with known solutions and known multiplier sets."""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

from .problem import (
    AffineProblem,
    CallbackProblem,
    InequalityProblem,
    LinearProgram,
    NonlinearProgram,
    to_inequality_form,
)

__all__ = [
    "MultiplierSet",
    "ExampleProblem",
    "toy_lp",
    "closed_form_toy_path",
    "duplicated_constraint_lp",
    "interior_lp",
    "circles",
    "lpcc",
    "water_network",
    "dup_path_limit",
    "BUILTINS",
    "get_builtin",
]


@dataclasses.dataclass(frozen=True)
class MultiplierSet:
    """The polyhedron ``{y >= 0 : E y = g}``."""

    E: np.ndarray
    g: np.ndarray

    def contains(self, y, tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(y >= -tol) and np.max(np.abs(self.E @ y - self.g), initial=0.0) <= tol)


@dataclasses.dataclass(frozen=True)
class ExampleProblem:
    name: str
    problem: InequalityProblem
    known_solution: Optional[np.ndarray] = None
    known_multiplier_set: Optional[MultiplierSet] = None
    known_multiplier: Optional[np.ndarray] = None
    lp: Optional[LinearProgram] = None
    notes: str = ""


def toy_lp() -> ExampleProblem:
    """``min 0  s.t.  x <= 1,  x >= 1``.

    The inequality form is ``a(x) = (x - 1, 1 - x)``. Every ``y1 = y2 >= 0``
    is a multiplier, hence the multiplier set is unbounded. The attached
    :class:`LinearProgram` states the same set as the bounds ``1 <= x <= 1``
    with no rows, which is the form the interior check inspects.
    """
    lp = LinearProgram([0.0], np.zeros((0, 1)), np.zeros(0), [1.0], [1.0], name="toy_lp")
    p = AffineProblem([0.0], [[1.0], [-1.0]], [1.0, -1.0], name="toy_lp", provenance="converted-lp")
    return ExampleProblem(
        name="toy_lp",
        problem=p,
        known_solution=np.array([1.0]),
        known_multiplier_set=MultiplierSet(np.array([[1.0, -1.0]]), np.array([0.0])),
        known_multiplier=np.array([1.0, 1.0]),
        lp=lp,
        notes="empty interior; multipliers y1 = y2 >= 0",
    )


def closed_form_toy_path(delta: float, mu: float):
    """Solution of the toy LP's perturbed KKT system for ``a(x) <= delta``
    with barrier ``mu``: ``x = 1``, ``s = (delta, delta)``, ``y = mu/delta``."""
    if not (delta > 0 and mu >= 0):
        raise ValueError("need delta > 0 and mu >= 0")
    return 1.0, np.array([delta, delta]), np.array([mu / delta, mu / delta])


def duplicated_constraint_lp() -> ExampleProblem:
    """``min x  s.t.  -x <= 0,  -2x <= 0``; multipliers ``y1 + 2 y2 = 1``."""
    p = AffineProblem([1.0], [[-1.0], [-2.0]], [0.0, 0.0], name="duplicated_constraint_lp",
                      provenance="converted-lp")
    return ExampleProblem(
        name="duplicated_constraint_lp",
        problem=p,
        known_solution=np.array([0.0]),
        known_multiplier_set=MultiplierSet(np.array([[1.0, 2.0]]), np.array([1.0])),
        known_multiplier=np.array([0.5, 0.25]),
        notes="bounded, nonunique multipliers; vertices (1, 0) and (0, 1/2)",
    )


def dup_path_limit() -> np.ndarray:
    """Limit multiplier of the unit-shift path on the duplicated-constraint LP.

    With ``x = t mu`` the path equations reduce to ``2t^2 - t - 2 = 0``.
    """
    t = (1.0 + math.sqrt(17.0)) / 4.0
    return np.array([1.0 / (t + 1.0), 1.0 / (2.0 * t + 1.0)])


def interior_lp() -> ExampleProblem:
    """``min x  s.t.  -x <= 1``: strictly feasible, unique multiplier 1."""
    p = AffineProblem([1.0], [[-1.0]], [1.0], name="interior_lp")
    return ExampleProblem(
        name="interior_lp",
        problem=p,
        known_solution=np.array([-1.0]),
        known_multiplier_set=MultiplierSet(np.array([[1.0]]), np.array([1.0])),
        known_multiplier=np.array([1.0]),
    )


def _nlp(name, n, f, g, h, c, jac, ch, kinds, lower=None, upper=None) -> CallbackProblem:
    return CallbackProblem(NonlinearProgram(n, f, g, h, c, jac, ch, tuple(kinds),
                                            lower=lower, upper=upper, name=name))


def circles() -> ExampleProblem:
    """Nonconvex quadratic over the intersection of two unit disks.

    The only feasible point is ``(1, 0)``; ``(1, 1)`` and ``(0, 0)`` are
    both multipliers there.
    """
    f = lambda x: -(x[0] - 1.0) ** 2 + x[1] ** 2  # noqa: E731
    g = lambda x: np.array([-2.0 * (x[0] - 1.0), 2.0 * x[1]])  # noqa: E731
    h = lambda x: np.diag([-2.0, 2.0])  # noqa: E731

    def c(x):
        return np.array([x[0] ** 2 + x[1] ** 2 - 1.0, (x[0] - 2.0) ** 2 + x[1] ** 2 - 1.0])

    def jac(x):
        return np.array([[2.0 * x[0], 2.0 * x[1]], [2.0 * (x[0] - 2.0), 2.0 * x[1]]])

    def ch(x, w):
        return 2.0 * (w[0] + w[1]) * np.eye(2)

    p = _nlp("circles", 2, f, g, h, c, jac, ch, ["le", "le"])
    # dL/dx1 = -2(x1-1) + 2 y1 x1 + 2 y2 (x1-2) = 2 (y1 - y2) at x*, dL/dx2 = 0
    return ExampleProblem(
        name="circles",
        problem=p,
        known_solution=np.array([1.0, 0.0]),
        known_multiplier_set=MultiplierSet(np.array([[1.0, -1.0]]), np.array([0.0])),
        known_multiplier=np.array([1.0, 1.0]),
        notes="MFCQ fails at (1, 0); strictly complementary multiplier (1, 1)",
    )


def lpcc() -> ExampleProblem:
    """LP with a complementarity constraint.

    ``min -3 x1 + 2 x2  s.t.  x1 + 3 x2 <= 2,  x1 x2 <= 0,  x >= 0``, whose
    unique local minimizer is ``(2, 0)``. Constraint rows are
    ``(x1 + 3x2 - 2, x1 x2, -x1, -x2)``; at the solution the multipliers
    are ``y1 = 3, y3 = 0, y4 = 11 + 2 y2``.
    """
    f = lambda x: -3.0 * x[0] + 2.0 * x[1]  # noqa: E731
    g = lambda x: np.array([-3.0, 2.0])  # noqa: E731
    h = lambda x: np.zeros((2, 2))  # noqa: E731

    def c(x):
        return np.array([x[0] + 3.0 * x[1] - 2.0, x[0] * x[1]])

    def jac(x):
        return np.array([[1.0, 3.0], [x[1], x[0]]])

    def ch(x, w):
        return w[1] * np.array([[0.0, 1.0], [1.0, 0.0]])

    p = _nlp("lpcc", 2, f, g, h, c, jac, ch, ["le", "le"], lower=np.zeros(2))
    E = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, 0.0],
                  [0.0, -2.0, 0.0, 1.0]])
    return ExampleProblem(
        name="lpcc",
        problem=p,
        known_solution=np.array([2.0, 0.0]),
        known_multiplier_set=MultiplierSet(E, np.array([3.0, 0.0, 11.0])),
        known_multiplier=np.array([3.0, 0.5, 0.0, 12.0]),
        notes="objective sign chosen so that (2, 0) is the unique local minimizer",
    )


_WATER_EXP = 1.8


def _pow(v):
    return max(v, 0.0) ** _WATER_EXP


def _dpow(v):
    return _WATER_EXP * max(v, 0.0) ** (_WATER_EXP - 1.0)


def _d2pow(v):
    # not twice differentiable at 0; the second derivative there is taken as 0
    return _WATER_EXP * (_WATER_EXP - 1.0) * v ** (_WATER_EXP - 2.0) if v > 0 else 0.0


def water_network() -> ExampleProblem:
    """Three-node drinking water network.

    Variables ``(x12, x13, x23, h1, h2, h3)``: pipe flows and node heads.
    Minimize the inlet head ``h1`` subject to supply/demand balances and
    the friction losses ``x_ij**1.8 = h_i - h_j``, all variables >= 0.
    The flows are forced to ``(1, 1, 0)``, which gives ``h = (1, 0, 0)``.
    """
    f = lambda z: z[3]  # noqa: E731
    g = lambda z: np.array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0])  # noqa: E731
    h = lambda z: np.zeros((6, 6))  # noqa: E731

    def c(z):
        x12, x13, x23, h1, h2, h3 = z
        return np.array([
            x12 + x13 - 2.0,
            x12 + x23 - 1.0,
            x13 - 1.0,
            _pow(x12) - h1 + h2,
            _pow(x13) - h1 + h3,
            _pow(x23) - h2 + h3,
        ])

    def jac(z):
        x12, x13, x23 = z[:3]
        return np.array([
            [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [_dpow(x12), 0.0, 0.0, -1.0, 1.0, 0.0],
            [0.0, _dpow(x13), 0.0, -1.0, 0.0, 1.0],
            [0.0, 0.0, _dpow(x23), 0.0, -1.0, 1.0],
        ])

    def ch(z, w):
        H = np.zeros((6, 6))
        for k, i in ((3, 0), (4, 1), (5, 2)):
            H[i, i] = w[k] * _d2pow(z[i])
        return H

    p = _nlp("water_network", 6, f, g, h, c, jac, ch, ["eq"] * 6, lower=np.zeros(6))
    return ExampleProblem(
        name="water_network",
        problem=p,
        known_solution=np.array([1.0, 1.0, 0.0, 1.0, 0.0, 0.0]),
        notes="heads derived from the loss equations at the forced flows",
    )


BUILTINS: dict[str, Callable[[], ExampleProblem]] = {
    "toy_lp": toy_lp,
    "duplicated_constraint_lp": duplicated_constraint_lp,
    "interior_lp": interior_lp,
    "circles": circles,
    "lpcc": lpcc,
    "water_network": water_network,
}


def get_builtin(name: str) -> ExampleProblem:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin problem {name!r}; choose from {sorted(BUILTINS)}") from None
