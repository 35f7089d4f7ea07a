"""Newton systems of the primal-dual method.

Every strategy solves the same block system for ``(dx, dy, ds)``::

    (H + delta_w I) dx + J' dy = target_dual
    J dx + ds                  = target_primal
    S dy + Y ds                = target_comp

which is reduced to the condensed normal form

    (H + J' D J + delta_w I) dx = target_dual - J' (S^-1 target_comp - D target_primal)

with ``D = S^-1 Y`` and factorized densely by Cholesky. If the refined
condensed solution still misses a relative residual of ``1e-8`` the full
block system is solved by sparse LU instead. When the
factorization fails (nonconvex ``H`` or rank deficiency) ``delta_w`` walks
through ``regularization.schedule`` until it succeeds.
"""

from __future__ import annotations

import dataclasses
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .problem import InequalityProblem, Iterate

__all__ = [
    "NewtonTargets",
    "Direction",
    "Regularization",
    "NumericalBreakdown",
    "KKTSolveInfo",
    "assemble_and_solve",
    "block_residuals",
    "solve_unreduced",
]


class NumericalBreakdown(ArithmeticError):
    """The condensed matrix could not be factorized at any regularization."""

    def __init__(self, message: str, delta_w: float):
        super().__init__(message)
        self.delta_w = delta_w


@dataclasses.dataclass(frozen=True)
class NewtonTargets:
    target_dual: np.ndarray
    target_primal: np.ndarray
    target_comp: np.ndarray


@dataclasses.dataclass(frozen=True)
class Direction:
    dx: np.ndarray
    dy: np.ndarray
    ds: np.ndarray

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.dx)) and np.all(np.isfinite(self.dy))
                    and np.all(np.isfinite(self.ds)))


@dataclasses.dataclass(frozen=True)
class Regularization:
    """Primal regularization schedule; reset on every call.

    For problems without curvature a nonzero shift is refined away with up
    to ``shifted_refinement_steps`` steps against the unshifted system.
    """

    schedule: tuple[float, ...] = (0.0,) + tuple(10.0 ** k for k in range(-8, 1))
    refinement_steps: int = 3
    shifted_refinement_steps: int = 25


@dataclasses.dataclass(frozen=True)
class KKTSolveInfo:
    delta_w: float
    attempts: int
    residual: float


def _condensed_matrix(H, J, d, delta_w, n):
    if sp.issparse(J):
        K = (J.T @ sp.diags(d) @ J).toarray()
    else:
        K = (J.T * d) @ J
    if H is not None:
        K = K + H
    if delta_w:
        K[np.diag_indices(n)] += delta_w
    return K


def _matvec(J, v):
    return np.asarray(J @ v).reshape(-1)


def _unreduced_solve(H, J, it: Iterate, t: NewtonTargets, delta_w: float,
                     steps: int) -> Optional[Direction]:
    """Sparse LU on the full block system with a few refinement steps.

    Used when the condensed solve is inaccurate: ``J' D J`` squares the
    spread of ``D`` while the block matrix only carries it once.
    """
    n, m = it.x.size, it.s.size
    Js = sp.csr_matrix(J)
    Hs = sp.csr_matrix((n, n)) if H is None else sp.csr_matrix(H)
    K = sp.bmat([
        [Hs + delta_w * sp.identity(n), Js.T, None],
        [Js, None, sp.identity(m)],
        [None, sp.diags(it.s), sp.diags(it.y)],
    ], format="csc")
    rhs = np.concatenate([t.target_dual, t.target_primal, t.target_comp])
    try:
        lu = splu(K)
    except RuntimeError:  # exactly singular
        return None
    sol = lu.solve(rhs)
    for _ in range(steps):
        sol = sol + lu.solve(rhs - K @ sol)
    if not np.all(np.isfinite(sol)):
        return None
    return Direction(sol[:n], sol[n:n + m], sol[n + m:])


def block_residuals(H, J, it: Iterate, t: NewtonTargets, d: Direction,
                    delta_w: float = 0.0) -> tuple[float, float, float]:
    """Infinity norms of the three block-equation residuals."""
    r1 = _matvec(J.T, d.dy) - t.target_dual
    if H is not None:
        r1 = r1 + H @ d.dx
    if delta_w:
        r1 = r1 + delta_w * d.dx
    r2 = _matvec(J, d.dx) + d.ds - t.target_primal
    r3 = it.s * d.dy + it.y * d.ds - t.target_comp
    norm = lambda v: float(np.max(np.abs(v))) if v.size else 0.0  # noqa: E731
    return norm(r1), norm(r2), norm(r3)


def assemble_and_solve(
    p: InequalityProblem,
    it: Iterate,
    t: NewtonTargets,
    reg: Optional[Regularization] = None,
    *,
    hessian=None,
    jacobian=None,
    info: Optional[list] = None,
    check: bool = False,
) -> Direction:
    """Solve the Newton system at ``it`` for the right-hand sides ``t``.

    ``hessian``/``jacobian`` let a caller reuse evaluations across several
    solves at the same iterate. When ``info`` is a list, a
    :class:`KKTSolveInfo` is appended to it. ``check=True`` asserts the
    block-substitution residuals (relative ``1e-8``).
    """
    reg = reg or Regularization()
    n, m = p.n, p.m
    if not it.is_interior:
        raise ValueError("Newton system requires s > 0 and y > 0")
    J = p.jacobian(it.x) if jacobian is None else jacobian
    H = p.lagrangian_hessian(it.x, it.y) if hessian is None else hessian
    s, y = it.s, it.y
    d = y / s
    rhs = t.target_dual - _matvec(J.T, t.target_comp / s - d * t.target_primal)

    last_error = None
    for attempt, delta_w in enumerate(reg.schedule, start=1):
        K = _condensed_matrix(H, J, d, delta_w, n)
        try:
            factor = scipy.linalg.cho_factor(K, lower=True, check_finite=True)
        except (np.linalg.LinAlgError, ValueError) as exc:
            last_error = exc
            continue
        if not np.all(np.isfinite(factor[0])):
            continue

        def recover(dx):
            ds = t.target_primal - _matvec(J, dx)
            dy = (t.target_comp - y * ds) / s
            return Direction(dx, dy, ds)

        dx = scipy.linalg.cho_solve(factor, rhs)
        direction = recover(dx)
        scale = 1.0 + max(float(np.max(np.abs(v))) if v.size else 0.0
                          for v in (t.target_dual, t.target_primal, t.target_comp))
        # Without curvature the shift only rescues a singular factorization,
        # so refine toward the unshifted system; with curvature it convexifies.
        w_true = delta_w if H is not None else 0.0
        steps = reg.refinement_steps if w_true == delta_w else reg.shifted_refinement_steps
        best, best_res = direction, max(block_residuals(H, J, it, t, direction, w_true))
        for _ in range(steps):
            if best_res <= 1e-14 * scale:
                break
            # the condensed residual equals the first block's residual
            r1 = t.target_dual - _matvec(J.T, direction.dy)
            if H is not None:
                r1 = r1 - H @ direction.dx
            r1 = r1 - w_true * direction.dx
            direction = recover(direction.dx + scipy.linalg.cho_solve(factor, r1))
            res = max(block_residuals(H, J, it, t, direction, w_true))
            if not res < best_res:
                break
            best, best_res = direction, res
        if best_res > 1e-8 * scale:
            alt = _unreduced_solve(H, J, it, t, w_true, reg.refinement_steps)
            if alt is not None:
                alt_res = max(block_residuals(H, J, it, t, alt, w_true))
                if alt_res < best_res:
                    best, best_res = alt, alt_res
        direction = best
        if not direction.is_finite():
            last_error = FloatingPointError("non-finite direction")
            continue
        res = best_res
        if w_true != delta_w:
            res = min(res, max(block_residuals(H, J, it, t, direction, delta_w)))
        if info is not None:
            info.append(KKTSolveInfo(delta_w, attempt, res))
        if check and res > 1e-8 * scale:
            raise AssertionError(f"Newton substitution residual {res:.3e} exceeds tolerance")
        return direction

    raise NumericalBreakdown(
        f"condensed KKT matrix not positive definite at delta_w={reg.schedule[-1]:g}"
        f" ({last_error})",
        reg.schedule[-1],
    )


def solve_unreduced(p: InequalityProblem, it: Iterate, t: NewtonTargets,
                    delta_w: float = 0.0) -> Direction:
    """Dense LU solve of the full 3-block system (reference path for tests)."""
    n, m = p.n, p.m
    J = p.dense_jacobian(it.x)
    H = p.lagrangian_hessian(it.x, it.y)
    H = np.zeros((n, n)) if H is None else np.asarray(H)
    K = np.zeros((n + 2 * m, n + 2 * m))
    K[:n, :n] = H + delta_w * np.eye(n)
    K[:n, n:n + m] = J.T
    K[n:n + m, :n] = J
    K[n:n + m, n + m:] = np.eye(m)
    K[n + m:, n:n + m] = np.diag(it.s)
    K[n + m:, n + m:] = np.diag(it.y)
    sol = scipy.linalg.solve(K, np.concatenate([t.target_dual, t.target_primal, t.target_comp]))
    return Direction(sol[:n], sol[n:n + m], sol[n + m:])
