"""Does an LP have a strict relative interior?

The bounds ``l <= x <= u`` are tightened to ``l + delta <= x <= u - delta``
and the elastic phase-1 problem

    minimize   sum(p) + sum(q)
    subject to A x + p - q = b,  l + delta <= x <= u - delta,  p, q >= 0

is solved with the package's own SameRate interior point method. The
tightened system is feasible when the optimal elastic sum is at most a
threshold; the verdict is the majority over several ``delta``.

The elastic sum is measured as ``|A x - b|_1`` at points clipped into the
tightened box, which is an upper bound on the optimum. It is minimised over
every iterate and the best point is polished by bounded least-squares steps,
so a late factorization breakdown cannot hide a feasible point.

With zero cost on ``x`` the barrier can push iterates far along recession
directions, where cancellation swamps the violation measure. An
inconclusive solve is therefore repeated once with a tiny cost pulling each
variable toward its finite bound; the verdict never reads the objective.
"""

from __future__ import annotations

import dataclasses
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import lsqr

from .problem import LinearProgram, to_inequality_form
from .solver import SameRate, SolverConfig, Status, solve

__all__ = [
    "DEFAULT_DELTAS",
    "DeltaResult",
    "InteriorVerdict",
    "phase1_program",
    "feasibility_threshold",
    "tightened_feasible",
    "elastic_violation",
    "polish",
    "has_strict_interior",
]

DEFAULT_DELTAS = (1e-4, 1e-6, 1e-8)
X_PULL = 1e-6


@dataclasses.dataclass(frozen=True)
class DeltaResult:
    delta: float
    feasible: Optional[bool]
    elastic_sum: float
    threshold: float
    status: str
    iterations: int = 0


@dataclasses.dataclass(frozen=True)
class InteriorVerdict:
    """Outcome of :func:`has_strict_interior`.

    ``has_interior`` is ``None`` when a phase-1 solve broke down, in which
    case ``error`` says why.
    """

    problem_name: str
    has_interior: Optional[bool]
    deltas_tested: tuple
    agreement: bool
    results: tuple = ()
    error: str = ""

    def __post_init__(self):
        if not self.deltas_tested:
            raise ValueError("deltas_tested must be non-empty")


def phase1_program(lp: LinearProgram, delta: float, pull: float = 0.0) -> Optional[LinearProgram]:
    """Elastic feasibility LP for the tightened bounds, or ``None`` when the
    tightened bounds cross. ``pull`` is the cost toward each finite bound."""
    lo = lp.lower + delta
    hi = lp.upper - delta
    if np.any(lo > hi):
        return None
    m, n = lp.A.shape
    eye = sp.identity(m, format="csr")
    A = sp.hstack([lp.A, eye, -eye], format="csr")
    cx = np.where(np.isfinite(lo), pull, np.where(np.isfinite(hi), -pull, 0.0))
    c = np.concatenate([cx, np.ones(2 * m)])
    lower = np.concatenate([lo, np.zeros(2 * m)])
    upper = np.concatenate([hi, np.full(2 * m, np.inf)])
    return LinearProgram(c, A, lp.b, lower, upper, name=f"{lp.name}:phase1")


def feasibility_threshold(lp: LinearProgram, delta: float) -> float:
    """``1e-9 (1 + |b|_inf)``, capped at ``delta / 10``.

    Tightening an infeasible system by ``delta`` typically leaves an elastic
    optimum of order ``delta``, so a threshold above ``delta`` cannot tell
    the two cases apart.
    """
    b_inf = float(np.max(np.abs(lp.b), initial=0.0))
    return min(1e-9 * (1.0 + b_inf), 0.1 * delta)


def elastic_violation(A, b, x, lo, hi) -> float:
    """``|A x - b|_1`` after clipping ``x`` into ``[lo, hi]``."""
    x = np.clip(x, lo, hi)
    return float(np.sum(np.abs(np.asarray(A @ x).ravel() - b)))


def polish(A, b, x, lo, hi, steps: int = 5) -> tuple[np.ndarray, float]:
    """Reduce the violation of a box-feasible point by minimum-norm steps.

    Each step solves ``A_F dx = b - A x`` over a working set ``F``: coordinates
    on a bound leave it while the solution pushes them outward. The step is
    projected onto the box and halved until the violation decreases.
    """
    A = sp.csc_matrix(A)
    x = np.clip(np.asarray(x, dtype=float), lo, hi)
    best = elastic_violation(A, b, x, lo, hi)
    for _ in range(steps):
        at_lo, at_hi = x <= lo, x >= hi
        free = ~(at_lo & at_hi)
        dx = np.zeros_like(x)
        for _ in range(10):
            if not free.any():
                break
            dx[:] = 0.0
            dx[free] = lsqr(A[:, free], b - A @ x, atol=1e-15, btol=1e-15, iter_lim=5000)[0]
            blocked = free & ((at_lo & (dx < 0)) | (at_hi & (dx > 0)))
            if not blocked.any():
                break
            free &= ~blocked
        else:
            dx[(at_lo & (dx < 0)) | (at_hi & (dx > 0))] = 0.0
        # projected step, halved until it improves
        v, alpha = best, 1.0
        for _ in range(30):
            cand = np.clip(x + alpha * dx, lo, hi)
            v = elastic_violation(A, b, cand, lo, hi)
            if v < best:
                break
            alpha *= 0.5
        if not v < best:
            break
        x, best = cand, v
    return x, best


def _phase1_attempt(lp: LinearProgram, delta: float, pull: float, tol: float,
                    max_iter: int, thr: float) -> DeltaResult:
    prog = phase1_program(lp, delta, pull)
    n = lp.n
    lo, hi = lp.lower + delta, lp.upper - delta
    cfg = SolverConfig(strategy=SameRate(), tol=tol, max_iter=max_iter, shift="start")
    tr = solve(to_inequality_form(prog), cfg)
    xs = [r.iterate.x[:n] for r in tr.records]
    vs = [elastic_violation(lp.A, lp.b, x, lo, hi) for x in xs]
    k = int(np.argmin(vs))
    _, elastic = polish(lp.A, lp.b, xs[k], lo, hi)
    if elastic <= thr:
        return DeltaResult(delta, True, elastic, thr, tr.status.value, tr.iterations)
    if tr.status is not Status.OPTIMAL:
        return DeltaResult(delta, None, elastic, thr, tr.status.value, tr.iterations)
    return DeltaResult(delta, False, elastic, thr, tr.status.value, tr.iterations)


def tightened_feasible(lp: LinearProgram, delta: float, *, tol: float = 1e-9,
                       max_iter: int = 300, threshold: Optional[float] = None) -> DeltaResult:
    """Solve the phase-1 problem for one ``delta``.

    A point under the threshold proves feasibility whatever the solver status.
    Infeasibility is only declared when the solve terminated normally.
    """
    thr = feasibility_threshold(lp, delta) if threshold is None else threshold
    if phase1_program(lp, delta) is None:
        return DeltaResult(delta, False, float("inf"), thr, "bounds-cross")
    res = _phase1_attempt(lp, delta, 0.0, tol, max_iter, thr)
    if res.feasible is None:
        res = _phase1_attempt(lp, delta, X_PULL, tol, max_iter, thr)
    return res


def has_strict_interior(lp: LinearProgram, deltas: Sequence[float] = DEFAULT_DELTAS, *,
                        tol: float = 1e-9, max_iter: int = 300) -> InteriorVerdict:
    """Majority verdict over ``deltas`` with a flag for unanimous agreement."""
    deltas = tuple(float(d) for d in deltas)
    if not deltas or any(not d > 0 for d in deltas):
        raise ValueError("deltas must be a non-empty sequence of positive numbers")
    results = tuple(tightened_feasible(lp, d, tol=tol, max_iter=max_iter) for d in deltas)
    failed = [r for r in results if r.feasible is None]
    if failed:
        msg = "; ".join(f"delta={r.delta:g}: {r.status}" for r in failed)
        return InteriorVerdict(lp.name, None, deltas, False, results, error=msg)
    votes = [r.feasible for r in results]
    verdict = sum(votes) * 2 > len(votes)
    return InteriorVerdict(lp.name, bool(verdict), deltas, len(set(votes)) == 1, results)
