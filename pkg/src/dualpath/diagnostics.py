"""Trajectory diagnostics: rate certificates, regimes, bounds and metrics.

All functions here are pure functions of a :class:`~dualpath.solver.Trace`.
A trace's *tail* is its last ``ceil(tail_frac * len(trace))`` records,
extended to the minimum a fit needs when the trace is long enough.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import math
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .problem import AffineProblem
from .problems import MultiplierSet
from .solver import SameRate, SolverConfig, Status, Trace, solve

__all__ = [
    "TraceTooShort",
    "IncompleteCertificate",
    "DegenerateFit",
    "RateCertificate",
    "certify",
    "Regime",
    "RegimeClass",
    "classify_regime",
    "theorem1_bound",
    "SummaryMetrics",
    "summary",
    "ecdf",
    "ecdf_quantile",
    "LimitClass",
    "multiplier_limit_check",
    "support",
    "maximal_support",
    "minimal_support_size",
    "MIN_TAIL",
    "MAX_SPREAD",
]

MIN_TAIL = 5
# largest ratio of fitted upper to lower constant still counted as "moderate"
MAX_SPREAD = 1e3


class TraceTooShort(ValueError):
    pass


class IncompleteCertificate(ValueError):
    pass


class DegenerateFit(ValueError):
    pass


def _tail(trace: Trace, tail_frac: float, min_records: int = 1):
    if not 0.0 < tail_frac <= 1.0:
        raise ValueError(f"tail_frac must lie in (0, 1], got {tail_frac}")
    n = len(trace.records)
    # a fit needs min_records points, so short runs borrow earlier records
    k = min(n, max(math.ceil(tail_frac * n), min_records))
    if k < min_records:
        raise TraceTooShort(f"trace has {n} records, need at least {min_records}")
    return trace.records[n - k:], n - k


@dataclasses.dataclass(frozen=True)
class RateCertificate:
    """Tightest constants of the rate conditions over a trajectory tail.

    Attributes
    ----------
    b, c : float
        ``b mu <= s_i y_i <= c mu`` for every constraint.
    ell, u : float
        ``ell mu <= a_i + s_i <= u mu`` on the active constraints.
    d : float
        ``|grad L|_2 <= d mu (|y|_1 + 1)``.
    tail_start : int
        Index of the first tail record.
    holds : dict
        Keys ``"complementarity"``, ``"primal_rate"`` and ``"dual_rate"``.
    active : tuple of int
        Constraints used for ``ell`` and ``u``.
    """

    b: float
    c: float
    ell: float
    u: float
    d: float
    tail_start: int
    holds: dict
    active: tuple = ()

    @property
    def all_hold(self) -> bool:
        return all(self.holds.values())

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["active"] = list(self.active)
        return out


def _band_holds(lo: float, hi: float) -> bool:
    return bool(np.isfinite(lo) and np.isfinite(hi) and 0.0 < lo <= hi and hi <= MAX_SPREAD * lo)


def certify(trace: Trace, tail_frac: float = 0.5) -> RateCertificate:
    """Fit the rate constants over the tail of ``trace``.

    A two-sided condition is reported as holding when its tight constants
    are finite, positive and within a factor :data:`MAX_SPREAD` of each
    other. A finite tail always admits *some* constants; the spread is what
    separates a moderate band from one whose lower constant is heading to
    zero. The active set is ``{i : s_i <= 10 sqrt(tol)}`` at the final
    iterate, or every constraint when that set is empty.
    """
    tail, start = _tail(trace, tail_frac, MIN_TAIL)
    mus = np.array([r.mu for r in tail])
    if np.any(mus <= 0):
        raise ValueError("certify needs mu > 0 on every tail record")
    S = np.array([r.iterate.s for r in tail])
    Y = np.array([r.iterate.y for r in tail])
    P = np.array([r.primal_residual for r in tail])
    dual = np.array([r.dual_norm for r in tail])

    comp = S * Y / mus[:, None]
    b, c = (float(comp.min()), float(comp.max())) if comp.size else (1.0, 1.0)

    active = np.flatnonzero(trace.final.s <= 10.0 * math.sqrt(trace.tol))
    if active.size == 0:
        active = np.arange(S.shape[1])
    rate = P[:, active] / mus[:, None]
    ell, u = (float(rate.min()), float(rate.max())) if rate.size else (1.0, 1.0)

    d = float(np.max(dual / (mus * (np.abs(Y).sum(axis=1) + 1.0))))
    holds = {
        "complementarity": _band_holds(b, c),
        "primal_rate": _band_holds(ell, u),
        "dual_rate": bool(np.isfinite(d) and d >= 0.0),
    }
    return RateCertificate(b, c, ell, u, d, start, holds, tuple(int(i) for i in active))


def theorem1_bound(cert: RateCertificate, y_star_l1: float, m: int) -> float:
    """Asymptotic bound on ``|y|_1`` for convex problems.

    ``(2u/ell) |y*|_1 + (4c/ell) m + 2 (c + d) / ell``.
    """
    if not cert.all_hold:
        failed = sorted(k for k, v in cert.holds.items() if not v)
        raise IncompleteCertificate(f"certificate does not hold for {failed}")
    ell = cert.ell
    return 2.0 * cert.u / ell * y_star_l1 + 4.0 * cert.c / ell * m + 2.0 * (cert.c + cert.d) / ell


class Regime(str, enum.Enum):
    FASTER = "Faster"
    SAME_RATE = "SameRate"
    SLOWER = "Slower"
    INDETERMINATE = "Indeterminate"


@dataclasses.dataclass(frozen=True)
class RegimeClass:
    """Fit of ``|a + s|_inf ~ C mu**p`` over a trace tail."""

    regime: Regime
    p: float
    r2: float
    n_points: int


def classify_regime(trace: Trace, tail_frac: float = 0.5, *,
                    band: tuple[float, float] = (0.8, 1.25),
                    min_r2: float = 0.9) -> RegimeClass:
    """Least-squares fit of ``log |a+s|_inf`` against ``log mu``.

    Records whose primal residual is exactly zero carry no rate information
    and are dropped before fitting.
    """
    tail, _ = _tail(trace, tail_frac, MIN_TAIL)
    mu = np.array([r.mu for r in tail])
    pinf = np.array([r.residuals.primal_inf for r in tail])
    keep = (mu > 0) & (pinf > 0)
    if keep.sum() < 2:
        raise DegenerateFit("fewer than two records with positive mu and residual")
    lx, ly = np.log(mu[keep]), np.log(pinf[keep])
    if np.ptp(lx) == 0.0:
        raise DegenerateFit("mu is constant over the tail")
    p, intercept = np.polyfit(lx, ly, 1)
    ss_res = float(np.sum((ly - (p * lx + intercept)) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    lo, hi = band
    if r2 < min_r2:
        regime = Regime.INDETERMINATE
    elif p > hi:
        regime = Regime.FASTER
    elif p < lo:
        regime = Regime.SLOWER
    else:
        regime = Regime.SAME_RATE
    return RegimeClass(regime, float(p), float(r2), int(keep.sum()))


@dataclasses.dataclass(frozen=True)
class SummaryMetrics:
    max_dual_tail: float
    strict_comp_tail: float
    iterations: int
    status: str
    problem: str = ""
    strategy: str = ""

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def summary(trace: Trace, tail_frac: float = 0.2) -> SummaryMetrics:
    """Largest ``|y|_inf`` and smallest ``min(s + y)`` over the trailing records."""
    tail, _ = _tail(trace, tail_frac)
    status = trace.status.value if isinstance(trace.status, Status) else str(trace.status)
    return SummaryMetrics(
        max_dual_tail=max(r.max_dual for r in tail),
        strict_comp_tail=min(r.residuals.strict_comp for r in tail),
        iterations=trace.iterations,
        status=status,
        problem=trace.problem_name,
        strategy=trace.strategy,
    )


def ecdf(values: Iterable[Union[SummaryMetrics, float]]) -> list[tuple[float, float]]:
    """Empirical distribution: sorted values paired with ``k / N``."""
    v = sorted(x.max_dual_tail if isinstance(x, SummaryMetrics) else float(x) for x in values)
    if not v:
        raise ValueError("ecdf of an empty sequence")
    n = len(v)
    return [(x, (k + 1) / n) for k, x in enumerate(v)]


def ecdf_quantile(curve: Sequence[tuple[float, float]], theta: float) -> float:
    """Smallest value whose cumulative fraction reaches ``theta``."""
    if not 0.0 <= theta <= 1.0:
        raise ValueError("theta must lie in [0, 1]")
    for value, frac in curve:
        if frac >= theta - 1e-12:
            return value
    return curve[-1][0]


class LimitClass(str, enum.Enum):
    MAX_COMPLEMENTARY = "MaxComplementary"
    MIN_COMPLEMENTARY = "MinComplementary"
    NEITHER = "Neither"


def support(y: np.ndarray, zero_tol: float) -> frozenset:
    return frozenset(int(i) for i in np.flatnonzero(np.asarray(y) > zero_tol))


def maximal_support(mset: MultiplierSet, zero_tol: float = 1e-4, cap: float = 1e3) -> frozenset:
    """Union of supports over the multiplier set.

    Each coordinate is maximized over ``{0 <= y <= cap, E y = g}`` with the
    package's own interior point method; the cap keeps unbounded sets
    tractable without changing which coordinates can be positive.
    """
    E, g = np.atleast_2d(mset.E), np.asarray(mset.g, dtype=float)
    k, m = E.shape
    # rows: E y - g, g - E y, -y, y - cap
    J = np.vstack([E, -E, -np.eye(m), np.eye(m)])
    h = np.concatenate([g, -g, np.zeros(m), np.full(m, cap)])
    out = set()
    for i in range(m):
        c = np.zeros(m)
        c[i] = -1.0
        p = AffineProblem(c, J, h, name=f"max_y{i}")
        tr = solve(p, SolverConfig(strategy=SameRate(), tol=1e-9, max_iter=200))
        if tr.status is not Status.OPTIMAL:
            raise RuntimeError(f"support LP for coordinate {i} ended with {tr.status.value}")
        if tr.final.x[i] > zero_tol:
            out.add(i)
    return frozenset(out)


def minimal_support_size(mset: MultiplierSet, tol: float = 1e-9) -> int:
    """Smallest support among the vertices of ``{y >= 0 : E y = g}``."""
    E, g = np.atleast_2d(mset.E), np.asarray(mset.g, dtype=float)
    m = E.shape[1]
    rank = np.linalg.matrix_rank(E)
    best = None
    for size in range(0, rank + 1):
        for cols in itertools.combinations(range(m), size):
            y = np.zeros(m)
            if size:
                sub = E[:, cols]
                if np.linalg.matrix_rank(sub) < size:
                    continue
                y[list(cols)] = np.linalg.lstsq(sub, g, rcond=None)[0]
            if np.all(y >= -tol) and np.max(np.abs(E @ y - g), initial=0.0) <= tol * (1 + np.abs(g).max(initial=0)):
                best = int(np.sum(y > tol))
                break
        if best is not None:
            return best
    raise ValueError("multiplier set is empty")


def multiplier_limit_check(trace: Trace, mset: Optional[MultiplierSet], *,
                           tail_frac: float = 0.2, zero_tol: float = 1e-4) -> LimitClass:
    """Compare the support of the tail-averaged multiplier with the extremes.

    ``MaxComplementary`` when the support equals the union of supports over
    the set, ``MinComplementary`` when its size equals the smallest vertex
    support, ``Neither`` otherwise. A set with a single support pattern
    reports ``MaxComplementary``.
    """
    if mset is None:
        raise ValueError("unknown multiplier set")
    tail, _ = _tail(trace, tail_frac)
    ybar = np.mean([r.iterate.y for r in tail], axis=0)
    supp = support(ybar, zero_tol)
    if supp == maximal_support(mset, zero_tol):
        return LimitClass.MAX_COMPLEMENTARY
    if len(supp) == minimal_support_size(mset):
        return LimitClass.MIN_COMPLEMENTARY
    return LimitClass.NEITHER
