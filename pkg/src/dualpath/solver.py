"""Infeasible-start primal-dual interior point method.

The four strategies differ only in where they steer the primal residual
``a(x) + s`` each iteration:

=================  ===========================================
``SameRate``       ``r * mu``      (shifted log barrier)
``Aggressive``     ``0``           (full feasibility each step)
``SlowShift``      ``r * mu**beta``
``FixedPerturb``   ``0`` on the relaxed problem ``a(x) <= delta``
=================  ===========================================

``mu`` is only decreased when the current iterate is close to its target,
measured by the gate ``|grad L| + |a + s - target| + max(s*y) <=
gate_factor * mu * (1 + |y|)``. SameRate additionally waits until every
``s_i y_i`` is within ``centrality * mu`` of ``mu`` and then picks the
decrease from an affine-scaling probe; the other strategies use a fixed
centering ``sigma``. The shift ``r`` defaults to ``e``; ``shift="start"``
selects ``(a(x0) + s0) / mu0``, which puts the starting point on the path.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Optional, Sequence, Union

import numpy as np

from .kkt import (
    Direction,
    KKTSolveInfo,
    NewtonTargets,
    NumericalBreakdown,
    Regularization,
    assemble_and_solve,
)
from .problem import (
    InequalityProblem,
    Iterate,
    ResidualReport,
    ShiftedProblem,
    lagrangian_gradient,
    residuals,
)

__all__ = [
    "SameRate",
    "Aggressive",
    "SlowShift",
    "FixedPerturb",
    "Strategy",
    "parse_strategy",
    "SolverConfig",
    "Status",
    "TraceRecord",
    "Trace",
    "initial_point",
    "start_shift",
    "feasibility_target",
    "compute_direction",
    "step_length",
    "mu_and_eta_update",
    "termination_measure",
    "solve",
    "solve_nlp",
]


@dataclasses.dataclass(frozen=True)
class SameRate:
    """Primal residual tracks ``r * mu``; ``eta`` from an affine probe."""

    eta_max: float = 0.99
    centrality: Optional[float] = 1e-3
    label = "same-rate"

    def __post_init__(self):
        if not 0.0 < self.eta_max < 1.0:
            raise ValueError("eta_max must lie in (0, 1)")
        if self.centrality is not None and not self.centrality > 0.0:
            raise ValueError("centrality must be positive or None")


@dataclasses.dataclass(frozen=True)
class Aggressive:
    """Drive the primal residual to zero every step (IPOPT-like)."""

    sigma: float = 0.1
    label = "aggressive"

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")


@dataclasses.dataclass(frozen=True)
class SlowShift:
    """Primal residual tracks ``r * mu**beta``, slower than ``mu``."""

    beta: float
    sigma: float = 0.1

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")

    @property
    def label(self) -> str:
        return f"slow-shift:{self.beta:g}"


@dataclasses.dataclass(frozen=True)
class FixedPerturb:
    """Relax ``a(x) <= 0`` to ``a(x) <= delta`` once, then run Aggressive."""

    delta: float
    sigma: float = 0.1

    def __post_init__(self):
        if not self.delta > 0.0:
            raise ValueError("delta must be positive")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie in (0, 1)")

    @property
    def label(self) -> str:
        return f"fixed-perturb:{self.delta:g}"


Strategy = Union[SameRate, Aggressive, SlowShift, FixedPerturb]


def parse_strategy(text: str) -> Strategy:
    """Parse ``same-rate``, ``aggressive``, ``slow-shift:<beta>`` or
    ``fixed-perturb:<delta>``."""
    name, _, arg = text.strip().lower().partition(":")
    try:
        if name == "same-rate" and not arg:
            return SameRate()
        if name == "aggressive" and not arg:
            return Aggressive()
        if name == "slow-shift" and arg:
            return SlowShift(float(arg))
        if name == "fixed-perturb" and arg:
            return FixedPerturb(float(arg))
    except ValueError as exc:
        raise ValueError(f"invalid strategy {text!r}: {exc}") from None
    raise ValueError(f"unknown strategy {text!r}")


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Solver options.

    ``shift`` is the vector ``r`` of the shifted targets: ``None`` for
    ``e``, ``"start"`` for :func:`start_shift`, or an explicit vector.
    ``tol = 0`` disables optimal termination, so the run ends by
    divergence, breakdown or the iteration limit. ``seed`` is recorded for
    provenance only, since the method has no random choices.
    """

    strategy: Strategy = dataclasses.field(default_factory=SameRate)
    tol: float = 1e-6
    max_iter: int = 300
    tau: float = 0.995
    mu_init: Optional[float] = None
    shift: Union[None, str, np.ndarray] = None
    x0: Optional[np.ndarray] = None
    gate_factor: float = 1.0
    divergence_threshold: float = 1e12
    regularization: Regularization = dataclasses.field(default_factory=Regularization)
    debug: bool = False
    seed: int = 0

    def __post_init__(self):
        if not self.tol >= 0:
            raise ValueError("tol must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")
        if self.mu_init is not None and not self.mu_init > 0:
            raise ValueError("mu_init must be positive")


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    ITERATION_LIMIT = "IterationLimit"
    NUMERICAL_BREAKDOWN = "NumericalBreakdown"
    DIVERGING = "Diverging"


@dataclasses.dataclass(frozen=True)
class TraceRecord:
    iter: int
    mu: float
    eta: float
    alpha: float
    residuals: ResidualReport
    max_dual: float
    objective: float
    iterate: Iterate = dataclasses.field(repr=False, compare=False)
    primal_residual: np.ndarray = dataclasses.field(repr=False, compare=False)
    dual_norm: float = dataclasses.field(repr=False, compare=False, default=0.0)
    delta_w: float = dataclasses.field(compare=False, default=0.0)

    def row(self) -> dict:
        r = self.residuals
        return {
            "iter": self.iter,
            "mu": self.mu,
            "eta": self.eta,
            "alpha": self.alpha,
            "primal_inf": r.primal_inf,
            "dual_inf": r.dual_inf,
            "comp_max": r.comp_max,
            "comp_min": r.comp_min,
            "dual_l1": r.dual_l1,
            "max_dual": self.max_dual,
            "strict_comp": r.strict_comp,
            "feas_over_mu": r.feas_over_mu,
            "objective": self.objective,
        }


@dataclasses.dataclass
class Trace:
    records: list[TraceRecord]
    status: Status
    final: Iterate
    problem_name: str = ""
    strategy: str = ""
    tol: float = 1e-6
    m: int = 0
    message: str = ""

    def __len__(self) -> int:
        return len(self.records)

    @property
    def iterations(self) -> int:
        return self.records[-1].iter

    def column(self, name: str) -> np.ndarray:
        return np.array([rec.row()[name] for rec in self.records])


# ---------------------------------------------------------------------------
# building blocks


def initial_point(p: InequalityProblem, cfg: SolverConfig) -> Iterate:
    """``x = x0`` (default 0), ``s = max(1, 1.1|a(x)|)``, ``y = mu/s``."""
    x = np.zeros(p.n) if cfg.x0 is None else np.array(cfg.x0, dtype=float)
    a = p.constraints(x)
    if not np.all(np.isfinite(a)):
        raise FloatingPointError("constraint evaluation at the initial point is not finite")
    s = np.maximum(1.0, 1.1 * np.abs(a))
    g = p.gradient(x)
    mu = cfg.mu_init if cfg.mu_init is not None else max(1.0, float(np.max(np.abs(g), initial=0.0)))
    return Iterate(x, mu / s, s, float(mu))


def start_shift(p: InequalityProblem, it: Iterate) -> np.ndarray:
    """``r = (a(x0) + s0) / mu0``, which puts the starting point on the shifted path."""
    return (p.constraints(it.x) + it.s) / it.mu


def feasibility_target(strategy: Strategy, k: int, mu_k: float, r: np.ndarray) -> np.ndarray:
    """Value the primal residual ``a(x) + s`` is steered to at barrier ``mu_k``."""
    del k  # schedules depend on mu only
    r = np.asarray(r, dtype=float)
    if isinstance(strategy, SameRate):
        return r * mu_k
    if isinstance(strategy, SlowShift):
        return r * mu_k ** strategy.beta
    if isinstance(strategy, FixedPerturb):
        # the relaxation a(x) <= delta is folded into the problem itself
        return np.zeros_like(r)
    return np.zeros_like(r)


def newton_targets(p: InequalityProblem, it: Iterate, strategy: Strategy, eta: float,
                   r: np.ndarray, k: int = 0, cache: Optional[dict] = None) -> NewtonTargets:
    """Right-hand sides for barrier target ``(1 - eta) mu``."""
    cache = cache if cache is not None else {}
    if "grad_l" not in cache:
        cache["grad_l"] = lagrangian_gradient(p, it.x, it.y)
        cache["a"] = p.constraints(it.x)
    mu_t = (1.0 - eta) * it.mu
    shift = feasibility_target(strategy, k, mu_t, r) if mu_t > 0 else np.zeros(p.m)
    return NewtonTargets(
        target_dual=-cache["grad_l"],
        target_primal=shift - (cache["a"] + it.s),
        target_comp=mu_t - it.s * it.y,
    )


def compute_direction(p: InequalityProblem, it: Iterate, strategy: Strategy, eta: float,
                      r: Optional[np.ndarray] = None, reg: Optional[Regularization] = None,
                      *, cache: Optional[dict] = None, info: Optional[list] = None,
                      check: bool = False, k: int = 0) -> Direction:
    """Newton direction toward the strategy's targets at ``(1 - eta) mu``."""
    r = np.ones(p.m) if r is None else r
    cache = cache if cache is not None else {}
    t = newton_targets(p, it, strategy, eta, r, k, cache)
    if "jac" not in cache:
        cache["jac"] = p.jacobian(it.x)
        cache["hess"] = p.lagrangian_hessian(it.x, it.y)
    return assemble_and_solve(p, it, t, reg, hessian=cache["hess"], jacobian=cache["jac"],
                              info=info, check=check)


def _max_step(v: np.ndarray, dv: np.ndarray) -> float:
    neg = dv < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(-v[neg] / dv[neg]))


def step_length(it: Iterate, d: Direction, tau: float) -> float:
    """Fraction-to-boundary step: ``min(1, tau * alpha_max)``."""
    alpha_max = min(_max_step(it.s, d.ds), _max_step(it.y, d.dy))
    return float(min(1.0, tau * alpha_max))


_GATE_ROUNDING = 64.0 * np.finfo(float).eps


def _inf_norm(v: np.ndarray) -> float:
    return float(np.max(np.abs(v), initial=0.0))


def gate(p: InequalityProblem, it: Iterate, strategy: Strategy, r: np.ndarray,
         factor: float = 1.0, cache: Optional[dict] = None) -> bool:
    """Is ``it`` close enough to the current barrier target to decrease mu?"""
    cache = cache if cache is not None else {}
    if "grad_l" not in cache:
        cache["grad_l"] = lagrangian_gradient(p, it.x, it.y)
        cache["a"] = p.constraints(it.x)
    shift = feasibility_target(strategy, 0, it.mu, r)
    lhs = (np.linalg.norm(cache["grad_l"])
           + np.linalg.norm(cache["a"] + it.s - shift)
           + float(np.max(it.s * it.y, initial=0.0)))
    # residuals cannot be evaluated below rounding level in x, s and a
    noise = _GATE_ROUNDING * (1.0 + _inf_norm(it.x) + _inf_norm(it.s) + _inf_norm(cache["a"]))
    return bool(lhs <= factor * it.mu * (1.0 + np.linalg.norm(it.y)) + noise)


def mu_and_eta_update(p: InequalityProblem, it: Iterate, trace, strategy: Strategy,
                      cfg: Optional[SolverConfig] = None, r: Optional[np.ndarray] = None,
                      *, cache: Optional[dict] = None) -> tuple[float, float]:
    """Return ``(eta, (1 - eta) * mu)``.

    ``eta = 0`` unless the gate holds. SameRate then takes ``eta = 1 -
    sigma`` with Mehrotra's ``sigma = (mu_aff / mu_avg)**3`` from an affine
    probe, clipped to ``[0, eta_max]``; the other strategies use their fixed
    ``sigma``. With a step ``alpha`` the solver applies ``mu <- (1 - alpha
    eta) mu``, which equals the returned value for a full step.
    """
    del trace
    cfg = cfg or SolverConfig(strategy=strategy)
    r = np.ones(p.m) if r is None else r
    cache = cache if cache is not None else {}
    if not gate(p, it, strategy, r, cfg.gate_factor, cache):
        return 0.0, it.mu
    if isinstance(strategy, SameRate):
        if strategy.centrality is not None and p.m and (
                np.max(np.abs(it.s * it.y - it.mu)) > strategy.centrality * it.mu):
            return 0.0, it.mu
        probe = compute_direction(p, it, strategy, 1.0, r, cfg.regularization, cache=cache)
        alpha_aff = min(1.0, _max_step(it.s, probe.ds), _max_step(it.y, probe.dy))
        s_aff = it.s + alpha_aff * probe.ds
        y_aff = it.y + alpha_aff * probe.dy
        mu_avg = float(it.s @ it.y) / p.m
        mu_aff = max(float(s_aff @ y_aff), 0.0) / p.m
        sigma = (mu_aff / mu_avg) ** 3 if mu_avg > 0 else 1.0
        eta = float(np.clip(1.0 - sigma, 0.0, strategy.eta_max))
    else:
        eta = 1.0 - strategy.sigma
    return eta, (1.0 - eta) * it.mu


def termination_measure(p: InequalityProblem, it: Iterate, grad_l=None, a=None) -> float:
    """``max(100/max(|y|_inf, 100) * max(|grad L|_inf, |Sy|_inf), |a+s|_inf)``."""
    grad_l = lagrangian_gradient(p, it.x, it.y) if grad_l is None else grad_l
    a = p.constraints(it.x) if a is None else a
    ymax = float(np.max(it.y, initial=0.0))
    scaled = 100.0 / max(ymax, 100.0) * max(float(np.max(np.abs(grad_l), initial=0.0)),
                                             float(np.max(it.s * it.y, initial=0.0)))
    return max(scaled, float(np.max(np.abs(a + it.s), initial=0.0)))


def _perturbed_kkt_norm(p, x, y, s, shift, mu_t):
    a = p.constraints(x)
    if not np.all(np.isfinite(a)):
        return math.inf
    g = lagrangian_gradient(p, x, y)
    return float(np.sqrt(g @ g + np.sum((a + s - shift) ** 2) + np.sum((s * y - mu_t) ** 2)))


def _record(p, it, k, eta, alpha, delta_w=0.0, cache=None) -> TraceRecord:
    a = p.constraints(it.x) if cache is None else cache["a"]
    grad_l = lagrangian_gradient(p, it.x, it.y) if cache is None else cache["grad_l"]
    rep = residuals(p, it)
    return TraceRecord(
        iter=k,
        mu=it.mu,
        eta=eta,
        alpha=alpha,
        residuals=rep,
        max_dual=float(np.max(it.y, initial=0.0)),
        objective=p.objective(it.x),
        iterate=it.copy(),
        primal_residual=a + it.s,
        dual_norm=float(np.linalg.norm(grad_l)),
        delta_w=delta_w,
    )


# ---------------------------------------------------------------------------
# main loop


def solve(p: InequalityProblem, cfg: Optional[SolverConfig] = None, *,
          line_search: Optional[bool] = None) -> Trace:
    """Run the interior point method and return the full trajectory.

    Failures are reported through :attr:`Trace.status`; only exceptions
    raised by the problem's evaluators propagate.
    """
    cfg = cfg or SolverConfig()
    strategy = cfg.strategy
    if isinstance(strategy, FixedPerturb):
        p = ShiftedProblem(p, strategy.delta)
    if line_search is None:
        line_search = not p.is_linear
    it = initial_point(p, cfg)
    if cfg.shift is None:
        r = np.ones(p.m)
    elif isinstance(cfg.shift, str):
        if cfg.shift != "start":
            raise ValueError(f"unknown shift {cfg.shift!r}; use None, 'start' or a vector")
        r = start_shift(p, it)
    else:
        r = np.asarray(cfg.shift, dtype=float)
    if r.shape != (p.m,) or not np.all(r > 0):
        raise ValueError("shift vector must be positive with one entry per constraint")
    records = [_record(p, it, 0, 0.0, 0.0)]
    status, message = Status.ITERATION_LIMIT, ""
    label = strategy.label

    def finish(st, msg=""):
        return Trace(records, st, it, problem_name=p.name, strategy=label, tol=cfg.tol,
                     m=p.m, message=msg)

    for k in range(1, cfg.max_iter + 1):
        cache: dict = {}
        cache["grad_l"] = lagrangian_gradient(p, it.x, it.y)
        cache["a"] = p.constraints(it.x)
        if termination_measure(p, it, cache["grad_l"], cache["a"]) <= cfg.tol:
            return finish(Status.OPTIMAL)

        info: list[KKTSolveInfo] = []
        try:
            eta, mu_target = mu_and_eta_update(p, it, records, strategy, cfg, r, cache=cache)
            d = compute_direction(p, it, strategy, eta, r, cfg.regularization, cache=cache,
                                  info=info, check=cfg.debug, k=k)
        except NumericalBreakdown as exc:
            return finish(Status.NUMERICAL_BREAKDOWN, str(exc))
        if not d.is_finite():
            return finish(Status.NUMERICAL_BREAKDOWN, "non-finite Newton direction")

        alpha = step_length(it, d, cfg.tau)
        if line_search:
            shift = feasibility_target(strategy, k, mu_target, r)
            phi0 = _perturbed_kkt_norm(p, it.x, it.y, it.s, shift, mu_target)
            while alpha >= 1e-8:
                phi = _perturbed_kkt_norm(p, it.x + alpha * d.dx, it.y + alpha * d.dy,
                                          it.s + alpha * d.ds, shift, mu_target)
                if phi < phi0:
                    break
                alpha *= 0.5
            else:
                return finish(Status.NUMERICAL_BREAKDOWN, "line search failed")

        it = Iterate(
            it.x + alpha * d.dx,
            it.y + alpha * d.dy,
            it.s + alpha * d.ds,
            it.mu - alpha * (it.mu - mu_target),
        )
        if not it.is_interior:
            return finish(Status.NUMERICAL_BREAKDOWN, "iterate left the interior")
        delta_w = info[-1].delta_w if info else 0.0
        records.append(_record(p, it, k, eta, alpha, delta_w))
        if records[-1].max_dual > cfg.divergence_threshold:
            return finish(Status.DIVERGING)

    grad_l = lagrangian_gradient(p, it.x, it.y)
    if termination_measure(p, it, grad_l) <= cfg.tol:
        return finish(Status.OPTIMAL)
    return finish(status, message)


def solve_nlp(p: InequalityProblem, cfg: Optional[SolverConfig] = None) -> Trace:
    """:func:`solve` with the residual-norm backtracking line search enabled."""
    return solve(p, cfg, line_search=True)


def run_many(p: InequalityProblem, strategies: Sequence[Strategy], **overrides) -> dict:
    """Solve ``p`` once per strategy; keys are strategy labels."""
    return {s.label: solve(p, SolverConfig(strategy=s, **overrides)) for s in strategies}
