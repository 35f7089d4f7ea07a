"""Primal-dual interior point methods and the behaviour of their multipliers."""

from .problem import (
    AffineProblem,
    CallbackProblem,
    InequalityProblem,
    Iterate,
    LinearProgram,
    NonlinearProgram,
    ResidualReport,
    ShiftedProblem,
    lagrangian_gradient,
    residuals,
    to_inequality_form,
)
from .solver import (
    Aggressive,
    FixedPerturb,
    SameRate,
    SlowShift,
    SolverConfig,
    Status,
    Trace,
    TraceRecord,
    parse_strategy,
    solve,
    solve_nlp,
)

from .diagnostics import (
    RateCertificate,
    Regime,
    RegimeClass,
    SummaryMetrics,
    certify,
    classify_regime,
    ecdf,
    summary,
    theorem1_bound,
)
from .interior import InteriorVerdict, has_strict_interior

__version__ = "0.1.0"
