import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dualpath import (
    AffineProblem,
    Aggressive,
    Iterate,
    SameRate,
    SlowShift,
    SolverConfig,
    Status,
    Trace,
    solve,
    solve_nlp,
    to_inequality_form,
)
from dualpath.diagnostics import (
    DegenerateFit,
    IncompleteCertificate,
    LimitClass,
    RateCertificate,
    Regime,
    SummaryMetrics,
    TraceTooShort,
    certify,
    classify_regime,
    ecdf,
    ecdf_quantile,
    maximal_support,
    minimal_support_size,
    multiplier_limit_check,
    summary,
    theorem1_bound,
)
from dualpath.problems import (
    MultiplierSet,
    circles,
    dup_path_limit,
    duplicated_constraint_lp,
    toy_lp,
)
from dualpath.solver import _record

# t = (1 + sqrt 17) / 4 solves 2t^2 - t - 2 = 0; limit = (1/(t+1), 1/(2t+1))
DUP_LIMIT = (0.43844718719117, 0.28077640640442)


def synthetic_trace(mus, residual, comp=lambda mu: mu, m=2):
    """Trace of a problem with ``a(x) = -e`` and ``grad L = 0`` whose
    iterates have ``a + s = residual(mu)`` and ``s y = comp(mu)``."""
    p = AffineProblem(np.zeros(1), np.zeros((m, 1)), np.ones(m))
    recs = []
    for k, mu in enumerate(mus):
        s = np.full(m, 1.0 + residual(mu))
        y = comp(mu) / s
        recs.append(_record(p, Iterate(np.zeros(1), y, s, mu), k, 0.0, 1.0))
    return Trace(recs, Status.OPTIMAL, recs[-1].iterate, problem_name="synthetic", m=m)


MUS = [10.0 ** -k for k in range(1, 11)]


# --- certify ------------------------------------------------------------------

def test_certify_exact_shifted_path():
    cert = certify(synthetic_trace(MUS, lambda mu: mu))
    assert cert.b == pytest.approx(1.0, rel=1e-12)
    assert cert.c == pytest.approx(1.0, rel=1e-12)
    assert cert.ell == pytest.approx(1.0, rel=1e-6)
    assert cert.u == pytest.approx(1.0, rel=1e-6)
    assert cert.d == 0.0
    assert cert.all_hold


def test_certify_toy_same_rate():
    cert = certify(solve(toy_lp().problem, SolverConfig(strategy=SameRate())))
    assert cert.holds["complementarity"] and cert.holds["primal_rate"]
    assert cert.u / cert.ell <= 10


def test_certify_toy_aggressive_primal_rate_fails():
    tr = solve(toy_lp().problem, SolverConfig(strategy=Aggressive(), tol=0.0))
    cert = certify(tr)
    assert not cert.holds["primal_rate"]
    assert cert.ell / cert.u < 1e-3


def test_certify_needs_five_records():
    with pytest.raises(TraceTooShort):
        certify(synthetic_trace(MUS[:4], lambda mu: mu))


def test_certificate_invariants_and_dict():
    cert = certify(synthetic_trace(MUS, lambda mu: 3 * mu, lambda mu: 2 * mu))
    assert 0 < cert.b <= cert.c and 0 < cert.ell <= cert.u and cert.d >= 0
    d = cert.as_dict()
    assert set(d["holds"]) == {"complementarity", "primal_rate", "dual_rate"}


@given(st.integers(0, 1000))
def test_certify_monotone_in_tail(seed):
    rng = np.random.default_rng(seed)
    noise = dict(zip(MUS, rng.uniform(0.5, 2.0, len(MUS))))
    tr = synthetic_trace(MUS, lambda mu: noise[mu] * mu, lambda mu: noise[mu] ** 2 * mu)
    small, large = certify(tr, 0.5), certify(tr, 0.9)
    assert large.u >= small.u and large.c >= small.c and large.d >= small.d
    assert large.ell <= small.ell and large.b <= small.b


# --- classify_regime ------------------------------------------------------------

def test_regime_toy_same_rate():
    reg = classify_regime(solve(toy_lp().problem, SolverConfig(strategy=SameRate())))
    assert reg.regime is Regime.SAME_RATE
    assert 0.8 <= reg.p <= 1.25


def test_regime_slow_shift():
    reg = classify_regime(solve(toy_lp().problem, SolverConfig(strategy=SlowShift(0.5))))
    assert reg.regime is Regime.SLOWER
    assert reg.p == pytest.approx(0.5, abs=0.05)


def test_regime_synthetic_faster():
    reg = classify_regime(synthetic_trace(MUS, lambda mu: mu ** 2))
    assert reg.regime is Regime.FASTER
    assert reg.p == pytest.approx(2.0, abs=1e-3)


def test_regime_indeterminate_on_poor_fit():
    rng = np.random.default_rng(0)
    noise = dict(zip(MUS, 10.0 ** rng.uniform(-6, 6, len(MUS))))
    reg = classify_regime(synthetic_trace(MUS, lambda mu: noise[mu] * mu))
    assert reg.regime is Regime.INDETERMINATE
    assert reg.r2 < 0.9


def test_regime_degenerate_fit():
    with pytest.raises(DegenerateFit):
        classify_regime(synthetic_trace([1e-3] * 10, lambda mu: mu))


# --- theorem1_bound -------------------------------------------------------------

def _cert(**kw):
    base = dict(b=1.0, c=1.0, ell=1.0, u=1.0, d=0.0, tail_start=0,
                holds={"complementarity": True, "primal_rate": True, "dual_rate": True})
    base.update(kw)
    return RateCertificate(**base)


def test_theorem1_arithmetic():
    assert theorem1_bound(_cert(), 2.0, 2) == 14.0


def test_theorem1_incomplete_certificate():
    cert = _cert(holds={"complementarity": True, "primal_rate": False, "dual_rate": True})
    with pytest.raises(IncompleteCertificate):
        theorem1_bound(cert, 2.0, 2)


@pytest.mark.parametrize("example, y_star", [
    (toy_lp, np.array([1.0, 1.0])),
    (duplicated_constraint_lp, np.array([1.0, 0.0])),
])
def test_theorem1_bound_holds_on_same_rate_tail(example, y_star):
    ex = example()
    tr = solve(ex.problem, SolverConfig(strategy=SameRate()))
    cert = certify(tr)
    bound = theorem1_bound(cert, float(np.abs(y_star).sum()), ex.problem.m)
    assert math.isfinite(bound)
    assert max(r.residuals.dual_l1 for r in tr.records[cert.tail_start:]) <= bound


# --- summary and ECDF -----------------------------------------------------------

def test_summary_constant_trace():
    tr = synthetic_trace(MUS, lambda mu: mu, lambda mu: 3.0 * (1.0 + mu))
    assert summary(tr).max_dual_tail == pytest.approx(3.0)


def test_summary_toy_and_circles():
    assert summary(solve(toy_lp().problem, SolverConfig())).max_dual_tail <= 1.5
    assert summary(solve_nlp(circles().problem, SolverConfig())).strict_comp_tail >= 1e-2


def test_summary_tail_fraction_validated():
    with pytest.raises(ValueError):
        summary(synthetic_trace(MUS, lambda mu: mu), 0.0)


def test_ecdf_examples():
    assert ecdf([1.0, 10.0, 100.0]) == [(1.0, 1 / 3), (10.0, 2 / 3), (100.0, 1.0)]
    assert ecdf([5.0]) == [(5.0, 1.0)]
    with pytest.raises(ValueError):
        ecdf([])


def test_ecdf_accepts_summaries():
    s = [SummaryMetrics(v, 1.0, 3, "Optimal") for v in (4.0, 2.0)]
    assert ecdf(s) == [(2.0, 0.5), (4.0, 1.0)]


@given(st.lists(st.floats(0, 1e12, allow_nan=False), min_size=1, max_size=50))
def test_ecdf_monotone(values):
    curve = ecdf(values)
    xs, fs = zip(*curve)
    assert all(a <= b for a, b in zip(xs, xs[1:]))
    assert all(a < b for a, b in zip(fs, fs[1:]))
    assert fs[-1] == 1.0


def test_ecdf_quantile():
    curve = ecdf([1.0, 10.0, 100.0, 1000.0])
    assert ecdf_quantile(curve, 0.5) == 10.0
    assert ecdf_quantile(curve, 1.0) == 1000.0
    assert ecdf_quantile(curve, 0.0) == 1.0


# --- multiplier limits ----------------------------------------------------------

def test_dup_limit_oracle():
    t = (1 + math.sqrt(17)) / 4
    assert 2 * t * t - t - 2 == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(dup_path_limit(), DUP_LIMIT, rtol=1e-12)
    assert DUP_LIMIT[0] + 2 * DUP_LIMIT[1] == pytest.approx(1.0, abs=1e-13)


def test_dup_same_rate_is_maximally_complementary():
    ex = duplicated_constraint_lp()
    tr = solve(ex.problem, SolverConfig(strategy=SameRate()))
    assert multiplier_limit_check(tr, ex.known_multiplier_set) is LimitClass.MAX_COMPLEMENTARY
    np.testing.assert_allclose(tr.final.y, DUP_LIMIT, atol=1e-3)


def test_dup_slow_shift_is_minimally_complementary():
    ex = duplicated_constraint_lp()
    tr = solve(ex.problem, SolverConfig(strategy=SlowShift(0.5)))
    assert multiplier_limit_check(tr, ex.known_multiplier_set) is LimitClass.MIN_COMPLEMENTARY
    y = np.sort(tr.final.y)
    assert y[0] <= 1e-4 and y[1] >= 0.1


def test_toy_same_rate_limit():
    ex = toy_lp()
    tr = solve(ex.problem, SolverConfig(strategy=SameRate()))
    assert multiplier_limit_check(tr, ex.known_multiplier_set) is LimitClass.MAX_COMPLEMENTARY
    np.testing.assert_allclose(tr.final.y, [1.0, 1.0], atol=1e-6)


def test_limit_check_requires_set():
    tr = solve(toy_lp().problem, SolverConfig())
    with pytest.raises(ValueError):
        multiplier_limit_check(tr, None)


def test_supports_of_known_sets():
    dup = duplicated_constraint_lp().known_multiplier_set
    assert maximal_support(dup) == frozenset({0, 1})
    assert minimal_support_size(dup) == 1
    # {y1 = y2 >= 0}: the only vertex is the origin
    toy = toy_lp().known_multiplier_set
    assert maximal_support(toy) == frozenset({0, 1})
    assert minimal_support_size(toy) == 0
    single = MultiplierSet(np.array([[1.0, 0.0]]), np.array([1.0]))
    assert maximal_support(single) == frozenset({0, 1})


def test_theorem4_divergence_trace_level():
    # empty-interior LP, Faster trace with positive complementarity constant:
    # max_dual strictly increases over the tail
    tr = solve(toy_lp().problem, SolverConfig(strategy=Aggressive(), tol=0.0))
    reg = classify_regime(tr)
    cert = certify(tr)
    assert reg.regime is Regime.FASTER and cert.b > 0
    tail = [r.max_dual for r in tr.records[cert.tail_start:]]
    assert all(b > a for a, b in zip(tail, tail[1:]))
