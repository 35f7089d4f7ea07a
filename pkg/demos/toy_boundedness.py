"""
Bounded and exploding multipliers on a one-variable LP
======================================================

``min 0  s.t.  x <= 1,  x >= 1`` has no strict interior and every
``y1 = y2 >= 0`` is a multiplier. Reducing infeasibility at the same rate as
the barrier parameter keeps the duals bounded; driving it to zero faster
does not.
"""

from dualpath import Aggressive, FixedPerturb, SameRate, SolverConfig, solve
from dualpath.problems import toy_lp

p = toy_lp().problem

for strategy, tol in ((SameRate(), 1e-6), (Aggressive(), 0.0), (FixedPerturb(1e-8), 1e-6)):
    tr = solve(p, SolverConfig(strategy=strategy, tol=tol))
    peak = max(r.max_dual for r in tr.records)
    print(f"{strategy.label:22s} {tr.status.value:12s} iterations {tr.iterations:3d}  "
          f"peak max_dual {peak:9.3g}  final {tr.records[-1].max_dual:9.3g}")

# the Aggressive run, iteration by iteration: y grows like mu / |a(x) + s|
tr = solve(p, SolverConfig(strategy=Aggressive(), tol=0.0))
print("\n iter       mu      primal_inf   max_dual")
for r in tr.records[::5]:
    print(f"{r.iter:5d} {r.mu:10.2e} {r.residuals.primal_inf:12.2e} {r.max_dual:10.3g}")
