"""
Tail dual size across NETLIB
============================

The empirical distribution of the tail ``max_dual`` over a dozen small
NETLIB problems. The same batch is available as ``dualpath netlib``.
"""

from dualpath import Aggressive, SameRate, SolverConfig, solve, to_inequality_form
from dualpath.diagnostics import ecdf, ecdf_quantile, summary
from dualpath.mps import load_netlib

names = ["AFIRO", "SC50B", "SC50A", "SC105", "KB2", "ADLITTLE",
         "SCAGR7", "STOCFOR1", "BLEND", "SC205", "RECIPE", "SHARE2B"]

tails = {"same-rate": [], "aggressive": []}
for name in names:
    p = to_inequality_form(load_netlib(name))
    for strategy in (SameRate(), Aggressive()):
        s = summary(solve(p, SolverConfig(strategy=strategy)))
        tails[strategy.label].append(s.max_dual_tail)
        print(f"{name:9s} {strategy.label:11s} {s.status:18s} {s.max_dual_tail:10.3g}")

for label, values in tails.items():
    curve = ecdf(values)
    print(f"{label:11s} median {ecdf_quantile(curve, 0.5):10.3g}  "
          f"90% {ecdf_quantile(curve, 0.9):10.3g}")
