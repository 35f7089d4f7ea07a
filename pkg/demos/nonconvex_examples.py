"""
Nonconvex problems where MFCQ fails
===================================

Two touching disks, an LP with a complementarity constraint and a small
water network. SameRate keeps the duals of order one on all three.
"""

from dualpath import Aggressive, SameRate, SolverConfig, solve_nlp
from dualpath.diagnostics import summary
from dualpath.problems import circles, lpcc, water_network

for ex in (circles(), lpcc(), water_network()):
    for strategy in (SameRate(), Aggressive()):
        tr = solve_nlp(ex.problem, SolverConfig(strategy=strategy))
        s = summary(tr)
        print(f"{ex.name:14s} {strategy.label:11s} {tr.status.value:18s} "
              f"x = {tr.final.x.round(6)}  tail max_dual {s.max_dual_tail:8.3g}  "
              f"strict {s.strict_comp_tail:.2g}")
