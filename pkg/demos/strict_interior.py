"""
Does the LP have a strict interior?
===================================

Bounds are tightened by ``delta`` and an elastic phase-1 LP decides whether
the tightened system is still feasible. Three values of ``delta`` vote.
"""

from dualpath.interior import has_strict_interior
from dualpath.mps import load_netlib
from dualpath.problems import toy_lp

lps = [toy_lp().lp] + [load_netlib(n) for n in ("AFIRO", "ADLITTLE", "SC105", "BLEND")]
for lp in lps:
    v = has_strict_interior(lp)
    sums = ", ".join(f"{r.elastic_sum:.1e}" for r in v.results)
    print(f"{lp.name:9s} interior={v.has_interior!s:5s} agreement={v.agreement!s:5s} "
          f"elastic sums [{sums}]")
