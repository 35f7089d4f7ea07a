"""
Which multiplier does the path pick?
====================================

``min x  s.t.  -x <= 0,  -2x <= 0`` has the multiplier segment
``y1 + 2 y2 = 1``. The same-rate path converges to an interior point of the
segment (maximal support); a slowly shifted path ends at a vertex.
"""

import numpy as np

from dualpath import SameRate, SlowShift, SolverConfig, solve
from dualpath.diagnostics import multiplier_limit_check
from dualpath.problems import dup_path_limit, duplicated_constraint_lp

ex = duplicated_constraint_lp()
print("closed-form same-rate limit", np.round(dup_path_limit(), 7))

for strategy in (SameRate(), SlowShift(0.5)):
    tr = solve(ex.problem, SolverConfig(strategy=strategy))
    cls = multiplier_limit_check(tr, ex.known_multiplier_set)
    print(f"{strategy.label:15s} y = {np.array2string(tr.final.y, precision=7)}  -> {cls.value}")
