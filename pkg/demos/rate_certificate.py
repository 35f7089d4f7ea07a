"""
Fitting rate constants to a trace
=================================

``certify`` fits the constants that relate complementarity, primal
infeasibility and the dual residual to ``mu`` over the tail of a run.
When all three relations hold, ``theorem1_bound`` turns them into an
explicit bound on ``|y|_1``.
"""

import numpy as np

from dualpath import LinearProgram, SameRate, SolverConfig, solve, to_inequality_form
from dualpath.diagnostics import certify, classify_regime, theorem1_bound

rng = np.random.default_rng(0)
A = rng.standard_normal((3, 6))
lp = LinearProgram(rng.uniform(0.1, 1, 6), A, A @ rng.uniform(0.5, 1.5, 6),
                   np.zeros(6), np.full(6, 3.0), name="random")
p = to_inequality_form(lp)

tr = solve(p, SolverConfig(strategy=SameRate()))
ref = solve(p, SolverConfig(strategy=SameRate(), tol=1e-10))
cert = certify(tr)
print(cert)
print(classify_regime(tr))

bound = theorem1_bound(cert, float(np.abs(ref.final.y).sum()), p.m)
tail = max(r.residuals.dual_l1 for r in tr.records[cert.tail_start:])
print(f"tail |y|_1 = {tail:.3f}  <=  bound {bound:.3f}")
