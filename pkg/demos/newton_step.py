"""
One Newton system, two ways
===========================

The condensed normal equations and the full block system give the same
direction; ``block_residuals`` measures how well each block is satisfied.
"""

import numpy as np

from dualpath import Iterate
from dualpath.kkt import NewtonTargets, assemble_and_solve, block_residuals, solve_unreduced
from dualpath.problems import circles

p = circles().problem
it = Iterate(np.array([0.2, 0.1]), np.array([0.3, 0.3]), np.array([1.0, 1.5]), 0.1)
J = p.jacobian(it.x)
t = NewtonTargets(
    target_dual=-(p.gradient(it.x) + J.T @ it.y),
    target_primal=-(p.constraints(it.x) + it.s) + it.mu,
    target_comp=it.mu - it.s * it.y,
)
info = []
d = assemble_and_solve(p, it, t, info=info)
ref = solve_unreduced(p, it, t, delta_w=info[0].delta_w)
print("regularization", info[0].delta_w)
print("dx condensed", d.dx, " unreduced", ref.dx)
print("block residuals", block_residuals(p.lagrangian_hessian(it.x, it.y), J, it, t, d,
                                          info[0].delta_w))
