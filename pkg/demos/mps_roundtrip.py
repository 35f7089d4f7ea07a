"""
Reading, writing and converting MPS
===================================
"""

from dualpath import to_inequality_form
from dualpath.mps import load_netlib, parse_mps, write_mps

text = """\
NAME          TINY
ROWS
 N  COST
 L  LIM1
 E  MYEQN
COLUMNS
    X1        COST         1.0   LIM1         1.0
    X2        COST         2.0   MYEQN       -1.0
RHS
    RHS       LIM1         4.0   MYEQN        1.0
BOUNDS
 UP BND       X1           4.0
ENDATA
"""
lp = parse_mps(text)
print(lp)
print(write_mps(lp))
assert parse_mps(write_mps(lp)).A.nnz == lp.A.nnz

afiro = load_netlib("AFIRO")
p = to_inequality_form(afiro)
print(afiro, "->", p.n, "variables,", p.m, "inequalities")
