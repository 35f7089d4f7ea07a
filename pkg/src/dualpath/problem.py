"""Problem representations and residual evaluation.

Everything the solver touches is an :class:`InequalityProblem`::

    minimize   f(x)
    subject to a(x) + s = 0,  s >= 0

Linear programs arrive in standard form (``min c'x, Ax = b, l <= x <= u``)
and are converted with :func:`to_inequality_form`; smooth nonlinear programs
are described by callbacks in :class:`NonlinearProgram`.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

__all__ = [
    "LinearProgram",
    "NonlinearProgram",
    "InequalityProblem",
    "AffineProblem",
    "CallbackProblem",
    "ShiftedProblem",
    "Iterate",
    "ResidualReport",
    "to_inequality_form",
    "residuals",
    "lagrangian_gradient",
]


def _as_vector(v, n: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise ValueError(f"{name} must have length {n}, got {v.shape[0]}")
    return v


class LinearProgram:
    """Standard-form LP ``min c'x + offset  s.t.  Ax = b,  lower <= x <= upper``.

    ``A`` may be given as a scipy sparse matrix, a dense array, or a
    ``(rows, cols, values)`` coordinate triple together with ``shape``.
    Duplicate coordinates are summed on assembly.
    """

    def __init__(
        self,
        c,
        A,
        b,
        lower=None,
        upper=None,
        name: str = "lp",
        offset: float = 0.0,
        shape: Optional[tuple[int, int]] = None,
        col_names: Optional[list[str]] = None,
        row_names: Optional[list[str]] = None,
    ):
        c = np.asarray(c, dtype=float).reshape(-1)
        n = c.shape[0]
        b = np.asarray(b, dtype=float).reshape(-1)
        if isinstance(A, tuple) and len(A) == 3:
            rows, cols, vals = (np.asarray(t) for t in A)
            if shape is None:
                shape = (b.shape[0], n)
            A = sp.coo_matrix(
                (vals.astype(float), (rows.astype(int), cols.astype(int))), shape=shape
            )
        A = sp.csr_matrix(A, dtype=float)
        A.sum_duplicates()
        A.eliminate_zeros()
        if A.shape != (b.shape[0], n):
            raise ValueError(
                f"constraint matrix shape {A.shape} inconsistent with "
                f"|b|={b.shape[0]}, |c|={n}"
            )
        lower = np.zeros(n) if lower is None else _as_vector(lower, n, "lower")
        upper = np.full(n, np.inf) if upper is None else _as_vector(upper, n, "upper")
        if np.any(lower > upper):
            bad = int(np.flatnonzero(lower > upper)[0])
            raise ValueError(f"lower > upper for variable {bad}")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("lower bounds must be < +inf and upper bounds > -inf")

        self.c = c
        self.A = A
        self.b = b
        self.lower = lower
        self.upper = upper
        self.name = name
        self.offset = float(offset)
        self.col_names = col_names
        self.row_names = row_names

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m_eq(self) -> int:
        return self.b.shape[0]

    @property
    def nnz(self) -> int:
        return self.A.nnz

    def objective(self, x) -> float:
        return float(self.c @ x) + self.offset

    def is_feasible(self, x, tol: float = 1e-9) -> bool:
        """Check ``Ax = b`` and the bounds up to ``tol`` (absolute, infinity norm)."""
        x = np.asarray(x, dtype=float)
        if self.m_eq and np.max(np.abs(self.A @ x - self.b)) > tol:
            return False
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def __repr__(self) -> str:
        return f"LinearProgram(name={self.name!r}, n={self.n}, m_eq={self.m_eq}, nnz={self.nnz})"


@dataclasses.dataclass(frozen=True)
class NonlinearProgram:
    """Smooth program given by callbacks.

    ``minimize f(x)`` subject to ``c_i(x) <= 0`` for ``i`` with
    ``kinds[i] == "le"``, ``c_i(x) = 0`` for ``kinds[i] == "eq"`` and
    ``lower <= x <= upper``.

    ``constraint_hessian(x, w)`` returns ``sum_i w_i * Hess c_i(x)``.
    """

    n: int
    objective: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    constraints: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], np.ndarray]
    constraint_hessian: Callable[[np.ndarray, np.ndarray], np.ndarray]
    kinds: tuple[str, ...]
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    name: str = "nlp"


class InequalityProblem:
    """Base class for ``min f(x) s.t. a(x) + s = 0, s >= 0``.

    Subclasses provide the evaluators. ``jacobian`` may return a dense
    array or a scipy sparse matrix; ``lagrangian_hessian`` returns ``None``
    when the Hessian is identically zero.
    """

    n: int
    m: int
    name: str = "problem"
    provenance: str = "native-nlp"
    is_linear: bool = False

    def objective(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def constraints(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x: np.ndarray):
        raise NotImplementedError

    def lagrangian_hessian(self, x: np.ndarray, y: np.ndarray) -> Optional[np.ndarray]:
        raise NotImplementedError

    def dense_jacobian(self, x: np.ndarray) -> np.ndarray:
        J = self.jacobian(x)
        return J.toarray() if sp.issparse(J) else np.asarray(J, dtype=float)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, n={self.n}, m={self.m})"


class AffineProblem(InequalityProblem):
    """``f(x) = c'x + offset`` and ``a(x) = J x - h`` with constant ``J``."""

    is_linear = True

    def __init__(self, c, J, h, offset: float = 0.0, name: str = "affine",
                 provenance: str = "converted-lp", row_labels=None):
        self.c = np.asarray(c, dtype=float).reshape(-1)
        self.J = sp.csr_matrix(J, dtype=float) if sp.issparse(J) else np.atleast_2d(
            np.asarray(J, dtype=float))
        self.h = np.asarray(h, dtype=float).reshape(-1)
        self.n = self.c.shape[0]
        self.m = self.h.shape[0]
        if self.J.shape != (self.m, self.n):
            raise ValueError(f"J has shape {self.J.shape}, expected {(self.m, self.n)}")
        self.offset = float(offset)
        self.name = name
        self.provenance = provenance
        self.row_labels = row_labels

    def objective(self, x):
        return float(self.c @ x) + self.offset

    def gradient(self, x):
        return self.c.copy()

    def constraints(self, x):
        return np.asarray(self.J @ x).reshape(-1) - self.h

    def jacobian(self, x):
        return self.J

    def lagrangian_hessian(self, x, y):
        return None


class CallbackProblem(InequalityProblem):
    """Inequality form of a :class:`NonlinearProgram`.

    Row order: ``le`` constraints, then ``eq`` constraints, then the negated
    ``eq`` constraints, then finite lower bounds ``l - x``, then finite upper
    bounds ``x - u``.
    """

    provenance = "native-nlp"
    is_linear = False

    def __init__(self, nlp: NonlinearProgram):
        self.nlp = nlp
        self.n = nlp.n
        self.name = nlp.name
        kinds = np.asarray(nlp.kinds)
        if not np.all(np.isin(kinds, ("le", "eq"))):
            raise ValueError("constraint kinds must be 'le' or 'eq'")
        self._le = np.flatnonzero(kinds == "le")
        self._eq = np.flatnonzero(kinds == "eq")
        lower = np.full(self.n, -np.inf) if nlp.lower is None else np.asarray(nlp.lower, float)
        upper = np.full(self.n, np.inf) if nlp.upper is None else np.asarray(nlp.upper, float)
        self._lo_idx = np.flatnonzero(np.isfinite(lower))
        self._up_idx = np.flatnonzero(np.isfinite(upper))
        self._lo = lower[self._lo_idx]
        self._up = upper[self._up_idx]
        self._n_le, self._n_eq = len(self._le), len(self._eq)
        self.m = self._n_le + 2 * self._n_eq + len(self._lo_idx) + len(self._up_idx)

    def objective(self, x):
        return float(self.nlp.objective(x))

    def gradient(self, x):
        return np.asarray(self.nlp.gradient(x), dtype=float)

    def constraints(self, x):
        cx = np.asarray(self.nlp.constraints(x), dtype=float)
        ce = cx[self._eq]
        return np.concatenate(
            [cx[self._le], ce, -ce, self._lo - x[self._lo_idx], x[self._up_idx] - self._up]
        )

    def jacobian(self, x):
        Jc = np.atleast_2d(np.asarray(self.nlp.jacobian(x), dtype=float))
        Je = Jc[self._eq]
        eye = np.eye(self.n)
        return np.vstack([Jc[self._le], Je, -Je, -eye[self._lo_idx], eye[self._up_idx]])

    def constraint_weights(self, y):
        """Fold the multipliers of the split rows back onto the original constraints."""
        w = np.zeros(len(self.nlp.kinds))
        k = self._n_le
        w[self._le] = y[:k]
        w[self._eq] = y[k:k + self._n_eq] - y[k + self._n_eq:k + 2 * self._n_eq]
        return w

    def lagrangian_hessian(self, x, y):
        H = np.asarray(self.nlp.hessian(x), dtype=float)
        return H + np.asarray(self.nlp.constraint_hessian(x, self.constraint_weights(y)), float)


class ShiftedProblem(InequalityProblem):
    """``a(x) - delta``: the relaxed constraints ``a(x) <= delta e``."""

    def __init__(self, base: InequalityProblem, delta: float):
        self.base = base
        self.delta = float(delta)
        self.n, self.m = base.n, base.m
        self.name = base.name
        self.provenance = base.provenance
        self.is_linear = base.is_linear

    def objective(self, x):
        return self.base.objective(x)

    def gradient(self, x):
        return self.base.gradient(x)

    def constraints(self, x):
        return self.base.constraints(x) - self.delta

    def jacobian(self, x):
        return self.base.jacobian(x)

    def lagrangian_hessian(self, x, y):
        return self.base.lagrangian_hessian(x, y)


def to_inequality_form(lp: LinearProgram) -> AffineProblem:
    """Rewrite a standard-form LP as ``a(x) <= 0``.

    Rows are emitted in the fixed order ``[Ax - b; b - Ax; l - x; x - u]``.
    Only finite bounds produce rows; a fixed variable produces both.
    """
    n = lp.n
    eye = sp.identity(n, format="csr")
    lo_idx = np.flatnonzero(np.isfinite(lp.lower))
    up_idx = np.flatnonzero(np.isfinite(lp.upper))
    J = sp.vstack([lp.A, -lp.A, -eye[lo_idx], eye[up_idx]], format="csr")
    h = np.concatenate([lp.b, -lp.b, -lp.lower[lo_idx], lp.upper[up_idx]])
    labels = (
        [("eq+", i) for i in range(lp.m_eq)]
        + [("eq-", i) for i in range(lp.m_eq)]
        + [("lo", int(j)) for j in lo_idx]
        + [("up", int(j)) for j in up_idx]
    )
    return AffineProblem(lp.c, J, h, offset=lp.offset, name=lp.name,
                         provenance="converted-lp", row_labels=labels)


@dataclasses.dataclass
class Iterate:
    """Primal-dual interior point state ``(x, y, s, mu)``."""

    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    mu: float

    def copy(self) -> "Iterate":
        return Iterate(self.x.copy(), self.y.copy(), self.s.copy(), float(self.mu))

    @property
    def is_interior(self) -> bool:
        return bool(self.mu > 0 and np.all(self.s > 0) and np.all(self.y > 0))


@dataclasses.dataclass(frozen=True)
class ResidualReport:
    primal_inf: float
    dual_inf: float
    comp_max: float
    comp_min: float
    dual_l1: float
    strict_comp: float
    feas_over_mu: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def _check_dims(p: InequalityProblem, x, y=None, s=None):
    if np.shape(x) != (p.n,):
        raise ValueError(f"x has shape {np.shape(x)}, expected ({p.n},)")
    for v, nm in ((y, "y"), (s, "s")):
        if v is not None and np.shape(v) != (p.m,):
            raise ValueError(f"{nm} has shape {np.shape(v)}, expected ({p.m},)")


def lagrangian_gradient(p: InequalityProblem, x, y) -> np.ndarray:
    """Return ``grad f(x) + J(x)' y``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dims(p, x, y)
    J = p.jacobian(x)
    return p.gradient(x) + np.asarray(J.T @ y).reshape(-1)


def residuals(p: InequalityProblem, it: Iterate) -> ResidualReport:
    """Residual summary of ``it``; ``feas_over_mu`` is ``primal_inf / mu``."""
    _check_dims(p, it.x, it.y, it.s)
    r = p.constraints(it.x) + it.s
    comp = it.s * it.y
    primal = float(np.max(np.abs(r))) if p.m else 0.0
    dual = float(np.max(np.abs(lagrangian_gradient(p, it.x, it.y)))) if p.n else 0.0
    return ResidualReport(
        primal_inf=primal,
        dual_inf=dual,
        comp_max=float(comp.max()) if p.m else 0.0,
        comp_min=float(comp.min()) if p.m else 0.0,
        dual_l1=float(np.abs(it.y).sum()),
        strict_comp=float((it.s + it.y).min()) if p.m else 0.0,
        feas_over_mu=primal / it.mu,
    )
