"""Linear programs: a small container, a dense two-phase simplex, and a
HiGHS backend for the larger transport programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog as _scipy_linprog

LE, EQ, GE = "<=", "==", ">="
_RELATIONS = (LE, EQ, GE)


@dataclass(frozen=True)
class Tolerances:
    feasibility: float = 1e-9
    optimality: float = 1e-9
    pivot: float = 1e-11


TOLERANCES = Tolerances()

# dense simplex is used by method="auto" while the tableau stays below this
AUTO_DENSE_CELLS = 200_000


class LinearProgram:
    """``min`` or ``max`` of ``c @ x`` under row constraints and bounds.

    Rows are accumulated in coordinate form; ``relations[k]`` is one of
    ``"<="``, ``"=="``, ``">="``.  Variables default to ``[0, inf)``.
    """

    def __init__(self, n_vars: int, sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        self.n_vars = int(n_vars)
        self.sense = sense
        self.c = np.zeros(self.n_vars)
        self.lower = np.zeros(self.n_vars)
        self.upper = np.full(self.n_vars, np.inf)
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._data: list[np.ndarray] = []
        self.relations: list[str] = []
        self._rhs: list[float] = []

    @property
    def n_rows(self) -> int:
        return len(self._rhs)

    @property
    def rhs(self) -> np.ndarray:
        return np.asarray(self._rhs, dtype=float)

    def set_bounds(self, idx, lower, upper):
        self.lower[idx] = lower
        self.upper[idx] = upper

    def add_constraint(self, coeffs: dict, relation: str, rhs: float):
        cols = np.fromiter(coeffs.keys(), dtype=np.int64, count=len(coeffs))
        data = np.fromiter(coeffs.values(), dtype=float, count=len(coeffs))
        self.add_rows(np.zeros(len(cols), dtype=np.int64), cols, data, relation, [rhs])

    def add_rows(self, rows, cols, data, relation: str, rhs: Sequence[float]):
        """Append ``len(rhs)`` rows given as local-row/column/value triplets."""
        if relation not in _RELATIONS:
            raise ValueError(f"unknown relation {relation!r}")
        rhs = np.asarray(rhs, dtype=float).reshape(-1)
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if len(cols) and (cols.min() < 0 or cols.max() >= self.n_vars):
            raise IndexError("constraint references a variable outside the program")
        if len(rows) and (rows.min() < 0 or rows.max() >= len(rhs)):
            raise IndexError("row index outside the block")
        if not np.all(np.isfinite(rhs)):
            raise ValueError("constraint right-hand sides must be finite")
        self._rows.append(rows + self.n_rows)
        self._cols.append(cols)
        self._data.append(np.asarray(data, dtype=float))
        self.relations.extend([relation] * len(rhs))
        self._rhs.extend(rhs.tolist())

    def matrix(self) -> sp.csr_matrix:
        if not self._rows:
            return sp.csr_matrix((0, self.n_vars))
        return sp.coo_matrix(
            (np.concatenate(self._data), (np.concatenate(self._rows), np.concatenate(self._cols))),
            shape=(self.n_rows, self.n_vars),
        ).tocsr()

    def __repr__(self):
        return f"LinearProgram({self.sense}, vars={self.n_vars}, rows={self.n_rows})"


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded" | "failed"
    x: np.ndarray | None = None
    objective: float = float("nan")
    dual: np.ndarray | None = field(default=None, repr=False)
    method: str = ""
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def lp_solve(lp: LinearProgram, method: str = "auto", tol: Tolerances = TOLERANCES) -> LpSolution:
    """Solve ``lp``.  ``method`` is ``"simplex"``, ``"highs"`` or ``"auto"``.

    The dual certificate holds the sensitivity of the optimal value to each
    row's right-hand side.
    """
    if method == "auto":
        cells = (lp.n_rows + lp.n_vars) * (lp.n_rows + 2 * lp.n_vars)
        method = "simplex" if cells <= AUTO_DENSE_CELLS else "highs"
    if method == "simplex":
        return _solve_dense(lp, tol)
    if method == "highs":
        return _solve_highs(lp, tol)
    raise ValueError(f"unknown method {method!r}")


def _solve_highs(lp: LinearProgram, tol: Tolerances) -> LpSolution:
    A = lp.matrix()
    rel = np.asarray(lp.relations)
    b = lp.rhs
    sign = 1.0 if lp.sense == "min" else -1.0
    ub_rows = np.flatnonzero(rel != EQ)
    eq_rows = np.flatnonzero(rel == EQ)
    flip = np.where(rel[ub_rows] == GE, -1.0, 1.0)
    A_ub = sp.diags(flip) @ A[ub_rows] if len(ub_rows) else None
    b_ub = flip * b[ub_rows] if len(ub_rows) else None
    A_eq = A[eq_rows] if len(eq_rows) else None
    b_eq = b[eq_rows] if len(eq_rows) else None
    bounds = np.column_stack([
        np.where(np.isfinite(lp.lower), lp.lower, -np.inf),
        np.where(np.isfinite(lp.upper), lp.upper, np.inf),
    ])
    res = _scipy_linprog(
        sign * lp.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": tol.feasibility,
            "dual_feasibility_tolerance": tol.optimality,
        },
    )
    if res.status == 2:
        return LpSolution("infeasible", method="highs", message=res.message)
    if res.status == 3:
        return LpSolution("unbounded", method="highs", message=res.message)
    if res.status != 0:
        return LpSolution("failed", method="highs", message=res.message)
    dual = np.zeros(lp.n_rows)
    if len(ub_rows):
        dual[ub_rows] = sign * flip * res.ineqlin.marginals
    if len(eq_rows):
        dual[eq_rows] = sign * res.eqlin.marginals
    x = np.asarray(res.x, dtype=float)
    return LpSolution("optimal", x, float(lp.c @ x), dual, "highs", res.message)


def _standardize(lp: LinearProgram):
    """Rewrite as ``A z (rel) b`` with ``z >= 0`` and ``x = offset + T z``."""
    n = lp.n_vars
    offset = np.zeros(n)
    T_cols = []
    bound_rows = []  # (column in z, upper limit)
    for j in range(n):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo > hi:
            return None
        if np.isfinite(lo) and lo == hi:
            offset[j] = lo
        elif np.isfinite(lo):
            offset[j] = lo
            T_cols.append((j, 1.0))
            if np.isfinite(hi):
                bound_rows.append((len(T_cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            T_cols.append((j, -1.0))
        else:
            T_cols.append((j, 1.0))
            T_cols.append((j, -1.0))
    k = len(T_cols)
    T = np.zeros((n, k))
    for col, (j, s) in enumerate(T_cols):
        T[j, col] = s
    A = lp.matrix().toarray()
    Az = A @ T
    bz = lp.rhs - A @ offset
    rel = list(lp.relations)
    if bound_rows:
        extra = np.zeros((len(bound_rows), k))
        for r, (col, lim) in enumerate(bound_rows):
            extra[r, col] = 1.0
        Az = np.vstack([Az, extra])
        bz = np.concatenate([bz, [lim for _, lim in bound_rows]])
        rel += [LE] * len(bound_rows)
    sign = 1.0 if lp.sense == "min" else -1.0
    return Az, bz, rel, sign * (lp.c @ T), offset, T


class _Tableau:
    def __init__(self, T: np.ndarray, basis: np.ndarray, tol: Tolerances):
        self.T = T
        self.basis = basis
        self.tol = tol
        self.pivots = 0

    def pivot(self, r: int, j: int):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j
        self.pivots += 1

    def run(self, cost: np.ndarray, allowed: np.ndarray, max_pivots: int) -> str:
        """Minimize ``cost`` over the current basis; Dantzig pricing falling
        back to Bland's rule after a pivot budget."""
        T = self.T
        rows, width = T.shape
        bland_after = 5 * (rows + width)
        start = self.pivots
        while True:
            reduced = cost - cost[self.basis] @ T[:, :-1]
            reduced[~allowed] = 0.0
            candidates = np.flatnonzero(reduced < -self.tol.optimality)
            if not len(candidates):
                return "optimal"
            if self.pivots - start > max_pivots:
                return "failed"
            if self.pivots - start > bland_after:
                j = int(candidates[0])
            else:
                j = int(candidates[np.argmin(reduced[candidates])])
            col = T[:, j]
            ok = np.flatnonzero(col > self.tol.pivot)
            if not len(ok):
                return "unbounded"
            ratios = T[ok, -1] / col[ok]
            best = ratios.min()
            ties = ok[ratios <= best + 1e-12 * max(1.0, abs(best))]
            r = int(ties[np.argmin(self.basis[ties])])
            self.pivot(r, j)


def _solve_dense(lp: LinearProgram, tol: Tolerances) -> LpSolution:
    std = _standardize(lp)
    if std is None:
        return LpSolution("infeasible", method="simplex", message="empty variable bounds")
    A, b, rel, cost_z, offset, Tmap = std
    m, k = A.shape
    negate = b < 0
    A = np.where(negate[:, None], -A, A)
    b = np.abs(b)
    rel = [({LE: GE, GE: LE}.get(r, r) if neg else r) for r, neg in zip(rel, negate)]

    n_slack = sum(r != EQ for r in rel)
    n_art = sum(r != LE for r in rel)
    width = k + n_slack + n_art
    T = np.zeros((m, width + 1))
    T[:, :k] = A
    T[:, -1] = b
    basis = np.zeros(m, dtype=np.int64)
    init_col = np.zeros(m, dtype=np.int64)
    s = k
    a = k + n_slack
    for i, r in enumerate(rel):
        if r == LE:
            T[i, s] = 1.0
            basis[i] = init_col[i] = s
            s += 1
        elif r == GE:
            T[i, s] = -1.0
            s += 1
            T[i, a] = 1.0
            basis[i] = init_col[i] = a
            a += 1
        else:
            T[i, a] = 1.0
            basis[i] = init_col[i] = a
            a += 1
    art = np.zeros(width, dtype=bool)
    art[k + n_slack:] = True

    tab = _Tableau(T, basis, tol)
    max_pivots = 50 * (m + width) + 1000
    if n_art:
        status = tab.run(art.astype(float), np.ones(width, dtype=bool), max_pivots)
        if status != "optimal":
            return LpSolution("failed", method="simplex", message=f"phase 1 ended with {status}")
        infeas = float(np.sum(tab.T[art[tab.basis], -1]))
        if infeas > tol.feasibility * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LpSolution("infeasible", method="simplex", message=f"phase 1 residual {infeas:.3e}")
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if art[tab.basis[i]]:
                row = np.abs(tab.T[i, :width]) * ~art
                j = int(np.argmax(row))
                if row[j] > tol.pivot:
                    tab.pivot(i, j)
                else:
                    keep[i] = False
        if not keep.all():
            tab.T = tab.T[keep]
            tab.basis = tab.basis[keep]
            init_col = init_col[keep]
    kept_rows = np.flatnonzero(keep) if n_art else np.arange(m)

    cost = np.zeros(width)
    cost[:k] = cost_z
    status = tab.run(cost, ~art, max_pivots)
    if status != "optimal":
        return LpSolution(status, method="simplex", message=f"phase 2 ended with {status}")
    z = np.zeros(width)
    z[tab.basis] = tab.T[:, -1]
    x = offset + Tmap @ z[:k]

    y_std = cost[tab.basis] @ tab.T[:, init_col]
    y = np.zeros(m)
    y[kept_rows] = y_std
    y = np.where(negate, -y, y)[: lp.n_rows]
    if lp.sense == "max":
        y = -y
    return LpSolution("optimal", x, float(lp.c @ x), y, "simplex", f"{tab.pivots} pivots")
