"""Dense linear-program solver: two-phase primal simplex with Bland's rule.

Small, deterministic and exact at tolerance; built for the box-bounded
programs produced by the offline and online solvers.  Every variable needs a
finite lower bound; upper bounds may be +inf.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
CHECK_TOL = 1e-7  # returned optimal points satisfy constraints at this tolerance

LESS = "<="
GREATER = ">="
EQUAL = "="

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class SolverFailure(RuntimeError):
    """Pivoting failed to terminate or produced an invalid point."""


try:  # optional jitted pivot loop; the numpy path below is semantically identical
    from numba import njit as _njit
except ImportError:  # pragma: no cover - exercised only without numba
    _njit = None


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective @ x subject to a @ x (rel) rhs and lower <= x <= upper."""

    objective: np.ndarray
    a: np.ndarray
    relations: tuple[str, ...]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        a = np.asarray(self.a, dtype=float)
        if a.size == 0:
            a = a.reshape(0, c.shape[0])
        b = np.asarray(self.rhs, dtype=float)
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        for name, arr in (("objective", c), ("rhs", b), ("lower", lo), ("upper", hi)):
            if arr.ndim != 1:
                raise DimensionError(f"{name} must be one-dimensional")
        n = c.shape[0]
        if a.shape != (b.shape[0], n):
            raise DimensionError(f"constraint matrix shape {a.shape} inconsistent")
        if len(self.relations) != b.shape[0]:
            raise DimensionError("one relation per constraint required")
        if any(r not in (LESS, GREATER, EQUAL) for r in self.relations):
            raise DimensionError(f"unknown relation in {self.relations}")
        if lo.shape[0] != n or hi.shape[0] != n:
            raise DimensionError("variable bounds must match objective length")
        if not np.all(np.isfinite(lo)):
            raise DimensionError("every variable needs a finite lower bound")
        if np.any(lo > hi):
            raise DimensionError("lower bound exceeds upper bound")
        for name, arr in (("objective", c), ("a", a), ("rhs", b), ("lower", lo), ("upper", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]


@dataclass(frozen=True)
class LPOutcome:
    status: str
    x: np.ndarray | None
    value: float | None


def _bland_entering(reduced: np.ndarray) -> int:
    cols = np.nonzero(reduced < -PIVOT_TOL)[0]
    return int(cols[0]) if cols.size else -1


def _bland_leaving(tableau: np.ndarray, col: int, basis: list[int]) -> int:
    column = tableau[:-1, col]
    rhs = tableau[:-1, -1]
    rows = np.nonzero(column > PIVOT_TOL)[0]
    if rows.size == 0:
        return -1
    ratios = rhs[rows] / column[rows]
    best = ratios.min()
    tied = rows[ratios <= best + PIVOT_TOL]
    # Bland: among minimum-ratio rows leave the lowest-index basic variable
    return int(min(tied, key=lambda r: basis[r]))


def _pivot(tableau: np.ndarray, row: int, col: int, basis: list[int]) -> None:
    tableau[row] /= tableau[row, col]
    factors = tableau[:, col].copy()
    factors[row] = 0.0
    tableau -= np.outer(factors, tableau[row])
    tableau[:, col] = 0.0
    tableau[row, col] = 1.0
    basis[row] = col


def _simplex_python(tableau: np.ndarray, basis, cap: int) -> int:
    for _ in range(cap):
        col = _bland_entering(tableau[-1, :-1])
        if col < 0:
            return 0
        row = _bland_leaving(tableau, col, basis)
        if row < 0:
            return 1
        _pivot(tableau, row, col, basis)
    return 2


if _njit is not None:

    @_njit(cache=True)
    def _simplex_jit(tableau, basis, cap):  # pragma: no cover - jitted twin
        m = tableau.shape[0] - 1
        last = tableau.shape[1] - 1
        for _ in range(cap):
            col = -1
            for j in range(last):
                if tableau[m, j] < -PIVOT_TOL:
                    col = j
                    break
            if col == -1:
                return 0
            best = np.inf
            for i in range(m):
                a = tableau[i, col]
                if a > PIVOT_TOL:
                    r = tableau[i, last] / a
                    if r < best:
                        best = r
            if best == np.inf:
                return 1
            row = -1
            low = 1 << 60
            for i in range(m):
                a = tableau[i, col]
                if a > PIVOT_TOL and tableau[i, last] / a <= best + PIVOT_TOL:
                    if basis[i] < low:
                        low = basis[i]
                        row = i
            piv = tableau[row, col]
            for j in range(last + 1):
                tableau[row, j] /= piv
            for i in range(m + 1):
                if i != row:
                    f = tableau[i, col]
                    if f != 0.0:
                        for j in range(last + 1):
                            tableau[i, j] -= f * tableau[row, j]
                        tableau[i, col] = 0.0
            tableau[row, col] = 1.0
            basis[row] = col
        return 2

else:
    _simplex_jit = None


def _run_simplex(tableau: np.ndarray, basis, cap: int) -> str:
    """Iterate Bland pivots until optimal or unbounded; tableau[-1] is -reduced costs."""
    if _simplex_jit is not None:
        code = _simplex_jit(tableau, basis, cap)
    else:
        code = _simplex_python(tableau, basis, cap)
    if code == 0:
        return OPTIMAL
    if code == 1:
        return UNBOUNDED
    raise SolverFailure("simplex iteration cap exceeded")


def solve(lp: LinearProgram) -> LPOutcome:
    """Solve the program; Optimal points satisfy all constraints within 1e-7."""
    n = lp.n_vars
    # shift to y = x - lower >= 0
    shift = lp.lower
    rows = [lp.a[i].copy() for i in range(lp.a.shape[0])]
    rels = list(lp.relations)
    rhs = [float(lp.rhs[i] - lp.a[i] @ shift) for i in range(lp.a.shape[0])]
    span = lp.upper - lp.lower
    for j in np.nonzero(np.isfinite(span))[0]:
        row = np.zeros(n)
        row[j] = 1.0
        rows.append(row)
        rels.append(LESS)
        rhs.append(float(span[j]))
    m = len(rows)
    a = np.array(rows).reshape(m, n)
    b = np.array(rhs)
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0
    flipped = {LESS: GREATER, GREATER: LESS, EQUAL: EQUAL}
    rels = [flipped[r] if f else r for r, f in zip(rels, neg)]

    n_slack = sum(r == LESS for r in rels)
    n_surplus = sum(r == GREATER for r in rels)
    n_art = sum(r in (GREATER, EQUAL) for r in rels)
    total = n + n_slack + n_surplus + n_art
    tableau = np.zeros((m + 1, total + 1))
    tableau[:m, :n] = a
    tableau[:m, -1] = b
    basis: list[int] = []
    slack_at, surplus_at, art_at = n, n + n_slack, n + n_slack + n_surplus
    si = ui = ai = 0
    art_cols = []
    for i, r in enumerate(rels):
        if r == LESS:
            tableau[i, slack_at + si] = 1.0
            basis.append(slack_at + si)
            si += 1
        else:
            if r == GREATER:
                tableau[i, surplus_at + ui] = -1.0
                ui += 1
            tableau[i, art_at + ai] = 1.0
            basis.append(art_at + ai)
            art_cols.append(art_at + ai)
            ai += 1

    cap = max(1000, 10 * (n + m) ** 2)
    basis = np.array(basis, dtype=np.int64)

    if art_cols:
        # phase 1: maximize -(sum of artificials)
        tableau[-1, :] = 0.0
        tableau[-1, art_cols] = 1.0
        art_set = set(art_cols)
        for i in range(m):
            if basis[i] in art_set:
                tableau[-1] -= tableau[i]
        status = _run_simplex(tableau, basis, cap)
        if status != OPTIMAL:
            raise SolverFailure("phase 1 reported unbounded")
        feas_tol = 1e-8 * max(1.0, float(np.abs(b).max(initial=0.0)))
        if -tableau[-1, -1] > feas_tol:
            return LPOutcome(INFEASIBLE, None, None)
        # pivot surviving artificials out of the basis, drop redundant rows
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] in art_set:
                pivots = np.nonzero(np.abs(tableau[i, :art_at]) > PIVOT_TOL)[0]
                if pivots.size:
                    _pivot(tableau, i, int(pivots[0]), basis)
                else:
                    keep[i] = False
        if not np.all(keep):
            tableau = np.vstack([tableau[:m][keep], tableau[-1:]])
            basis = basis[keep]
            m = basis.shape[0]
        tableau = np.ascontiguousarray(
            np.hstack([tableau[:, :art_at], tableau[:, -1:]])
        )

    # phase 2
    cost = np.zeros(tableau.shape[1] - 1)
    cost[:n] = lp.objective
    tableau[-1, :-1] = -cost
    tableau[-1, -1] = 0.0
    for i, bj in enumerate(basis):
        if cost[bj] != 0.0:
            tableau[-1] += cost[bj] * tableau[i]
    status = _run_simplex(tableau, basis, cap)
    if status == UNBOUNDED:
        return LPOutcome(UNBOUNDED, None, None)

    y = np.zeros(tableau.shape[1] - 1)
    for i, bj in enumerate(basis):
        y[bj] = tableau[i, -1]
    x = y[:n] + shift
    _validate(lp, x)
    return LPOutcome(OPTIMAL, x, float(lp.objective @ x))


def _validate(lp: LinearProgram, x: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(lp.rhs).max(initial=0.0)))
    tol = CHECK_TOL * scale
    if np.any(x < lp.lower - tol) or np.any(x > lp.upper + tol):
        raise SolverFailure("solution violates variable bounds")
    if lp.a.shape[0]:
        vals = lp.a @ x
        for v, r, b in zip(vals, lp.relations, lp.rhs):
            ok = (
                (r == LESS and v <= b + tol)
                or (r == GREATER and v >= b - tol)
                or (r == EQUAL and abs(v - b) <= tol)
            )
            if not ok:
                raise SolverFailure(f"solution violates constraint {r} {b} (value {v})")
