"""Two-phase primal simplex over exact rationals with Bland's pivoting rule.

Tableau rows are sparse dicts ``{column: Fraction}``; the DP programs this
package builds are mostly zeros and stay that way through most pivots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .exactnum import ZERO, to_rational

LE, EQ, GE = "<=", "=", ">="
RELATIONS = (LE, EQ, GE)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    coeffs: tuple[Fraction, ...]
    relation: str
    rhs: Fraction


@dataclass
class LinearProgram:
    """minimize ``objective . v`` subject to the constraints.

    Variables are non-negative unless ``nonneg_mask`` says otherwise.
    """

    num_vars: int
    objective: list[Fraction] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    nonneg_mask: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.objective:
            self.objective = [ZERO] * self.num_vars
        else:
            self.objective = [to_rational(c) for c in self.objective]
        if not self.nonneg_mask:
            self.nonneg_mask = [True] * self.num_vars
        if len(self.objective) != self.num_vars or len(self.nonneg_mask) != self.num_vars:
            raise ValueError("objective and nonneg_mask must have num_vars entries")
        for c in self.constraints:
            self._check(c)

    def _check(self, c: Constraint) -> None:
        if len(c.coeffs) != self.num_vars:
            raise ValueError(f"constraint has {len(c.coeffs)} coefficients, expected {self.num_vars}")
        if c.relation not in RELATIONS:
            raise ValueError(f"unknown relation {c.relation!r}")

    def add(self, coeffs: Sequence, relation: str, rhs) -> None:
        c = Constraint(tuple(to_rational(v) for v in coeffs), relation, to_rational(rhs))
        self._check(c)
        self.constraints.append(c)

    def add_sparse(self, terms: dict[int, Fraction], relation: str, rhs) -> None:
        coeffs = [ZERO] * self.num_vars
        for j, v in terms.items():
            coeffs[j] += to_rational(v)
        self.add(coeffs, relation, rhs)

    def is_satisfied_by(self, values: Sequence[Fraction]) -> bool:
        if any(ok and v < 0 for ok, v in zip(self.nonneg_mask, values)):
            return False
        for c in self.constraints:
            lhs = sum((a * v for a, v in zip(c.coeffs, values) if a), ZERO)
            if c.relation == LE and not lhs <= c.rhs:
                return False
            if c.relation == GE and not lhs >= c.rhs:
                return False
            if c.relation == EQ and lhs != c.rhs:
                return False
        return True


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Optional[Fraction] = None
    assignment: Optional[tuple[Fraction, ...]] = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Dictionary-form tableau: ``basis[k]`` is basic in row ``k``.

    Row ``k`` reads ``x_basis[k] + sum(row[j] x_j) = rhs[k]`` over nonbasic j,
    stored with the basic column itself present (coefficient 1).
    """

    def __init__(self, rows, rhs, basis, ncols):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.ncols = ncols
        self.pivots = 0

    def reduced_costs(self, cost: dict[int, Fraction]) -> tuple[dict[int, Fraction], Fraction]:
        z = dict(cost)
        value = ZERO
        for row, b, var in zip(self.rows, self.rhs, self.basis):
            cb = cost.get(var)
            if not cb:
                continue
            value += cb * b
            for j, v in row.items():
                nv = z.get(j, ZERO) - cb * v
                if nv:
                    z[j] = nv
                else:
                    z.pop(j, None)
        return z, value

    def pivot(self, r: int, col: int, z: dict[int, Fraction]) -> Fraction:
        """Pivot on (r, col); updates ``z`` in place, returns the objective change."""
        prow = self.rows[r]
        piv = prow[col]
        if piv != 1:
            inv = 1 / piv
            prow = {j: v * inv for j, v in prow.items()}
            self.rows[r] = prow
            self.rhs[r] = self.rhs[r] * inv
        pb = self.rhs[r]
        items = list(prow.items())
        for k, row in enumerate(self.rows):
            if k == r:
                continue
            f = row.get(col)
            if not f:
                continue
            for j, v in items:
                nv = row.get(j, ZERO) - f * v
                if nv:
                    row[j] = nv
                else:
                    del row[j]
            if pb:
                self.rhs[k] -= f * pb
        f = z.get(col)
        delta = ZERO
        if f:
            for j, v in items:
                nv = z.get(j, ZERO) - f * v
                if nv:
                    z[j] = nv
                else:
                    z.pop(j, None)
            delta = f * pb
        self.basis[r] = col
        self.pivots += 1
        return delta

    def run(self, z: dict[int, Fraction], allowed: int) -> str:
        """Bland's rule: lowest-index improving column, lowest-index leaving variable."""
        while True:
            col = min((j for j, v in z.items() if v < 0 and j < allowed), default=None)
            if col is None:
                return OPTIMAL
            best = None
            for k, row in enumerate(self.rows):
                a = row.get(col)
                if a is not None and a > 0:
                    key = (self.rhs[k] / a, self.basis[k])
                    if best is None or key < best[0]:
                        best = (key, k)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], col, z)


def solve_lp(lp: LinearProgram) -> LPResult:
    # column layout: structural (free vars split into +/-), slacks, artificials
    col_of: list[tuple[int, Optional[int]]] = []
    ncols = 0
    for ok in lp.nonneg_mask:
        if ok:
            col_of.append((ncols, None))
            ncols += 1
        else:
            col_of.append((ncols, ncols + 1))
            ncols += 2
    num_struct = ncols

    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    kinds: list[str] = []
    for c in lp.constraints:
        terms: dict[int, Fraction] = {}
        for var, a in enumerate(c.coeffs):
            if a:
                pos, neg = col_of[var]
                terms[pos] = a
                if neg is not None:
                    terms[neg] = -a
        rel, b = c.relation, c.rhs
        if b < 0 or (b == 0 and rel == GE):
            terms = {j: -v for j, v in terms.items()}
            b = -b
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        rows.append(terms)
        rhs.append(b)
        kinds.append(rel)

    basis: list[int] = [-1] * len(rows)
    for k, rel in enumerate(kinds):
        if rel in (LE, GE):
            rows[k][ncols] = Fraction(1 if rel == LE else -1)
            if rel == LE:
                basis[k] = ncols
            ncols += 1
    num_real = ncols
    for k in range(len(rows)):
        if basis[k] < 0:
            rows[k][ncols] = Fraction(1)
            basis[k] = ncols
            ncols += 1

    tab = _Tableau(rows, rhs, basis, ncols)

    if ncols > num_real:
        phase1 = {j: Fraction(1) for j in range(num_real, ncols)}
        z, value = tab.reduced_costs(phase1)
        tab.run(z, ncols)
        _, value = tab.reduced_costs(phase1)
        if value != 0:
            return LPResult(INFEASIBLE, pivots=tab.pivots)
        _evict_artificials(tab, num_real)

    cost: dict[int, Fraction] = {}
    for var, c in enumerate(lp.objective):
        if c:
            pos, neg = col_of[var]
            cost[pos] = c
            if neg is not None:
                cost[neg] = -c
    z, _ = tab.reduced_costs(cost)
    status = tab.run(z, num_real)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, pivots=tab.pivots)

    col_values = [ZERO] * ncols
    for b, var in zip(tab.rhs, tab.basis):
        col_values[var] = b
    values = []
    for pos, neg in col_of:
        v = col_values[pos]
        if neg is not None:
            v -= col_values[neg]
        values.append(v)
    value = sum((c * v for c, v in zip(lp.objective, values) if c), ZERO)
    return LPResult(OPTIMAL, value, tuple(values), tab.pivots)


def _evict_artificials(tab: _Tableau, num_real: int) -> None:
    """Pivot zero-valued artificials out of the basis; drop redundant rows."""
    k = 0
    while k < len(tab.rows):
        if tab.basis[k] < num_real:
            k += 1
            continue
        row = tab.rows[k]
        col = min((j for j, v in row.items() if j < num_real and v), default=None)
        if col is None:
            # row is a linear combination of the others
            del tab.rows[k]
            del tab.rhs[k]
            del tab.basis[k]
            continue
        tab.pivot(k, col, {})
        k += 1
    for row in tab.rows:
        for j in [j for j in row if j >= num_real]:
            del row[j]
