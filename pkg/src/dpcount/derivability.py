"""Derivability from the geometric mechanism.

A mechanism ``x`` is derivable from ``y`` when ``x = y @ T`` for some
row-stochastic post-processing ``T``.  Against the geometric mechanism this
is decided column by column with a three-term condition; the determinant
route (Cramer's rule) is kept as an independent cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .exactnum import RMatrix, det, format_rational, inverse, mat_mul, replace_column, to_rational
from .mechanism import Mechanism, check_dp, geometric_restricted


class NotPrivateError(ValueError):
    pass


@dataclass(frozen=True)
class PostProcess:
    matrix: RMatrix

    def __post_init__(self):
        if not self.matrix.is_square:
            raise ValueError("post-processing matrix must be square")
        if not self.matrix.is_row_stochastic():
            raise ValueError("post-processing matrix must be row-stochastic")

    @property
    def size(self) -> int:
        return self.matrix.rows

    def apply(self, m: Mechanism) -> Mechanism:
        return Mechanism(mat_mul(m.matrix, self.matrix))

    def to_json(self) -> dict:
        return {"size": self.size, "matrix": self.matrix.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "PostProcess":
        return cls(RMatrix.from_json(obj["matrix"]))


@dataclass(frozen=True)
class Violation:
    column: int
    row: int  # first row of the offending triple (row, row+1, row+2)
    margin: Fraction


@dataclass(frozen=True)
class DerivabilityReport:
    derivable: bool
    alpha: Fraction
    witness: Optional[PostProcess] = None
    violation: Optional[Violation] = None

    def to_json(self) -> dict:
        obj = {"derivable": self.derivable, "alpha": format_rational(self.alpha)}
        if self.witness is not None:
            obj["witness"] = self.witness.to_json()
        if self.violation is not None:
            v = self.violation
            obj["violation"] = {
                "column": v.column,
                "rows": [v.row, v.row + 1, v.row + 2],
                "margin": format_rational(v.margin),
            }
        return obj

    def describe(self) -> str:
        if self.derivable:
            return f"derivable from the {self.alpha}-geometric mechanism"
        v = self.violation
        return (
            f"not derivable: column {v.column}, rows ({v.row},{v.row + 1},{v.row + 2}), "
            f"margin {v.margin}"
        )


def triple_margin(x1, x2, x3, alpha) -> Fraction:
    """(1 + a^2) x2 - a (x1 + x3); non-negative iff the triple is derivable."""
    a = to_rational(alpha)
    return (1 + a * a) * to_rational(x2) - a * (to_rational(x1) + to_rational(x3))


def _require_dp(m: Mechanism, a: Fraction) -> None:
    if not 0 < a < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {a}")
    verdict = check_dp(m, a)
    if not verdict.ok:
        raise NotPrivateError(f"mechanism is not {a}-differentially private: {verdict.describe()}")


def _witness(m: Mechanism, a: Fraction) -> PostProcess:
    g = geometric_restricted(m.n, a).matrix
    t = mat_mul(inverse(g), m.matrix)
    # guards against index-convention slips: the product must reproduce m
    if mat_mul(g, t) != m.matrix:
        raise AssertionError("witness does not reconstruct the mechanism")
    return PostProcess(t)


def check_derivable(m: Mechanism, alpha) -> DerivabilityReport:
    a = to_rational(alpha)
    _require_dp(m, a)
    x = m.matrix
    for j in range(x.cols):
        for i in range(x.rows - 2):
            margin = triple_margin(x[i, j], x[i + 1, j], x[i + 2, j], a)
            if margin < 0:
                return DerivabilityReport(False, a, violation=Violation(j, i, margin))
    return DerivabilityReport(True, a, witness=_witness(m, a))


def cramer_oracle(m: Mechanism, alpha) -> DerivabilityReport:
    """Decide derivability from signs of ``det G(i, m_j) / det G``.

    The verdict shares nothing with :func:`check_derivable` beyond the DP
    precondition.  A negative interior entry ``t[i][j]`` is reported as the
    triple starting at row ``i - 1``; a negative boundary entry (impossible
    for DP inputs) is reported with the entry itself as the margin.
    """
    a = to_rational(alpha)
    _require_dp(m, a)
    g = geometric_restricted(m.n, a).matrix
    dg = det(g)
    size = g.rows
    t = [[None] * size for _ in range(size)]
    first_bad = None
    for j in range(size):
        col = m.matrix.col(j)
        for i in range(size):
            t[i][j] = det(replace_column(g, i, col)) / dg
            if t[i][j] < 0 and first_bad is None:
                if 0 < i < size - 1:
                    margin = triple_margin(col[i - 1], col[i], col[i + 1], a)
                    first_bad = Violation(j, i - 1, margin)
                else:
                    first_bad = Violation(j, i, t[i][j])
    if first_bad is not None:
        return DerivabilityReport(False, a, violation=first_bad)
    return DerivabilityReport(True, a, witness=PostProcess(RMatrix(t)))


def add_privacy(n: int, alpha, beta) -> PostProcess:
    """Post-processing T with ``G(n, alpha) @ T == G(n, beta)``."""
    a, b = to_rational(alpha), to_rational(beta)
    if a > b:
        raise ValueError(
            f"cannot remove privacy by post-processing (alpha={a} > beta={b})"
        )
    if not (0 < a and b < 1):
        raise ValueError(f"need 0 < alpha <= beta < 1, got alpha={a}, beta={b}")
    if a == b:
        return PostProcess(RMatrix.identity(n + 1))
    report = check_derivable(geometric_restricted(n, b), a)
    if not report.derivable:
        raise AssertionError(f"geometric({b}) unexpectedly not derivable from geometric({a})")
    return report.witness
