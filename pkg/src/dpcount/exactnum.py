"""Exact rational scalars and small dense matrices.

Scalars are :class:`fractions.Fraction`, which is always kept in lowest
terms with a positive denominator.  :class:`RMatrix` is an immutable
row-major matrix of fractions with the handful of operations the rest of
the package needs.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class SingularMatrixError(ValueError):
    def __init__(self, message: str, det: Fraction = ZERO):
        super().__init__(message)
        self.det = det


def to_rational(value) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are rejected: they would silently smuggle rounding into exact code.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text or any(c in text for c in ".eE_ "):
        raise ValueError(f"not a rational literal: {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational literal: {text!r}") from exc


def format_rational(value: Fraction) -> str:
    return str(value)


class RMatrix:
    """Immutable dense matrix over the rationals."""

    __slots__ = ("_rows", "_cols", "_data")

    def __init__(self, rows: Iterable[Iterable]):
        data = tuple(tuple(to_rational(v) for v in row) for row in rows)
        if not data:
            raise DimensionError("matrix must have at least one row")
        width = len(data[0])
        if width == 0 or any(len(row) != width for row in data):
            raise DimensionError("matrix rows must be non-empty and of equal length")
        object.__setattr__(self, "_rows", len(data))
        object.__setattr__(self, "_cols", width)
        object.__setattr__(self, "_data", data)

    @classmethod
    def _wrap(cls, data: tuple) -> "RMatrix":
        # trusted constructor: data is already a tuple of tuples of Fractions
        obj = cls.__new__(cls)
        object.__setattr__(obj, "_rows", len(data))
        object.__setattr__(obj, "_cols", len(data[0]))
        object.__setattr__(obj, "_data", data)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("RMatrix is immutable")

    @classmethod
    def identity(cls, size: int) -> "RMatrix":
        return cls._wrap(
            tuple(tuple(ONE if i == j else ZERO for j in range(size)) for i in range(size))
        )

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RMatrix":
        return cls._wrap(tuple((ZERO,) * cols for _ in range(rows)))

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self._rows, self._cols)

    @property
    def is_square(self) -> bool:
        return self._rows == self._cols

    def entries(self) -> tuple[Fraction, ...]:
        """Row-major flat view."""
        return tuple(v for row in self._data for v in row)

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return tuple(row[j] for row in self._data)

    def tolist(self) -> list[list[Fraction]]:
        return [list(row) for row in self._data]

    def __getitem__(self, key):
        if isinstance(key, tuple):
            i, j = key
            return self._data[i][j]
        return self._data[key]

    def __iter__(self):
        return iter(self._data)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RMatrix):
            return NotImplemented
        return self._data == other._data

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(str(v) for v in row) for row in self._data)
        return f"RMatrix([{body}])"

    def __matmul__(self, other: "RMatrix") -> "RMatrix":
        return mat_mul(self, other)

    def transpose(self) -> "RMatrix":
        return RMatrix._wrap(tuple(zip(*self._data)))

    def scale(self, factor) -> "RMatrix":
        f = to_rational(factor)
        return RMatrix._wrap(tuple(tuple(v * f for v in row) for row in self._data))

    def row_sums(self) -> tuple[Fraction, ...]:
        return tuple(sum(row, ZERO) for row in self._data)

    def is_row_stochastic(self) -> bool:
        return all(v >= 0 for row in self._data for v in row) and all(
            s == 1 for s in self.row_sums()
        )

    def to_json(self) -> dict:
        return {
            "rows": self._rows,
            "cols": self._cols,
            "entries": [[format_rational(v) for v in row] for row in self._data],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RMatrix":
        try:
            entries = obj["entries"]
        except (KeyError, TypeError) as exc:
            raise ValueError("matrix JSON needs an 'entries' array") from exc
        m = cls(entries)
        if "rows" in obj and obj["rows"] != m.rows:
            raise DimensionError(f"declared rows={obj['rows']} but found {m.rows}")
        if "cols" in obj and obj["cols"] != m.cols:
            raise DimensionError(f"declared cols={obj['cols']} but found {m.cols}")
        return m


def mat_mul(a: RMatrix, b: RMatrix) -> RMatrix:
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    bcols = tuple(zip(*b._data))
    out = []
    for row in a._data:
        nz = [(k, v) for k, v in enumerate(row) if v]
        out.append(tuple(sum((v * col[k] for k, v in nz), ZERO) for col in bcols))
    return RMatrix._wrap(tuple(out))


def _require_square(a: RMatrix, what: str) -> None:
    if not a.is_square:
        raise DimensionError(f"{what} needs a square matrix, got {a.rows}x{a.cols}")


def _bareiss_int(m: list[list[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination (destructive)."""
    size = len(m)
    sign = 1
    prev = 1
    for k in range(size - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        pivot = m[k][k]
        for i in range(k + 1, size):
            mik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, size):
                # exact by Sylvester's identity
                row_i[j] = (row_i[j] * pivot - mik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * m[size - 1][size - 1]


def det(a: RMatrix) -> Fraction:
    """Exact determinant.

    Each row is scaled to integers by the lcm of its denominators, the
    integer determinant is taken with Bareiss elimination, and the scale
    factors are divided back out.
    """
    _require_square(a, "det")
    scale = 1
    ints = []
    for row in a._data:
        denom = lcm(*(v.denominator for v in row))
        scale *= denom
        ints.append([v.numerator * (denom // v.denominator) for v in row])
    return Fraction(_bareiss_int(ints), scale)


def inverse(a: RMatrix) -> RMatrix:
    _require_square(a, "inverse")
    size = a.rows
    aug = [list(row) + [ONE if i == j else ZERO for j in range(size)] for i, row in enumerate(a._data)]
    for col in range(size):
        pivot_row = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if pivot_row is None:
            raise SingularMatrixError("matrix is singular (det = 0)", ZERO)
        aug[col], aug[pivot_row] = aug[pivot_row], aug[col]
        piv = aug[col][col]
        prow = [v / piv for v in aug[col]]
        aug[col] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for r in range(size):
            if r == col:
                continue
            f = aug[r][col]
            if f:
                row_r = aug[r]
                for j in nz:
                    row_r[j] -= f * prow[j]
    return RMatrix._wrap(tuple(tuple(row[size:]) for row in aug))


def replace_column(a: RMatrix, i: int, x: Sequence) -> RMatrix:
    _require_square(a, "replace_column")
    if not 0 <= i < a.cols:
        raise IndexError(f"column index {i} out of range for {a.cols} columns")
    if len(x) != a.rows:
        raise DimensionError(f"replacement column has length {len(x)}, expected {a.rows}")
    xs = [to_rational(v) for v in x]
    return RMatrix._wrap(
        tuple(row[:i] + (xs[r],) + row[i + 1 :] for r, row in enumerate(a._data))
    )


def power_matrix(size: int, alpha) -> RMatrix:
    """Symmetric matrix with entries ``alpha ** |i - j|``."""
    a = to_rational(alpha)
    return RMatrix._wrap(
        tuple(tuple(a ** abs(i - j) for j in range(size)) for i in range(size))
    )
