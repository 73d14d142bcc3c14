"""Oblivious count-query mechanisms, consumer profiles and the geometric mechanism."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .exactnum import ONE, ZERO, DimensionError, RMatrix, format_rational, to_rational

MASK64 = (1 << 64) - 1
TWO64 = 1 << 64


class MechanismError(ValueError):
    pass


class LossNotMonotoneError(ValueError):
    def __init__(self, row: int, near: int, far: int, near_loss: Fraction, far_loss: Fraction):
        super().__init__(
            f"loss is not monotone in |i-r| for i={row}: "
            f"l({row},{near})={near_loss} > l({row},{far})={far_loss}"
        )
        self.row = row
        self.near = near
        self.far = far


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood), 64-bit state."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> Fraction:
        """Uniform rational in [0, 1) with 64-bit resolution."""
        return Fraction(self.next_u64(), TWO64)


def draw_index(probs: Iterable[Fraction], u: Fraction) -> int:
    """Inverse-CDF draw: smallest index whose cumulative mass exceeds ``u``."""
    cum = ZERO
    last = -1
    for idx, p in enumerate(probs):
        if p:
            last = idx
        cum += p
        if u < cum:
            return idx
    # unreachable for a distribution summing to 1 with u < 1
    return last


@dataclass(frozen=True)
class Mechanism:
    """Row-stochastic (n+1)x(n+1) matrix; ``matrix[i][r]`` is P(output r | true result i)."""

    matrix: RMatrix
    alpha_claimed: Optional[Fraction] = None

    def __post_init__(self):
        m = self.matrix
        if not m.is_square:
            raise DimensionError(f"mechanism matrix must be square, got {m.rows}x{m.cols}")
        if m.rows < 2:
            raise MechanismError("mechanism needs n >= 1 (at least two rows)")
        for i, row in enumerate(m):
            if any(v < 0 for v in row):
                raise MechanismError(f"row {i} has a negative entry")
            s = sum(row, ZERO)
            if s != 1:
                raise MechanismError(f"row {i} sums to {s}, not 1")
        if self.alpha_claimed is not None:
            object.__setattr__(self, "alpha_claimed", to_rational(self.alpha_claimed))

    @classmethod
    def from_rows(cls, rows, alpha_claimed=None) -> "Mechanism":
        return cls(RMatrix(rows), alpha_claimed)

    @property
    def n(self) -> int:
        return self.matrix.rows - 1

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.matrix.row(i)

    def __getitem__(self, key):
        return self.matrix[key]

    def to_json(self) -> dict:
        obj = {"n": self.n}
        if self.alpha_claimed is not None:
            obj["alpha"] = format_rational(self.alpha_claimed)
        obj["matrix"] = self.matrix.to_json()
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "Mechanism":
        matrix = RMatrix.from_json(obj["matrix"])
        if "n" in obj and obj["n"] != matrix.rows - 1:
            raise DimensionError(f"declared n={obj['n']} but matrix has {matrix.rows} rows")
        alpha = obj.get("alpha")
        return cls(matrix, to_rational(alpha) if alpha is not None else None)


def _monotone_violation(loss: RMatrix):
    for i in range(loss.rows):
        row = loss.row(i)
        for r in range(i, loss.cols - 1):
            if row[r] > row[r + 1]:
                return (i, r, r + 1)
        for r in range(min(i, loss.cols - 1), 0, -1):
            if row[r] > row[r - 1]:
                return (i, r, r - 1)
    return None


@dataclass(frozen=True)
class ConsumerProfile:
    """Minimax consumer: loss matrix ``loss[i][r] = l(i, r)`` and side information."""

    loss: RMatrix
    side_info: tuple[int, ...] = field(default=())

    def __post_init__(self):
        loss = self.loss
        if not loss.is_square:
            raise DimensionError(f"loss matrix must be square, got {loss.rows}x{loss.cols}")
        if any(v < 0 for v in loss.entries()):
            raise ValueError("loss entries must be non-negative")
        n = loss.rows - 1
        side = tuple(sorted(set(self.side_info))) if self.side_info else tuple(range(n + 1))
        if any(not 0 <= s <= n for s in side):
            raise ValueError(f"side information must lie in 0..{n}, got {list(side)}")
        object.__setattr__(self, "side_info", side)
        bad = _monotone_violation(loss)
        if bad is not None:
            i, near, far = bad
            raise LossNotMonotoneError(i, near, far, loss[i, near], loss[i, far])

    @property
    def n(self) -> int:
        return self.loss.rows - 1

    def to_json(self) -> dict:
        return {"n": self.n, "loss": self.loss.to_json(), "side_info": list(self.side_info)}

    @classmethod
    def from_json(cls, obj: dict) -> "ConsumerProfile":
        loss = RMatrix.from_json(obj["loss"])
        if "n" in obj and obj["n"] != loss.rows - 1:
            raise DimensionError(f"declared n={obj['n']} but loss has {loss.rows} rows")
        return cls(loss, tuple(obj.get("side_info") or ()))


def abs_loss(n: int) -> RMatrix:
    return RMatrix([[abs(i - r) for r in range(n + 1)] for i in range(n + 1)])


def square_loss(n: int) -> RMatrix:
    return RMatrix([[(i - r) ** 2 for r in range(n + 1)] for i in range(n + 1)])


def zero_one_loss(n: int) -> RMatrix:
    return RMatrix([[int(i != r) for r in range(n + 1)] for i in range(n + 1)])


LOSSES = {"abs": abs_loss, "square": square_loss, "zero_one": zero_one_loss}


def named_loss(name: str, n: int) -> RMatrix:
    try:
        return LOSSES[name](n)
    except KeyError:
        raise ValueError(f"unknown loss {name!r}; expected one of {sorted(LOSSES)}") from None


def _check_open_alpha(alpha: Fraction) -> None:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")


def geometric_full_pmf(alpha, z: int) -> Fraction:
    """P(Z = z) for two-sided geometric noise with ratio alpha."""
    a = to_rational(alpha)
    _check_open_alpha(a)
    return (1 - a) / (1 + a) * a ** abs(z)


def geometric_restricted(n: int, alpha) -> Mechanism:
    """Geometric mechanism with out-of-range mass folded onto outputs 0 and n."""
    a = to_rational(alpha)
    if not 0 <= a <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {a}")
    if n < 1:
        raise ValueError("n must be at least 1")
    edge = ONE / (1 + a)
    inner = (1 - a) / (1 + a)
    rows = []
    for k in range(n + 1):
        rows.append(
            tuple(
                (edge if z in (0, n) else inner) * a ** abs(z - k)
                for z in range(n + 1)
            )
        )
    return Mechanism(RMatrix._wrap(tuple(rows)), a)


@dataclass(frozen=True)
class DPVerdict:
    """Outcome of a differential-privacy check.

    On failure ``row`` and ``col`` locate the first offending adjacent pair
    (rows ``row`` and ``row + 1``); ``upper``/``lower`` are the two masses.
    """

    ok: bool
    alpha: Fraction
    row: Optional[int] = None
    col: Optional[int] = None
    upper: Optional[Fraction] = None
    lower: Optional[Fraction] = None

    def __bool__(self) -> bool:
        return self.ok

    @property
    def ratios(self) -> tuple[Optional[Fraction], Optional[Fraction]]:
        """(upper/lower, lower/upper), ``None`` where the denominator is zero."""
        if self.ok:
            return (None, None)
        up = self.upper / self.lower if self.lower else None
        down = self.lower / self.upper if self.upper else None
        return (up, down)

    def describe(self) -> str:
        if self.ok:
            return f"ok: {self.alpha}-differentially private"
        return (
            f"violation at rows ({self.row},{self.row + 1}) column {self.col}: "
            f"x[{self.row}][{self.col}]={self.upper}, x[{self.row + 1}][{self.col}]={self.lower}, "
            f"alpha={self.alpha}"
        )

    def to_json(self) -> dict:
        obj = {"ok": self.ok, "alpha": format_rational(self.alpha)}
        if not self.ok:
            up, down = self.ratios
            obj["violation"] = {
                "row": self.row,
                "col": self.col,
                "upper": format_rational(self.upper),
                "lower": format_rational(self.lower),
                "ratio_up": None if up is None else format_rational(up),
                "ratio_down": None if down is None else format_rational(down),
            }
        return obj


def check_dp(m: Mechanism, alpha) -> DPVerdict:
    a = to_rational(alpha)
    if not 0 <= a <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {a}")
    x = m.matrix
    for i in range(m.n):
        for r in range(m.n + 1):
            hi, lo = x[i, r], x[i + 1, r]
            if lo < a * hi or hi < a * lo:
                return DPVerdict(False, a, i, r, hi, lo)
    return DPVerdict(True, a)


@dataclass(frozen=True)
class SampleTrace:
    seed: int
    true_result: int
    output: int

    def to_json(self) -> dict:
        return {"seed": self.seed, "true_result": self.true_result, "output": self.output}


def sample(m: Mechanism, true_result: int, seed: int) -> SampleTrace:
    if not 0 <= true_result <= m.n:
        raise ValueError(f"true result {true_result} outside 0..{m.n}")
    u = SplitMix64(seed).uniform()
    return SampleTrace(seed, true_result, draw_index(m.row(true_result), u))


def sample_many(m: Mechanism, true_result: int, seed: int, count: int) -> list[int]:
    """``count`` consecutive draws from a single seeded stream."""
    if not 0 <= true_result <= m.n:
        raise ValueError(f"true result {true_result} outside 0..{m.n}")
    rng = SplitMix64(seed)
    row = m.row(true_result)
    return [draw_index(row, rng.uniform()) for _ in range(count)]


def expected_losses(m: Mechanism, c: ConsumerProfile) -> dict[int, Fraction]:
    """Expected loss for every true result in the side information."""
    if m.matrix.shape != c.loss.shape:
        raise DimensionError(
            f"mechanism is {m.matrix.rows}x{m.matrix.cols} but loss is {c.loss.rows}x{c.loss.cols}"
        )
    return {
        i: sum((l * x for l, x in zip(c.loss.row(i), m.row(i))), ZERO) for i in c.side_info
    }


def max_loss(m: Mechanism, c: ConsumerProfile) -> Fraction:
    return max(expected_losses(m, c).values())
