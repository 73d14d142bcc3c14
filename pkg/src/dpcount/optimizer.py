"""Minimax-optimal mechanisms and consumer interactions as exact LPs."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .derivability import PostProcess
from .exactnum import ZERO, DimensionError, RMatrix, format_rational, mat_mul, to_rational
from .mechanism import ConsumerProfile, Mechanism, max_loss
from .simplex import EQ, GE, LinearProgram, LPResult, solve_lp

__all__ = [
    "OptimalMechanismResult",
    "OptimalInteractionResult",
    "RowPattern",
    "mechanism_lp",
    "interaction_lp",
    "optimal_mechanism",
    "optimal_interaction",
    "row_pattern_diagnostic",
    "random_monotone_loss",
    "random_profile",
]


class LPFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimalMechanismResult:
    mechanism: Mechanism
    loss: Fraction

    def to_json(self) -> dict:
        return {"loss": format_rational(self.loss), "mechanism": self.mechanism.to_json()}


@dataclass(frozen=True)
class OptimalInteractionResult:
    post: PostProcess
    induced: Mechanism
    loss: Fraction

    def to_json(self) -> dict:
        return {
            "loss": format_rational(self.loss),
            "post": self.post.to_json(),
            "induced": self.induced.to_json(),
        }


def _check_alpha(alpha) -> Fraction:
    a = to_rational(alpha)
    if not 0 < a < 1:
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {a}")
    return a


def _var(i: int, r: int, size: int) -> int:
    return i * size + r


def mechanism_lp(n: int, alpha, profile: ConsumerProfile) -> LinearProgram:
    """The minimax DP-mechanism program: variables x[i][r] row-major, then d.

    Minimizes d subject to d >= expected loss on every i in the side
    information, the two-sided DP ratio constraints between adjacent rows,
    and row sums of one.
    """
    a = _check_alpha(alpha)
    if profile.n != n:
        raise DimensionError(f"profile is for n={profile.n}, requested n={n}")
    size = n + 1
    d = size * size
    lp = LinearProgram(num_vars=d + 1, objective=[ZERO] * d + [Fraction(1)])
    loss = profile.loss
    for i in profile.side_info:
        terms = {_var(i, r, size): -loss[i, r] for r in range(size) if loss[i, r]}
        terms[d] = Fraction(1)
        lp.add_sparse(terms, GE, 0)
    for i in range(n):
        for r in range(size):
            lp.add_sparse({_var(i, r, size): Fraction(1), _var(i + 1, r, size): -a}, GE, 0)
            lp.add_sparse({_var(i + 1, r, size): Fraction(1), _var(i, r, size): -a}, GE, 0)
    for i in range(size):
        lp.add_sparse({_var(i, r, size): Fraction(1) for r in range(size)}, EQ, 1)
    return lp


def _solve(lp: LinearProgram) -> LPResult:
    result = solve_lp(lp)
    if not result.optimal:
        raise LPFailure(f"LP solve ended with status {result.status}")
    return result


def _matrix_from(values, size: int) -> RMatrix:
    return RMatrix([values[i * size : (i + 1) * size] for i in range(size)])


def optimal_mechanism(
    n: int, alpha, profile: ConsumerProfile, secondary: bool = False
) -> OptimalMechanismResult:
    """Exactly optimal ``alpha``-DP mechanism for a minimax consumer.

    With ``secondary=True`` ties among optima are broken by minimizing
    ``sum x[i][r] * |i - r|`` with the minimax loss held at its optimum.
    """
    lp = mechanism_lp(n, alpha, profile)
    result = _solve(lp)
    values = result.assignment
    if secondary:
        size = n + 1
        d = size * size
        pinned = LinearProgram(
            num_vars=lp.num_vars,
            objective=[Fraction(abs(i - r)) for i in range(size) for r in range(size)] + [ZERO],
            constraints=list(lp.constraints),
        )
        pinned.add_sparse({d: Fraction(1)}, EQ, result.value)
        values = _solve(pinned).assignment
    mech = Mechanism(_matrix_from(values[:-1], n + 1), to_rational(alpha))
    loss = max_loss(mech, profile)
    if loss != result.value:
        raise LPFailure(f"LP optimum {result.value} differs from recomputed loss {loss}")
    return OptimalMechanismResult(mech, loss)


def interaction_lp(deployed: Mechanism, profile: ConsumerProfile) -> LinearProgram:
    """Optimal post-processing program: variables T[r][r'] row-major, then d."""
    if deployed.matrix.shape != profile.loss.shape:
        raise DimensionError(
            f"deployed mechanism is {deployed.matrix.rows}x{deployed.matrix.cols} "
            f"but loss is {profile.loss.rows}x{profile.loss.cols}"
        )
    size = deployed.n + 1
    d = size * size
    lp = LinearProgram(num_vars=d + 1, objective=[ZERO] * d + [Fraction(1)])
    y, loss = deployed.matrix, profile.loss
    for i in profile.side_info:
        # expected loss at input i is sum_r sum_r' y[i][r] T[r][r'] l(i, r')
        terms = {d: Fraction(1)}
        for r in range(size):
            if not y[i, r]:
                continue
            for rp in range(size):
                if loss[i, rp]:
                    terms[_var(r, rp, size)] = -y[i, r] * loss[i, rp]
        lp.add_sparse(terms, GE, 0)
    for r in range(size):
        lp.add_sparse({_var(r, rp, size): Fraction(1) for rp in range(size)}, EQ, 1)
    return lp


def optimal_interaction(deployed: Mechanism, profile: ConsumerProfile) -> OptimalInteractionResult:
    lp = interaction_lp(deployed, profile)
    result = _solve(lp)
    post = PostProcess(_matrix_from(result.assignment[:-1], deployed.n + 1))
    induced = Mechanism(mat_mul(deployed.matrix, post.matrix))
    loss = max_loss(induced, profile)
    if loss != result.value:
        raise LPFailure(f"LP optimum {result.value} differs from recomputed loss {loss}")
    return OptimalInteractionResult(post, induced, loss)


@dataclass(frozen=True)
class RowPattern:
    """Shape of one adjacent row pair ``(row, row + 1)``.

    ``prefix`` counts leading columns with ``alpha * x[row][j] == x[row+1][j]``;
    ``suffix_start`` is the first column of the trailing run with
    ``x[row][j] == alpha * x[row+1][j]`` (``cols`` when the run is empty).
    """

    row: int
    prefix: int
    suffix_start: int
    matches: bool

    def to_json(self) -> dict:
        return {
            "rows": [self.row, self.row + 1],
            "prefix_len": self.prefix,
            "suffix_start": self.suffix_start,
            "matches": self.matches,
        }


def row_pattern_diagnostic(m: Mechanism, alpha) -> list[RowPattern]:
    """Report, per adjacent row pair, the tight-ratio prefix and suffix runs.

    The pair matches when at most one column lies strictly between the two
    runs, i.e. ``c2 - c1`` is 1 or 2 for last-prefix column ``c1`` and
    first-suffix column ``c2``.  Overlapping runs (possible only on all-zero
    columns) also match.  Diagnostic only: nothing here is asserted.
    """
    a = to_rational(alpha)
    x = m.matrix
    cols = x.cols
    out = []
    for i in range(m.n):
        lo, hi = x.row(i), x.row(i + 1)
        p = 0
        while p < cols and a * lo[p] == hi[p]:
            p += 1
        s = cols
        while s > 0 and lo[s - 1] == a * hi[s - 1]:
            s -= 1
        out.append(RowPattern(i, p, s, s - p <= 1))
    return out


def random_monotone_loss(n: int, rng: random.Random, max_step: int = 3) -> RMatrix:
    """Loss with non-negative random increments away from the diagonal on each side."""
    rows = []
    for i in range(n + 1):
        row = [ZERO] * (n + 1)
        row[i] = Fraction(rng.randint(0, max_step))
        for r in range(i + 1, n + 1):
            row[r] = row[r - 1] + rng.randint(0, max_step)
        for r in range(i - 1, -1, -1):
            row[r] = row[r + 1] + rng.randint(0, max_step)
        rows.append(row)
    return RMatrix(rows)


def random_profile(n: int, rng: random.Random) -> ConsumerProfile:
    k = rng.randint(1, n + 1)
    side = tuple(sorted(rng.sample(range(n + 1), k)))
    return ConsumerProfile(random_monotone_loss(n, rng), side)
