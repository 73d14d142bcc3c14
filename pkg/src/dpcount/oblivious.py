"""Reduction from database-indexed mechanisms to oblivious ones.

Works on tiny database spaces by full enumeration: every database in
``D^n`` gets its own output distribution, and the reduction averages the
distributions of all databases sharing a count.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional

from .exactnum import ZERO, DimensionError, RMatrix, format_rational, to_rational
from .mechanism import ConsumerProfile, Mechanism, check_dp, max_loss

MAX_ROW_DOMAIN = 3
MAX_DATABASES = 4096


@dataclass(frozen=True)
class DatabaseSpace:
    row_domain_size: int
    n: int
    predicate: frozenset[int]

    def __post_init__(self):
        if not 1 <= self.row_domain_size <= MAX_ROW_DOMAIN:
            raise ValueError(f"row domain size must be in 1..{MAX_ROW_DOMAIN}")
        if self.n < 1:
            raise ValueError("databases need at least one row")
        if self.row_domain_size ** self.n > MAX_DATABASES:
            raise ValueError(
                f"{self.row_domain_size}^{self.n} databases exceed the enumeration cap {MAX_DATABASES}"
            )
        object.__setattr__(self, "predicate", frozenset(self.predicate))
        if any(not 0 <= v < self.row_domain_size for v in self.predicate):
            raise ValueError("predicate values must lie in the row domain")

    @cached_property
    def databases(self) -> tuple[tuple[int, ...], ...]:
        return tuple(itertools.product(range(self.row_domain_size), repeat=self.n))

    def count(self, db: tuple[int, ...]) -> int:
        return sum(1 for v in db if v in self.predicate)

    @cached_property
    def counts(self) -> tuple[int, ...]:
        return tuple(self.count(d) for d in self.databases)

    def classes(self) -> dict[int, list[int]]:
        """Database indices grouped by count."""
        out: dict[int, list[int]] = {}
        for idx, c in enumerate(self.counts):
            out.setdefault(c, []).append(idx)
        return out

    def neighbor_pairs(self):
        """Index pairs (a, b), a < b, of databases differing in exactly one row."""
        index = {d: k for k, d in enumerate(self.databases)}
        for a, d in enumerate(self.databases):
            for pos in range(self.n):
                for v in range(d[pos] + 1, self.row_domain_size):
                    yield a, index[d[:pos] + (v,) + d[pos + 1 :]]


@dataclass(frozen=True)
class DbMechanism:
    space: DatabaseSpace
    matrix: RMatrix

    def __post_init__(self):
        expected = (len(self.space.databases), self.space.n + 1)
        if self.matrix.shape != expected:
            raise DimensionError(f"expected a {expected[0]}x{expected[1]} matrix, got {self.matrix.shape}")
        if not self.matrix.is_row_stochastic():
            raise ValueError("database mechanism must be row-stochastic")

    @classmethod
    def lift(cls, space: DatabaseSpace, m: Mechanism) -> "DbMechanism":
        """Database mechanism that answers with row ``f(d)`` of ``m``."""
        if m.n != space.n:
            raise DimensionError(f"mechanism n={m.n} does not match space n={space.n}")
        return cls(space, RMatrix([m.row(c) for c in space.counts]))

    def to_json(self) -> dict:
        return {
            "n": self.space.n,
            "row_domain": self.space.row_domain_size,
            "predicate_true_values": sorted(self.space.predicate),
            "matrix": self.matrix.to_json(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DbMechanism":
        space = DatabaseSpace(obj["row_domain"], obj["n"], frozenset(obj["predicate_true_values"]))
        return cls(space, RMatrix.from_json(obj["matrix"]))


def obliviousify(m: DbMechanism) -> Mechanism:
    classes = m.space.classes()
    rows = []
    for count in range(m.space.n + 1):
        members = classes.get(count)
        if not members:
            raise ValueError(f"count {count} is unreachable under this predicate")
        size = len(members)
        rows.append(
            [sum((m.matrix[d, r] for d in members), ZERO) / size for r in range(m.space.n + 1)]
        )
    return Mechanism(RMatrix(rows))


@dataclass(frozen=True)
class DbVerdict:
    ok: bool
    alpha: Fraction
    pair: Optional[tuple[int, int]] = None
    col: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def check_db_dp(m: DbMechanism, alpha) -> DbVerdict:
    a = to_rational(alpha)
    x = m.matrix
    for d1, d2 in m.space.neighbor_pairs():
        for r in range(x.cols):
            p, q = x[d1, r], x[d2, r]
            if q < a * p or p < a * q:
                return DbVerdict(False, a, (d1, d2), r)
    return DbVerdict(True, a)


def worst_database_loss(m: DbMechanism, profile: ConsumerProfile) -> Fraction:
    """max over databases with f(d) in the side information of the expected loss."""
    if profile.n != m.space.n:
        raise DimensionError(f"profile n={profile.n} does not match space n={m.space.n}")
    side = set(profile.side_info)
    losses = [
        sum((m.matrix[d, r] * profile.loss[c, r] for r in range(m.space.n + 1)), ZERO)
        for d, c in enumerate(m.space.counts)
        if c in side
    ]
    if not losses:
        raise ValueError("no database has a count inside the side information")
    return max(losses)


@dataclass(frozen=True)
class ReductionReport:
    alpha: Fraction
    oblivious: Mechanism
    private: bool
    oblivious_loss: Fraction
    database_loss: Fraction

    @property
    def loss_ok(self) -> bool:
        return self.oblivious_loss <= self.database_loss

    @property
    def ok(self) -> bool:
        return self.private and self.loss_ok

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "alpha": format_rational(self.alpha),
            "private": self.private,
            "oblivious_loss": format_rational(self.oblivious_loss),
            "database_loss": format_rational(self.database_loss),
            "mechanism": self.oblivious.to_json(),
        }


def reduction_audit(m: DbMechanism, alpha, profile: ConsumerProfile) -> ReductionReport:
    a = to_rational(alpha)
    verdict = check_db_dp(m, a)
    if not verdict.ok:
        raise ValueError(
            f"database mechanism is not {a}-differentially private "
            f"(databases {verdict.pair}, column {verdict.col})"
        )
    ob = obliviousify(m)
    return ReductionReport(
        a, ob, check_dp(ob, a).ok, max_loss(ob, profile), worst_database_loss(m, profile)
    )
