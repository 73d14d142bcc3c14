"""Seeded generators of random exact objects for property checks and audits."""

from __future__ import annotations

import random
from fractions import Fraction

from .exactnum import RMatrix, mat_mul
from .mechanism import Mechanism, check_dp, geometric_restricted
from .oblivious import DatabaseSpace, DbMechanism, check_db_dp


def random_stochastic(size: int, rng: random.Random, max_weight: int = 4) -> RMatrix:
    rows = []
    for _ in range(size):
        w = [rng.randint(0, max_weight) for _ in range(size)]
        if not any(w):
            w[rng.randrange(size)] = 1
        total = sum(w)
        rows.append([Fraction(v, total) for v in w])
    return RMatrix(rows)


def _normalized(row):
    total = sum(row)
    return [v / total for v in row]


def _ratio_step(alpha: Fraction) -> Fraction:
    # smallest k/16 whose square is at least alpha
    k = 1
    while Fraction(k, 16) ** 2 < alpha:
        k += 1
    return Fraction(k, 16)


def random_walk_mechanism(n: int, alpha, rng: random.Random) -> Mechanism:
    """Rows drift by per-entry factors in [s, 1/s] with s*s >= alpha, then renormalize.

    Adjacent-row ratios stay within [s^2, 1/s^2], so the result is
    alpha-DP; consecutive triples are unconstrained, so both derivable and
    non-derivable mechanisms come out.
    """
    a = Fraction(alpha)
    s = _ratio_step(a)
    choices = [s, s, (1 + s) / 2, Fraction(1), 2 / (1 + s), 1 / s, 1 / s]
    row = [Fraction(rng.randint(1, 6)) for _ in range(n + 1)]
    rows = [_normalized(row)]
    for _ in range(n):
        row = [v * rng.choice(choices) for v in row]
        rows.append(_normalized(row))
    return Mechanism(RMatrix(rows))


def random_derived_mechanism(n: int, alpha, rng: random.Random) -> Mechanism:
    """Geometric mechanism followed by a random post-processing."""
    g = geometric_restricted(n, alpha).matrix
    return Mechanism(mat_mul(g, random_stochastic(n + 1, rng)))


def random_dp_mechanism(n: int, alpha, rng: random.Random) -> Mechanism:
    """Random alpha-DP mechanism: a drift mechanism, a derived one, or a mix."""
    kind = rng.randrange(3)
    if kind == 0:
        m = random_walk_mechanism(n, alpha, rng)
    elif kind == 1:
        m = random_derived_mechanism(n, alpha, rng)
    else:
        lam = Fraction(rng.randint(1, 9), 10)
        x = random_walk_mechanism(n, alpha, rng).matrix
        y = random_derived_mechanism(n, alpha, rng).matrix
        m = Mechanism(RMatrix([[lam * p + (1 - lam) * q for p, q in zip(rx, ry)] for rx, ry in zip(x, y)]))
    if not check_dp(m, alpha).ok:
        raise AssertionError("generator produced a non-private mechanism")
    return m


def random_db_mechanism(space: DatabaseSpace, alpha, rng: random.Random) -> DbMechanism:
    """Lifted geometric rows with per-database multiplicative noise.

    Base rows use ``beta = (1 + alpha) / 2``; entries are scaled by factors
    in ``[1, c]`` with ``c * c <= beta / alpha``, which keeps neighbor
    ratios within ``[alpha, 1/alpha]``.
    """
    a = Fraction(alpha)
    beta = (1 + a) / 2
    c_num = 20
    while Fraction(c_num + 1, 20) ** 2 <= beta / a:
        c_num += 1
    g = geometric_restricted(space.n, beta)
    rows = []
    for count in space.counts:
        base = g.row(count)
        rows.append(_normalized([v * Fraction(rng.randint(20, c_num), 20) for v in base]))
    m = DbMechanism(space, RMatrix(rows))
    if not check_db_dp(m, a).ok:
        raise AssertionError("generator produced a non-private database mechanism")
    return m
