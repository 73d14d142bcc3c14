"""Correlated release of one count at several privacy levels.

The first level samples the ``alpha_1`` geometric mechanism; every later
level re-randomizes the previous level's output through the post-processing
that turns ``G(alpha_{i-1})`` into ``G(alpha_i)``.  Joint tables over all
levels are exact, so collusion resistance is audited by enumeration rather
than by sampling.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .derivability import PostProcess, add_privacy
from .exactnum import ONE, ZERO, RMatrix, format_rational, mat_mul, to_rational
from .mechanism import SplitMix64, draw_index, geometric_restricted

MAX_LEVELS = 4
MAX_N = 8
MAX_EXHAUSTIVE_LEVELS = 3


class LadderSizeError(ValueError):
    pass


@dataclass(frozen=True)
class ReleaseLadder:
    n: int
    alphas: tuple[Fraction, ...]
    steps: tuple[PostProcess, ...]

    @property
    def k(self) -> int:
        return len(self.alphas)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "alphas": [format_rational(a) for a in self.alphas],
            "steps": [s.to_json() for s in self.steps],
        }


@dataclass(frozen=True)
class ReleaseRecord:
    true_result: int
    seed: int
    results: tuple[int, ...]

    def to_json(self) -> dict:
        return {"true_result": self.true_result, "seed": self.seed, "results": list(self.results)}


def build_ladder(n: int, alphas: Sequence) -> ReleaseLadder:
    levels = tuple(to_rational(a) for a in alphas)
    if not levels:
        raise ValueError("need at least one privacy level")
    for a in levels:
        if not 0 < a < 1:
            raise ValueError(f"every alpha must lie strictly between 0 and 1, got {a}")
    for prev, nxt in zip(levels, levels[1:]):
        if not prev < nxt:
            raise ValueError(f"alphas must be strictly increasing, got {prev} then {nxt}")
    first = geometric_restricted(n, levels[0]).matrix
    steps = [PostProcess(first)]
    steps += [add_privacy(n, a, b) for a, b in zip(levels, levels[1:])]
    # recompute the chained products; each must be the geometric mechanism
    acc = first
    for a, step in zip(levels[1:], steps[1:]):
        acc = mat_mul(acc, step.matrix)
        if acc != geometric_restricted(n, a).matrix:
            raise AssertionError(f"ladder product at alpha={a} is not geometric")
    return ReleaseLadder(n, levels, tuple(steps))


def release(ladder: ReleaseLadder, true_result: int, seed: int) -> ReleaseRecord:
    if not 0 <= true_result <= ladder.n:
        raise ValueError(f"true result {true_result} outside 0..{ladder.n}")
    rng = SplitMix64(seed)
    current = true_result
    results = []
    for step in ladder.steps:
        current = draw_index(step.matrix.row(current), rng.uniform())
        results.append(current)
    return ReleaseRecord(true_result, seed, tuple(results))


def _check_size(ladder: ReleaseLadder) -> None:
    if ladder.k > MAX_LEVELS or ladder.n > MAX_N:
        raise LadderSizeError(
            f"joint tables are capped at k <= {MAX_LEVELS} and n <= {MAX_N}, "
            f"got k={ladder.k}, n={ladder.n}"
        )


def joint_distribution(ladder: ReleaseLadder, true_result: int) -> dict[tuple[int, ...], Fraction]:
    """Exact P(r_1, ..., r_k | true_result) over all outcome tuples."""
    _check_size(ladder)
    if not 0 <= true_result <= ladder.n:
        raise ValueError(f"true result {true_result} outside 0..{ladder.n}")
    size = ladder.n + 1
    table = {}
    for outcome in itertools.product(range(size), repeat=ladder.k):
        p = ONE
        prev = true_result
        for step, r in zip(ladder.steps, outcome):
            p *= step.matrix[prev, r]
            if not p:
                break
            prev = r
        table[outcome] = p
    return table


def marginal(table: dict[tuple[int, ...], Fraction], levels: Sequence[int]) -> dict[tuple[int, ...], Fraction]:
    """Marginalize a joint table onto the given 0-based level indices."""
    out: dict[tuple[int, ...], Fraction] = {}
    for outcome, p in table.items():
        key = tuple(outcome[c] for c in levels)
        out[key] = out.get(key, ZERO) + p
    return out


def conditional_given_first(table: dict[tuple[int, ...], Fraction]) -> dict[int, dict[tuple[int, ...], Fraction]]:
    """P(r_2..r_k | r_1) for every r_1 with positive probability."""
    first = marginal(table, [0])
    out: dict[int, dict[tuple[int, ...], Fraction]] = {}
    for outcome, p in table.items():
        p1 = first[(outcome[0],)]
        if p1:
            out.setdefault(outcome[0], {})[outcome[1:]] = p / p1
    return out


@dataclass(frozen=True)
class SubsetAudit:
    levels: tuple[int, ...]  # 1-based level numbers
    alpha: Fraction
    ok: bool
    worst_ratio: Fraction
    worst_at: Optional[tuple[int, tuple[int, ...]]] = None


@dataclass(frozen=True)
class AuditReport:
    ok: bool
    subsets: tuple[SubsetAudit, ...]

    @property
    def worst(self) -> SubsetAudit:
        return min(self.subsets, key=lambda s: (s.ok, s.worst_ratio / s.alpha))

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "subsets": [
                {
                    "levels": list(s.levels),
                    "alpha": format_rational(s.alpha),
                    "ok": s.ok,
                    "worst_ratio": format_rational(s.worst_ratio),
                }
                for s in self.subsets
            ],
        }

    def describe(self) -> str:
        tightest = min(s.worst_ratio for s in self.subsets)
        status = "ok" if self.ok else "violation"
        return f"{status}, worst ratio {tightest} at alpha={self.worst.alpha}"


def _audit_subset(tables, levels: tuple[int, ...], alpha: Fraction) -> SubsetAudit:
    idx = [c - 1 for c in levels]
    margins = [marginal(t, idx) for t in tables]
    worst = ONE
    where = None
    ok = True
    for i in range(len(margins) - 1):
        p, q = margins[i], margins[i + 1]
        for outcome in p.keys() | q.keys():
            a, b = p.get(outcome, ZERO), q.get(outcome, ZERO)
            if not a and not b:
                continue
            if not a or not b:
                return SubsetAudit(levels, alpha, False, ZERO, (i, outcome))
            ratio = min(a / b, b / a)
            if ratio < worst:
                worst, where = ratio, (i, outcome)
            if ratio < alpha:
                ok = False
    return SubsetAudit(levels, alpha, ok, worst, where)


def audited_subsets(k: int) -> list[tuple[int, ...]]:
    levels = range(1, k + 1)
    if k <= MAX_EXHAUSTIVE_LEVELS:
        return [c for size in range(1, k + 1) for c in itertools.combinations(levels, size)]
    return [(c,) for c in levels] + [tuple(levels)]


def collusion_audit(ladder: ReleaseLadder) -> AuditReport:
    """Check every audited coalition's joint law against its least-private level.

    A coalition ``C`` must satisfy ``alpha_min(C) <= P(o|i) / P(o|i+1) <= 1/alpha_min(C)``
    for every outcome ``o`` and adjacent inputs; outcomes that are
    impossible under one input but not the other fail outright.
    """
    _check_size(ladder)
    tables = [joint_distribution(ladder, i) for i in range(ladder.n + 1)]
    subsets = tuple(
        _audit_subset(tables, c, ladder.alphas[min(c) - 1]) for c in audited_subsets(ladder.k)
    )
    return AuditReport(all(s.ok for s in subsets), subsets)
