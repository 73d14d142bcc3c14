"""Acceptance checks, runnable from pytest or ``dpcount verify``.

Each check returns a :class:`CriterionResult`; a check passes only if its
exact assertions hold *and* it finishes within its time budget.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable

from scipy.stats import chi2

from .derivability import add_privacy, check_derivable, cramer_oracle
from .exactnum import RMatrix, det, mat_mul, power_matrix
from .mechanism import ConsumerProfile, Mechanism, check_dp, geometric_restricted, named_loss, sample
from .multilevel import build_ladder, collusion_audit, conditional_given_first, joint_distribution, marginal
from .oblivious import DatabaseSpace, reduction_audit
from .optimizer import optimal_interaction, optimal_mechanism, random_profile
from .randgen import random_db_mechanism, random_dp_mechanism

PRIVATE_NOT_DERIVABLE = Mechanism.from_rows(
    [
        [F(1, 9), F(2, 9), F(4, 9), F(2, 9)],
        [F(2, 9), F(1, 9), F(2, 9), F(4, 9)],
        [F(4, 9), F(2, 9), F(1, 9), F(2, 9)],
        [F(13, 18), F(1, 9), F(1, 18), F(1, 9)],
    ]
)

ALPHA_GRID = (F(1, 5), F(1, 4), F(1, 3), F(1, 2), F(2, 3), F(3, 4))
OPT_ALPHAS = (F(1, 4), F(1, 3), F(1, 2), F(2, 3))
CHI2_SIGNIFICANCE = 0.001


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    seconds: float
    limit: float
    detail: str

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number}. {self.name} ({self.seconds:.2f}s / {self.limit:g}s): {self.detail}"


def _timed(number: int, name: str, limit: float, body: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    try:
        ok, detail = body()
    except Exception as exc:  # a crash is a failed criterion, not a crashed runner
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if ok and elapsed >= limit:
        ok, detail = False, f"{detail}; exceeded time budget"
    return CriterionResult(number, name, ok, elapsed, limit, detail)


def nonderivable_regression() -> CriterionResult:
    def body():
        dp = check_dp(PRIVATE_NOT_DERIVABLE, F(1, 2))
        rep = check_derivable(PRIVATE_NOT_DERIVABLE, F(1, 2))
        v = rep.violation
        ok = (
            dp.ok
            and not rep.derivable
            and v is not None
            and (v.column, v.row, v.margin) == (1, 0, F(-1, 12))
        )
        return ok, f"dp={dp.ok}, derivable={rep.derivable}, violation={v}"

    return _timed(1, "non-derivable private mechanism", 1.0, body)


def determinant_law() -> CriterionResult:
    def body():
        checked = 0
        for size in range(2, 9):
            for a in OPT_ALPHAS:
                if det(power_matrix(size, a)) != (1 - a * a) ** (size - 1):
                    return False, f"power-matrix determinant wrong at size={size}, alpha={a}"
                if not det(geometric_restricted(size - 1, a).matrix) > 0:
                    return False, f"det(G) not positive at size={size}, alpha={a}"
                checked += 1
        return True, f"{checked} (size, alpha) cases exact"

    return _timed(2, "determinant law", 5.0, body)


def add_privacy_ladder() -> CriterionResult:
    def body():
        pairs = 0
        for n in range(1, 6):
            for a in ALPHA_GRID:
                for b in ALPHA_GRID:
                    if a < b:
                        t = add_privacy(n, a, b).matrix
                        if not t.is_row_stochastic():
                            return False, f"T not stochastic at n={n}, {a}->{b}"
                        if mat_mul(geometric_restricted(n, a).matrix, t) != geometric_restricted(n, b).matrix:
                            return False, f"G_a T != G_b at n={n}, {a}->{b}"
                        pairs += 1
                    elif a > b:
                        try:
                            add_privacy(n, a, b)
                        except ValueError:
                            pass
                        else:
                            return False, f"add_privacy({n}, {a}, {b}) did not refuse"
        return True, f"{pairs} increasing pairs exact, decreasing pairs refused"

    return _timed(3, "add-privacy ladder", 10.0, body)


def side_info_sets(n: int) -> dict[str, tuple[int, ...]]:
    return {
        "full": tuple(range(n + 1)),
        "prefix": tuple(range(n // 2 + 1)),
        "suffix": tuple(range((n + 1) // 2, n + 1)),
        "singleton": (n // 2,),
    }


def optimality_profiles(n: int, seed: int, random_count: int = 20):
    for loss in ("abs", "square", "zero_one"):
        for side_name, side in side_info_sets(n).items():
            yield f"{loss}/{side_name}", ConsumerProfile(named_loss(loss, n), side)
    rng = random.Random(seed)
    for k in range(random_count):
        yield f"random#{k}", random_profile(n, rng)


def universal_optimality(random_count: int = 20) -> CriterionResult:
    def body():
        cases = 0
        for n in range(1, 6):
            for a in OPT_ALPHAS:
                g = geometric_restricted(n, a)
                seed = 1000 * n + a.numerator * 10 + a.denominator
                for label, profile in optimality_profiles(n, seed, random_count):
                    best = optimal_mechanism(n, a, profile).loss
                    via_geometric = optimal_interaction(g, profile).loss
                    if best != via_geometric:
                        return False, (
                            f"n={n}, alpha={a}, {label}: mechanism LP {best} "
                            f"!= interaction LP {via_geometric}"
                        )
                    cases += 1
        return True, f"{cases} profiles, exact equality everywhere"

    return _timed(4, "universal optimality", 600.0, body)


def characterization_oracle(count: int = 120, seed: int = 5) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        derivable = 0
        for _ in range(count):
            n = rng.randint(2, 5)
            a = rng.choice(OPT_ALPHAS)
            m = random_dp_mechanism(n, a, rng)
            fast, slow = check_derivable(m, a), cramer_oracle(m, a)
            if fast.derivable != slow.derivable:
                return False, f"verdicts differ on {m.matrix} at alpha={a}"
            if fast.derivable:
                derivable += 1
                g = geometric_restricted(n, a).matrix
                if mat_mul(g, fast.witness.matrix) != m.matrix or fast.witness != slow.witness:
                    return False, f"witness does not reconstruct {m.matrix}"
        return True, f"{count} mechanisms agree ({derivable} derivable, {count - derivable} not)"

    return _timed(5, "characterization oracle equivalence", 120.0, body)


COLLUSION_LADDERS = (
    (1, (F(1, 3), F(1, 2))),
    (2, (F(1, 3), F(1, 2))),
    (3, (F(1, 5), F(3, 4))),
    (4, (F(1, 4), F(2, 3))),
    (2, (F(1, 5), F(1, 3), F(1, 2))),
    (3, (F(1, 4), F(1, 2), F(2, 3))),
    (4, (F(1, 5), F(1, 3), F(3, 4))),
)


def collusion_resistance() -> CriterionResult:
    def body():
        for n, alphas in COLLUSION_LADDERS:
            ladder = build_ladder(n, alphas)
            report = collusion_audit(ladder)
            if not report.ok:
                return False, f"n={n}, alphas={alphas}: {report.describe()}"
            tables = [joint_distribution(ladder, i) for i in range(n + 1)]
            conds = [conditional_given_first(t) for t in tables]
            if any(c != conds[0] for c in conds):
                return False, f"n={n}, alphas={alphas}: conditional on r1 depends on the input"
            for level, a in enumerate(alphas):
                g = geometric_restricted(n, a)
                for i, t in enumerate(tables):
                    m = marginal(t, [level])
                    if [m[(r,)] for r in range(n + 1)] != list(g.row(i)):
                        return False, f"marginal of level {level + 1} is not geometric"
        return True, f"{len(COLLUSION_LADDERS)} ladders: every coalition within its alpha bound"

    return _timed(6, "collusion audit", 120.0, body)


def oblivious_reduction(count: int = 50, seed: int = 11) -> CriterionResult:
    def body():
        rng = random.Random(seed)
        a = F(1, 2)
        strict = 0
        for _ in range(count):
            n = rng.randint(1, 3)
            space = DatabaseSpace(2, n, frozenset({1}))
            m = random_db_mechanism(space, a, rng)
            profile = ConsumerProfile(named_loss("abs", n))
            rep = reduction_audit(m, a, profile)
            if not rep.ok:
                return False, f"reduction failed: private={rep.private}, {rep.oblivious_loss} vs {rep.database_loss}"
            strict += rep.oblivious_loss < rep.database_loss
        return True, f"{count} database mechanisms pass ({strict} with strictly smaller loss)"

    return _timed(7, "oblivious reduction", 60.0, body)


SAMPLING_CASES = (
    (lambda: geometric_restricted(1, F(1, 2)), 0),
    (lambda: geometric_restricted(3, F(1, 4)), 0),
    (lambda: geometric_restricted(3, F(1, 2)), 2),
    (lambda: geometric_restricted(5, F(2, 3)), 3),
    (lambda: PRIVATE_NOT_DERIVABLE, 3),
)


def chi_square(counts, probs, draws: int) -> tuple[float, int]:
    cells = [(c, float(p) * draws) for c, p in zip(counts, probs) if p]
    stat = sum((c - e) ** 2 / e for c, e in cells)
    return stat, len(cells) - 1


def sampling_fidelity(draws: int = 50000) -> CriterionResult:
    def body():
        worst = 0.0
        for case, (make, row) in enumerate(SAMPLING_CASES):
            m = make()
            counts = [0] * (m.n + 1)
            base = 7919 * (case + 1) << 20
            for s in range(draws):
                counts[sample(m, row, base + s).output] += 1
            stat, df = chi_square(counts, m.row(row), draws)
            critical = chi2.ppf(1 - CHI2_SIGNIFICANCE, df)
            if stat > critical:
                return False, f"case {case}: chi2={stat:.2f} > {critical:.2f} (df={df})"
            worst = max(worst, stat / critical)
        for make, row in SAMPLING_CASES:
            m = make()
            first = json.dumps([sample(m, row, s).to_json() for s in range(200)])
            second = json.dumps([sample(m, row, s).to_json() for s in range(200)])
            if first != second:
                return False, "replay is not byte-identical"
        return True, f"5 cases within chi2 bound (max stat/critical ~ {worst:.3f}); replay byte-exact"

    return _timed(8, "sampling fidelity", 60.0, body)


CRITERIA = {
    1: nonderivable_regression,
    2: determinant_law,
    3: add_privacy_ladder,
    4: universal_optimality,
    5: characterization_oracle,
    6: collusion_resistance,
    7: oblivious_reduction,
    8: sampling_fidelity,
}


def run_all(selected=None) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if not selected else sorted(selected)
    return [CRITERIA[k]() for k in numbers]
