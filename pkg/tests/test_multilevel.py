from fractions import Fraction as F

import pytest

from dpcount.derivability import add_privacy
from dpcount.exactnum import mat_mul
from dpcount.mechanism import check_dp, geometric_restricted
from dpcount.multilevel import (
    LadderSizeError,
    audited_subsets,
    build_ladder,
    collusion_audit,
    conditional_given_first,
    joint_distribution,
    marginal,
    release,
)


def test_single_level_ladder():
    ladder = build_ladder(3, [F(1, 2)])
    assert ladder.k == 1
    assert ladder.steps[0].matrix == geometric_restricted(3, F(1, 2)).matrix


def test_two_level_ladder():
    ladder = build_ladder(3, [F(1, 4), F(1, 2)])
    assert ladder.steps[1] == add_privacy(3, F(1, 4), F(1, 2))
    assert mat_mul(ladder.steps[0].matrix, ladder.steps[1].matrix) == geometric_restricted(3, F(1, 2)).matrix


@pytest.mark.parametrize("alphas", [[F(1, 2), F(1, 4)], [F(1, 3), F(1, 3)], [F(0), F(1, 2)], [F(1, 2), F(1)], []])
def test_ladder_preconditions(alphas):
    with pytest.raises(ValueError):
        build_ladder(3, alphas)


def test_release_replay_and_range():
    ladder = build_ladder(4, [F(1, 5), F(1, 3), F(3, 4)])
    for seed in range(100):
        rec = release(ladder, 2, seed)
        assert rec == release(ladder, 2, seed)
        assert len(rec.results) == 3 and all(0 <= r <= 4 for r in rec.results)
    with pytest.raises(ValueError):
        release(ladder, 5, 0)


def test_release_single_level_is_geometric_sample():
    ladder = build_ladder(1, [F(1, 2)])
    draws = [release(ladder, 0, s).results[0] for s in range(30000)]
    assert abs(draws.count(0) / 30000 - 2 / 3) < 0.01


def test_release_marginal_of_second_level():
    ladder = build_ladder(3, [F(1, 4), F(1, 2)])
    runs = 60000
    counts = [0] * 4
    for s in range(runs):
        counts[release(ladder, 2, s).results[1]] += 1
    target = geometric_restricted(3, F(1, 2)).row(2)
    for c, p in zip(counts, target):
        assert abs(c / runs - float(p)) <= 0.01


def test_joint_distribution_single_level():
    ladder = build_ladder(3, [F(1, 3)])
    table = joint_distribution(ladder, 1)
    assert [table[(r,)] for r in range(4)] == list(geometric_restricted(3, F(1, 3)).row(1))


def test_joint_distribution_normalized():
    ladder = build_ladder(2, [F(1, 3), F(1, 2)])
    for i in range(3):
        assert sum(joint_distribution(ladder, i).values()) == 1


def test_conditional_is_input_free():
    ladder = build_ladder(3, [F(1, 5), F(1, 3), F(2, 3)])
    conds = [conditional_given_first(joint_distribution(ladder, i)) for i in range(4)]
    assert all(c == conds[0] for c in conds)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_marginals_are_geometric(n):
    alphas = [F(1, 5), F(1, 2), F(3, 4)]
    ladder = build_ladder(n, alphas)
    for i in range(n + 1):
        table = joint_distribution(ladder, i)
        for level, a in enumerate(alphas):
            m = marginal(table, [level])
            assert tuple(m[(r,)] for r in range(n + 1)) == geometric_restricted(n, a).row(i)


def test_audit_single_level_reduces_to_check_dp():
    ladder = build_ladder(3, [F(1, 3)])
    report = collusion_audit(ladder)
    assert report.ok == check_dp(geometric_restricted(3, F(1, 3)), F(1, 3)).ok
    assert report.subsets[0].worst_ratio == F(1, 3)


def test_audit_two_levels():
    report = collusion_audit(build_ladder(2, [F(1, 3), F(1, 2)]))
    assert report.ok
    by_levels = {s.levels: s for s in report.subsets}
    assert set(by_levels) == {(1,), (2,), (1, 2)}
    assert by_levels[(1, 2)].alpha == F(1, 3) and by_levels[(1, 2)].worst_ratio == F(1, 3)
    assert by_levels[(2,)].alpha == F(1, 2) and by_levels[(2,)].worst_ratio == F(1, 2)
    assert report.describe() == "ok, worst ratio 1/3 at alpha=1/3"


@pytest.mark.parametrize("n", range(1, 6))
def test_audit_three_levels_exhaustive(n):
    report = collusion_audit(build_ladder(n, [F(1, 4), F(1, 2), F(2, 3)]))
    assert report.ok
    assert len(report.subsets) == 7
    for s in report.subsets:
        assert s.worst_ratio >= s.alpha


def test_coalition_is_no_more_private_than_its_weakest_member():
    # the pair (r2, r3) is exactly as revealing as r2 alone
    report = collusion_audit(build_ladder(3, [F(1, 4), F(1, 2), F(2, 3)]))
    by_levels = {s.levels: s for s in report.subsets}
    assert by_levels[(2, 3)].worst_ratio == by_levels[(2,)].worst_ratio == F(1, 2)


def test_subset_enumeration_policy():
    assert len(audited_subsets(3)) == 7
    assert audited_subsets(4) == [(1,), (2,), (3,), (4,), (1, 2, 3, 4)]


def test_size_caps():
    with pytest.raises(LadderSizeError):
        joint_distribution(build_ladder(9, [F(1, 2)]), 0)
    with pytest.raises(LadderSizeError):
        collusion_audit(build_ladder(2, [F(1, 6), F(1, 5), F(1, 4), F(1, 3), F(1, 2)]))


def test_ladder_composition_direct_vs_intermediate():
    direct = build_ladder(4, [F(1, 5), F(3, 4)])
    chained = build_ladder(4, [F(1, 5), F(1, 2), F(3, 4)])
    for i in range(5):
        a = marginal(joint_distribution(direct, i), [1])
        b = marginal(joint_distribution(chained, i), [2])
        assert a == b
