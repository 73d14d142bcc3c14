import json

import pytest

from dpcount.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_gen_restricted(capsys):
    code, obj = run_json(capsys, "gen", "--n", "1", "--alpha", "1/2")
    assert code == 0
    assert obj["matrix"]["entries"] == [["2/3", "1/3"], ["1/3", "2/3"]]


def test_gen_degenerate_alphas(capsys):
    _, obj = run_json(capsys, "gen", "--n", "2", "--alpha", "1")
    assert all(v == "1/2" for v in (obj["matrix"]["entries"][0][0], obj["matrix"]["entries"][0][2]))
    _, obj = run_json(capsys, "gen", "--n", "2", "--alpha", "0")
    assert obj["matrix"]["entries"][1] == ["0", "1", "0"]


def test_gen_full_pmf(capsys):
    code, obj = run_json(capsys, "gen", "--alpha", "1/2", "--form", "full-pmf", "--bound", "2")
    assert code == 0 and obj["pmf"]["0"] == "1/3" and obj["pmf"]["-2"] == "1/12"


@pytest.mark.parametrize("alpha", ["2", "0.5", "-1/3"])
def test_gen_rejects_bad_alpha(capsys, alpha):
    code, _, err = run(capsys, "gen", "--n", "2", "--alpha", alpha)
    assert code == 2 and err


def test_check_dp_and_derivable(capsys, fixtures):
    path = str(fixtures / "private_not_derivable.json")
    code, obj = run_json(capsys, "check", "dp", path, "--alpha", "1/2")
    assert code == 0 and obj["ok"] is True
    code, obj = run_json(capsys, "check", "derivable", path, "--alpha", "1/2")
    assert code == 1
    assert obj["derivable"] is False
    assert obj["violation"] == {"column": 1, "rows": [0, 1, 2], "margin": "-1/12"}


def test_check_identity_is_not_private(capsys, fixtures):
    path = str(fixtures / "identity.json")
    code, obj = run_json(capsys, "check", "dp", path, "--alpha", "1/2")
    assert code == 1 and obj["ok"] is False
    code, obj = run_json(capsys, "check", "derivable", path, "--alpha", "1/2")
    assert code == 1 and obj["derivable"] is False and "reason" in obj


def test_check_derivable_geometric(capsys, tmp_path):
    out = tmp_path / "g.json"
    assert main(["gen", "--n", "3", "--alpha", "1/4", "--out", str(out)]) == 0
    code, obj = run_json(capsys, "check", "derivable", str(out), "--alpha", "1/4")
    assert code == 0 and obj["derivable"] is True


def test_optimize_small_case(capsys):
    code, obj = run_json(capsys, "optimize", "--n", "1", "--alpha", "1/2", "--loss", "zero_one", "--side", "0..1")
    assert code == 0 and obj["loss"] == "1/3"


def test_optimize_nonmonotone_loss_file(capsys, fixtures):
    code, _, err = run(capsys, "optimize", "--n", "2", "--alpha", "1/2", "--loss", "@" + str(fixtures / "nonmonotone.json"))
    assert code == 2
    assert "l(0,1)=2 > l(0,2)=1" in err


def test_optimize_bad_side(capsys):
    code, _, _ = run(capsys, "optimize", "--n", "2", "--alpha", "1/2", "--side", "0..5")
    assert code == 2


def test_optimize_matches_interaction_with_geometric(capsys, tmp_path):
    g = tmp_path / "g.json"
    main(["gen", "--n", "3", "--alpha", "1/4", "--out", str(g)])
    capsys.readouterr()
    _, best = run_json(capsys, "optimize", "--n", "3", "--alpha", "1/4", "--loss", "abs", "--patterns")
    _, via = run_json(capsys, "interact", str(g), "--loss", "abs")
    assert best["loss"] == via["loss"] == "168/415"
    assert len(best["row_patterns"]) == 3


def test_interact_on_optimized_output(capsys, tmp_path):
    out = tmp_path / "opt.json"
    assert main(["optimize", "--n", "2", "--alpha", "1/3", "--loss", "square", "--out", str(out)]) == 0
    opt = json.loads(out.read_text())
    mech = tmp_path / "m.json"
    mech.write_text(json.dumps(opt["mechanism"]))
    code, obj = run_json(capsys, "interact", str(mech), "--loss", "square")
    assert code == 0 and obj["loss"] == opt["loss"]


def test_interact_constant_mechanism(capsys, fixtures):
    code, obj = run_json(capsys, "interact", str(fixtures / "constant_n2.json"), "--loss", "abs")
    assert code == 0 and obj["loss"] == "1"


def test_interact_shape_mismatch(capsys, fixtures, tmp_path):
    loss = tmp_path / "loss.json"
    loss.write_text(json.dumps({"loss": {"entries": [["0", "1"], ["1", "0"]]}}))
    code, _, err = run(capsys, "interact", str(fixtures / "constant_n2.json"), "--loss", "@" + str(loss))
    assert code == 2 and "expected 3x3" in err


def test_release_is_reproducible(capsys):
    argv = ["release", "--n", "3", "--alphas", "1/4,1/2,2/3", "--true-result", "2", "--seed", "17"]
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0
    assert len(json.loads(first[1])["results"]) == 3


def test_release_rejects_decreasing_alphas(capsys):
    code, _, err = run(capsys, "release", "--n", "3", "--alphas", "1/2,1/4", "--true-result", "0")
    assert code == 2 and err


def test_seed_from_environment(capsys, monkeypatch, fixtures):
    path = str(fixtures / "private_not_derivable.json")
    monkeypatch.setenv("DPCOUNT_SEED", "5")
    _, from_env = run_json(capsys, "sample", path, "--true-result", "3")
    _, explicit = run_json(capsys, "sample", path, "--true-result", "3", "--seed", "5")
    assert from_env == explicit and from_env["seed"] == 5
    monkeypatch.setenv("DPCOUNT_SEED", "nope")
    assert run(capsys, "sample", path, "--true-result", "3")[0] == 2


def test_audit(capsys):
    code, obj = run_json(capsys, "audit", "--n", "2", "--alphas", "1/3,1/2")
    assert code == 0
    assert "ok" in obj["verdict"] and "alpha=1/3" in obj["verdict"]


def test_reduce(capsys, tmp_path):
    from dpcount.mechanism import geometric_restricted
    from dpcount.oblivious import DatabaseSpace, DbMechanism
    from fractions import Fraction as F

    m = DbMechanism.lift(DatabaseSpace(2, 2, frozenset({1})), geometric_restricted(2, F(1, 2)))
    path = tmp_path / "db.json"
    path.write_text(json.dumps(m.to_json()))
    code, obj = run_json(capsys, "reduce", str(path), "--alpha", "1/2", "--loss", "abs")
    assert code == 0 and obj["ok"] is True
    assert obj["oblivious_loss"] == obj["database_loss"]


def test_missing_file_and_unknown_command(capsys, tmp_path):
    assert run(capsys, "check", "dp", str(tmp_path / "nope.json"), "--alpha", "1/2")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--criteria", "1,2")
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 2 and all(line.startswith("[PASS]") for line in lines)
    assert run(capsys, "verify", "--criteria", "9")[0] == 2
