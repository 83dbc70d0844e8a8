import json
import os
import subprocess
import sys

import pytest

from fvtree import acceptance, cli
from fvtree.stats import CheckResult


def run(args, capsys):
    code = cli.main(args)
    return code, capsys.readouterr().out


def csv_body(text):
    lines = text.splitlines()
    assert lines[0].startswith("# manifest: ")
    manifest = json.loads(lines[0][len("# manifest: "):])
    return manifest, lines[1:]


def test_gen_table_text(capsys):
    code, out = run(["gen-table"], capsys)
    assert code == 0
    assert "34/36 items agree" in out
    flagged = [l for l in out.splitlines() if l.startswith("!! 20") or l.startswith("!! 24")]
    assert len(flagged) == 2
    assert "4x Ψ̂[^12]" in out


def test_gen_table_json(capsys, tmp_path):
    path = tmp_path / "t.json"
    code, _ = run(["gen-table", "--format", "json", "--out", str(path)], capsys)
    assert code == 0
    doc = json.loads(path.read_text())
    unmarked = [r for r in doc["records"] if r["section"] == "unmarked"]
    assert len(unmarked) == 36
    assert sum(not r["match"] for r in unmarked) == 2
    assert doc["manifest"]["config"]["subcommand"] == "gen-table"


def test_moments_values(capsys):
    code, out = run(["moments", "--formula", "psi12", "--formula", "mark_ratio", "--lambda", "50", "--theta", "1", "--format", "json"], capsys)
    assert code == 0
    rec = {r["formula"]: r for r in json.loads(out)["records"]}
    assert rec["psi12"]["exact"] == "1/51"
    assert rec["mark_ratio"]["exact"] == "51/53"


def test_moments_symbolic_and_series(capsys):
    code, out = run(["moments", "--formula", "variance"], capsys)
    assert code == 0 and "λ" in out
    code, out = run(["moments", "--formula", "tavare", "--eps", "0.01", "--format", "csv"], capsys)
    manifest, body = csv_body(out)
    assert body[0].startswith("formula,")
    assert manifest["config"]["eps"] == 0.01


def test_sim_coalescent_reproducible(capsys):
    args = ["sim-coalescent", "--eps", "0.05", "--reps", "3", "--seed", "9"]
    _, a = run(args, capsys)
    _, b = run(args, capsys)
    assert a == b
    manifest, body = csv_body(a)
    assert body[0] == "replicate,time,functional,value"
    assert len(body) == 1 + 3 * 4
    assert manifest["seed"] == 9 and "numpy" in manifest["versions"]


def test_sim_coalescent_other_functionals(capsys):
    _, out = run(["sim-coalescent", "--functional", "level_times", "--reps", "2", "--n0", "100", "--format", "json"], capsys)
    recs = json.loads(out)["records"]
    assert {r["functional"] for r in recs} == {"T_5", "T_20"}
    _, out = run(["sim-coalescent", "--functional", "z_profile", "--lambda", "10", "--t-grid", "0.5,1", "--reps", "2", "--n0", "200", "--format", "json"], capsys)
    assert len(json.loads(out)["records"]) == 4


def test_sim_moran_records(capsys):
    code, out = run(
        ["sim-moran", "--N", "60", "--theta", "1", "--lambda", "5", "--t-grid", "0.5:1.5:3", "--reps", "2",
         "--functional", "mark_ratio", "--functional", "W", "--functional", "n_eps", "--format", "json"],
        capsys,
    )
    assert code == 0
    recs = json.loads(out)["records"]
    assert len(recs) == 2 * 3 * 3
    for r in recs:
        if r["functional"] == "mark_ratio":
            assert 0.0 <= r["value"] <= 1.0


@pytest.mark.parametrize(
    "args",
    [
        ["sim-moran", "--N", "1"],
        ["sim-moran", "--N", "6000"],
        ["sim-coalescent", "--eps", "-1"],
        ["sim-moran", "--t-grid", "1,0.5"],
        ["sim-moran", "--functional", "W"],
        ["sim-moran", "--alpha", "1"],
        ["moments", "--formula", "nope"],
        ["sim-coalescent", "--seed", "-3"],
    ],
)
def test_invalid_configs_exit_2(args, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(args)
    assert exc.value.code == 2


def test_parse_grid():
    assert cli.parse_grid("0.1,0.2") == [0.1, 0.2]
    assert cli.parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    with pytest.raises(cli.ConfigError):
        cli.parse_grid("a,b")


def test_verify_exit_codes(monkeypatch, capsys):
    ok = CheckResult.within("x", 1.0, 1.0)
    bad = CheckResult.within("y", 2.0, 1.0)
    monkeypatch.setattr(acceptance, "run_suite", lambda suite, seed, progress=None: [(1, [ok], 0.1)])
    code, out = run(["verify", "symbolic"], capsys)
    assert code == 0 and json.loads(out)["passed"] is True
    monkeypatch.setattr(acceptance, "run_suite", lambda suite, seed, progress=None: [(1, [ok, bad], 0.1)])
    code, out = run(["verify", "symbolic"], capsys)
    assert code == 1 and json.loads(out)["checks"][1]["passed"] is False


def test_python_backend_gives_identical_output():
    args = [sys.executable, "-m", "fvtree", "sim-coalescent", "--eps", "0.05", "--reps", "3", "--seed", "4"]
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, FVTREE_DISABLE_NUMBA=flag)
        res = subprocess.run(args, env=env, capture_output=True, text=True, check=True)
        manifest, body = csv_body(res.stdout)
        outs.append((manifest["backend"], body))
    assert outs[1][0] == "python"
    assert outs[0][1] == outs[1][1]
