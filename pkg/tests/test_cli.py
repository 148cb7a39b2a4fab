import json
import subprocess
import sys

import pytest

from glueforge.cli import main


@pytest.fixture
def run(data_dir, capsys):
    def go(*args):
        argv = [a.replace("@", str(data_dir) + "/") for a in args]
        code = main(argv)
        out = capsys.readouterr().out
        return code, (json.loads(out) if "--format" not in argv else out)
    return go


def test_clique(run):
    code, out = run("clique", "--graph", "@k4.json")
    assert code == 0 and out["complex"]["counts"] == [4, 6, 4]
    code, out = run("clique", "--graph", "@c5.json")
    assert out["complex"]["counts"] == [5, 5, 0]


def test_expand(run):
    code, out = run("expand", "--graph", "@uv.json")
    assert code == 0 and out["counts"] == [2, 3, 4]
    assert out["complex"]["S2"]["u>u>v"] == ["u>v", "u>v", "u>u"]


def test_cohomology_and_homology(run):
    assert run("cohomology", "--sheaf", "@c3.json")[1]["H"] == [1, 1]
    assert run("homology", "--sheaf", "@c3_cosheaf.json")[1]["H"] == [1, 1]
    assert run("cohomology", "--p1-degree", "-2")[1]["H"] == [0, 1]
    assert run("cohomology", "--p1-degree", "1", "--degree-window=-4:4")[1]["H"] == [2, 0]


def test_cech_and_compare(run):
    assert run("cech", "--cech", "@cech_p1_deg0.json")[1]["H"] == [1, 0, 0]
    code, out = run("compare01", "--sheaf", "@c3.json", "--expect", "1,1")
    assert code == 0 and out["agree_0_1"]
    code, out = run("compare01", "--sheaf", "@c3.json", "--expect", "1,0")
    assert code == 1 and not out["agree_0_1"]


def test_models(run):
    code, out = run("su2", "--nerve", "@p1_nerve.json")
    assert code == 0 and len(out["points"]) == 3 and out["paraschematic"]
    assert run("validate-datum", "--datum", "@p1_datum.json")[1]["ok"]
    assert run("sheaf-sections", "--sheaf", "@c3.json", "--open", "a>b")[1]["dim"] == 1


def test_bundles(run):
    assert run("bundle", "--bundle", "@k3_good.json")[0] == 0
    code, out = run("bundle", "--bundle", "@k3_bad.json")
    assert code == 1 and out["valid"]["problems"][0]["kind"] == "cocycle"
    code, out = run("bundle", "--bundle", "@c4_twisted.json", "--walk", "a,b,c,d,a")
    assert out["monodromy"] == [[2]] and out["H"][0] == 0


def test_cschtwo(run):
    code, out = run("cschtwo-we", "--scenario", "@p1_scenario.json")
    assert code == 0 and {m["status"] for m in out.values()} == {"true"}
    code, out = run("cschtwo-eq", "--scenario", "@p1_scenario.json", "--morphism", "r", "--morphism", "r")
    assert code == 0 and out["status"] == "equal"
    assert run("cschtwo-build", "--nerve", "@p1_nerve.json")[0] == 0


def test_counterexamples(run):
    code, out = run("counterexamples")
    assert code == 0
    assert out["rms3"]["strict_rms3_holds"] is False
    assert out["witness"]["witness"] is True


def test_malformed_input(run, tmp_path):
    code, out = run("clique", "--graph", str(tmp_path / "missing.json"))
    assert code == 2 and out["error"] == "malformed-input"
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": ["a"], "edges": [["a", "z"]]}')
    code, out = run("clique", "--graph", str(bad))
    assert code == 2 and out["path"].startswith("$")


def test_unknown_command():
    assert main(["frobnicate"]) == 2


def test_text_format(run):
    code, out = run("cohomology", "--sheaf", "@c3.json", "--format", "text")
    assert "H: [1, 1]" in out.splitlines()


def test_out_file(run, tmp_path, data_dir):
    target = tmp_path / "r.json"
    assert main(["clique", "--graph", str(data_dir / "k4.json"), "--out", str(target)]) == 0
    assert json.loads(target.read_text())["complex"]["counts"] == [4, 6, 4]


def test_output_is_deterministic(data_dir):
    cmd = [sys.executable, "-m", "glueforge", "cschtwo-we", "--scenario", str(data_dir / "p1_scenario.json")]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first
