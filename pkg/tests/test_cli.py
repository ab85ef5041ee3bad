import json
import subprocess
import sys


from aef.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_with_filter(capsys):
    code, out, _ = run(capsys, "list", "3.2.*")
    assert code == 0
    ids = [x["id"] for x in json.loads(out)]
    assert ids[0] == "3.2.1" and len(ids) == 7


def test_list_markdown(capsys):
    code, out, _ = run(capsys, "list", "--format", "md")
    assert code == 0 and out.startswith("| id |")


def test_unknown_case_is_a_usage_error(capsys):
    code, _, err = run(capsys, "verify", "--case", "nope")
    assert code == 2 and "UnknownCase" in err


def test_missing_selection_is_a_usage_error(capsys):
    assert run(capsys, "verify")[0] == 2


def test_bad_flag_is_a_usage_error(capsys):
    assert run(capsys, "trajectory", "--case", "3.1.1", "--dt", "-1")[0] == 2


def test_verify_one_case_json(capsys):
    code, out, _ = run(capsys, "verify", "--case", "3.1.2", "--seed", "3")
    assert code == 0
    data = json.loads(out)
    assert data["summary"]["passed"] == 1
    assert data["reports"][0]["outcome"] == "PotentialFound"


def test_verify_is_reproducible_and_writes_a_directory(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "verify", "--case", "3.1.4", "--case", "3.1.1", "--out", str(a))[0] == 0
    assert run(capsys, "verify", "--case", "3.1.1", "--case", "3.1.4", "--out", str(b))[0] == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["3.1.1.json", "3.1.1.md", "3.1.4.json", "3.1.4.md", "summary.json", "summary.md"]
    for n in names:
        assert (a / n).read_text() == (b / n).read_text()


def test_verify_markdown_names_the_checks(capsys):
    code, out, _ = run(capsys, "verify", "--case", "3.1.3", "--format", "md")
    assert code == 0
    assert "killing" in out and "structure_constants" in out


def test_classify_ends_with_the_potential(capsys):
    code, out, _ = run(capsys, "classify", "--case", "3.1.3", "--format", "md")
    assert code == 0
    assert out.strip().splitlines()[-1].startswith("**A = (0, 0, 0, a0(u0))**")


def test_trajectory_needs_a_potential_or_free(capsys):
    assert run(capsys, "trajectory", "--case", "3.3.3-eps1", "--t-end", "0.5")[0] == 2
    code, out, _ = run(capsys, "trajectory", "--case", "3.3.3-eps1", "--t-end", "0.5", "--free")
    assert code == 0 and json.loads(out)["potential"].startswith("free")


def test_trajectory_reports_drift(capsys):
    code, out, _ = run(capsys, "trajectory", "--case", "3.1.1", "--t-end", "1", "--format", "md")
    assert code == 0
    assert "| X4 |" in out


def test_trajectory_parameter_outside_its_set(capsys):
    assert run(capsys, "trajectory", "--case", "3.1.1", "--param", "e0=0.5")[0] == 2


def test_trajectory_blow_up_exits_one(capsys):
    code, _, err = run(capsys, "trajectory", "--case", "3.2.3", "--param", "c=0.3", "--dt", "0.01", "--t-end", "5")
    assert code == 1 and ("BlowUp" in err or "MetricDegeneration" in err)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "aef", "list", "3.1.1"], capture_output=True, text=True, check=False)
    assert r.returncode == 0 and json.loads(r.stdout)[0]["id"] == "3.1.1"
