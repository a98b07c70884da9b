import json
import subprocess
import sys

import pytest

from qkoszul.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_confluence(capsys):
    code, rep = report(capsys, "confluence", "filiform5")
    assert code == 0 and rep["clean"] and rep["schema"] == 1 and rep["checked"] == 10


def test_koszul(capsys):
    code, rep = report(capsys, "koszul", "heisenberg3")
    assert code == 0 and rep["check"]["dd_zero"] and rep["complex"]["schema"] == 1


@pytest.mark.parametrize("name,display", [("scaled5", {"e5": "-h"}), ("solvable2", {"e1": "1"})])
def test_theta(capsys, name, display):
    code, rep = report(capsys, "theta", name)
    assert code == 0 and rep["is_character"]
    nonzero = {k: v for k, v in rep["theta_display"].items() if v != "0"}
    assert nonzero == display


def test_vee_of_f_form(capsys, tmp_path):
    from qkoszul.hopf import f_presentation
    from qkoszul.ncpoly import load_presentation
    from qkoszul.cli import data_path
    f = f_presentation(load_presentation(data_path("scaled5")))
    src = tmp_path / "f.json"
    src.write_text(json.dumps(f.to_json()))
    code, rep = report(capsys, "vee", str(src))
    assert code == 0
    assert rep["presentation"]["trunc_order"] == 6
    code, rep = report(capsys, "link", str(src))
    assert code == 0 and rep["alpha_in_I"]


def test_twist_dual_and_theta_pipeline(capsys, tmp_path):
    out = tmp_path / "dual.json"
    code, _, _ = run(capsys, "twist-dual", "filiform5-twist", "--degree", "4", "--no-coproducts",
                     "--compare", "filiform5", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["matches_reference"]
    assert rep["dual_commutators"]["[xi2,xi4]"] == "(2*h)*xi1"
    code, th = report(capsys, "theta", str(out))
    assert code == 0 and set(th["theta_display"].values()) == {"0"}


def test_twist_dual_mismatch_exit_code(capsys):
    code, rep = report(capsys, "twist-dual", "filiform5-twist", "--degree", "4", "--no-coproducts",
                       "--compare", "filiform5-trivial")
    assert code == 1 and not rep["ok"] and not rep["matches_reference"]


def test_hochschild(capsys):
    code, rep = report(capsys, "hochschild", "filiform5")
    assert code == 0 and rep["psi_equals_d_alpha"] and rep["gauge_h1_vanishes"]
    assert rep["mu1"] == {"mu1(e4,e3)": "e1^2", "mu1(e5,e2)": "e1^2"}


def test_center(capsys):
    code, rep = report(capsys, "center", "filiform5")
    assert code == 0 and rep["leading"] == ["1", "e1", "e1^2"]


@pytest.mark.parametrize("module", ["trivial", "zero"])
def test_poincare(capsys, module):
    code, rep = report(capsys, "poincare", "scaled5", module)
    assert code == 0 and rep["ok"]


def test_missing_input_is_operational_error(capsys):
    code, out, err = run(capsys, "theta", "does-not-exist")
    assert code == 2 and out == "" and "no such input" in err


def test_malformed_json_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"generators": ["e1",\n  }')
    code, _, err = run(capsys, "confluence", str(bad))
    assert code == 2 and "line 2" in err


def test_invalid_presentation(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"generators": ["a", "b"], "relations": [
        {"i": 1, "j": 2, "terms": [{"coeff": "1", "h_pow": 0, "expo": [0, 0]}]}]}))
    code, _, err = run(capsys, "koszul", str(bad))
    assert code == 2 and "constant" in err


def test_negative_cap_rejected(capsys):
    code, _, _ = run(capsys, "center", "filiform5", "--degree", "0")
    assert code == 2


def test_text_format(capsys):
    code, out, _ = run(capsys, "confluence", "abelian2", "--format", "text")
    assert code == 0 and "clean: True" in out


def test_output_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        target = tmp_path / f"r{k}.json"
        subprocess.run([sys.executable, "-m", "qkoszul", "koszul", "filiform5", "--out", str(target)], check=True)
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
