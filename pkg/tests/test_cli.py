from __future__ import annotations

import json

import pytest

from artifact.cli import JobConfig, read_principal_part, run
from artifact.errors import DomainError, InputFormatError
from cli_check import COMMANDS, DATA, deterministic, run_cli


def test_kappa_csv_example_row():
    code, text = run(["kappa", "-D", "-7", "--mmax", "10", "--format", "csv"])
    lines = text.splitlines()
    assert code == 0
    assert lines[0] == "m_num,m_den,mu,prime,coeff_num,coeff_den,k00_coeff"
    assert "1,1,0,7,-2,1,0" in lines
    assert "0,1,0,0,0,1,1" in lines


def test_kappa_json():
    code, text = run(["kappa", "-D", "-7", "--mmax", "2"])
    obj = json.loads(text)
    assert code == 0 and obj["D"] == -7 and obj["series"]["mmax"] == [2, 1]
    assert [0, 1, 1, {"k00": [], "logs": [[7, -2, 1]], "rat": [0, 1]}] in obj["series"]["entries"]


@pytest.mark.parametrize("argv", [
    ["kappa", "-D", "-8", "--mmax", "3"],
    ["kappa", "-D", "-7", "--norm-a", "3", "--mmax", "3"],
    ["kappa", "-D", "-7", "--mmax", "x"],
    ["intersect", "--N", "1", "--D0", "-7", "--r0", "1", "--D1", "-28", "--r1", "0"],
    ["intersect", "--N", "1", "--D0", "-7", "--r0", "1"],
    ["hms", "--delta", "7", "-D", "-3"],
    ["hms", "--delta", "5", "-D", "-5"],
])
def test_domain_errors_exit_2(argv):
    code, text = run(argv)
    assert code == 2 and text.startswith("error:")


def test_intersect_equal_flag():
    code, text = run(COMMANDS["intersect"])
    obj = json.loads(text)
    assert code == 0 and obj["equal"] and obj["prop714"] == obj["coeff"]


def test_grid_summary():
    obj = json.loads(run(COMMANDS["intersect-grid"])[1])
    assert obj["instances"] == obj["agree"] > 0
    obj = json.loads(run(COMMANDS["hms"])[1])
    assert obj["instances"] == obj["agree"] > 0


def test_height_report():
    obj = json.loads(run(COMMANDS["height"])[1])
    assert obj["k00_coeff"] == [4, 3]
    assert abs(obj["lderiv"] - 3.554866904398) < 1e-9


def test_height_zero_inputs(tmp_path):
    pp = tmp_path / "pp.txt"
    pp.write_text("# nothing\n")
    nf = tmp_path / "g.txt"
    nf.write_text("# level 37 sign -1\n" + "".join(f"{n} 0\n" for n in range(1, 50)))
    obj = json.loads(run(["height", "--N", "37", "--D0", "-3", "--r0", "21", "--pp", str(pp), "--newform", str(nf)])[1])
    assert obj == {"exact_logs": [], "faltings_rhs": 0.0, "k00_coeff": [0, 1], "lderiv": 0.0, "numeric_total": 0.0}


@pytest.mark.parametrize("content,line", [("147 148 1 1\n", 1), ("# c\n147 148 1 1 2\nconst 1\n", 3),
                                           ("147 148 1 a 2\n", 1), ("0 1 0 1 1\n", 1)])
def test_malformed_principal_part_exit_3(tmp_path, content, line):
    pp = tmp_path / "pp.txt"
    pp.write_text(content)
    code, text = run(["height", "--N", "37", "--D0", "-3", "--r0", "21", "--pp", str(pp),
                      "--newform", str(DATA / "37a.txt")])
    assert code == 3 and f"pp.txt:{line}:" in text


def test_missing_files_exit_3(tmp_path):
    argv = ["height", "--N", "37", "--D0", "-3", "--r0", "21", "--pp", str(tmp_path / "none.txt"),
            "--newform", str(DATA / "37a.txt")]
    assert run(argv)[0] == 3
    argv[-3:] = [str(DATA / "pp37.txt"), "--newform", str(tmp_path / "none.txt")]
    assert run(argv)[0] == 3


def test_asymmetric_principal_part_is_domain_error(tmp_path):
    pp = tmp_path / "pp.txt"
    pp.write_text("147 148 1 1 2\n")
    with pytest.raises(DomainError):
        read_principal_part(pp, 37)
    pp.write_text("147 148 1 1 0\n")
    with pytest.raises(InputFormatError):
        read_principal_part(pp, 37)


def test_job_config_rejects_unknown_keys():
    with pytest.raises(DomainError):
        JobConfig("kappa", {"D": -7, "mmax": "1", "N": 3})
    with pytest.raises(DomainError):
        JobConfig("plot", {})
    with pytest.raises(DomainError):
        JobConfig("kappa", {}, fmt="xml")


def test_usage_errors_exit_3():
    r = run_cli(["kappa", "--mmax", "3"])
    assert r.returncode == 3
    assert run_cli(["frobnicate"]).returncode == 3


def test_output_file(tmp_path):
    out = tmp_path / "k.csv"
    code, text = run(COMMANDS["kappa-csv"] + ["-o", str(out)])
    assert code == 0 and text == ""
    assert out.read_text() == run(COMMANDS["kappa-csv"])[1]


@pytest.mark.parametrize("name", ["kappa-csv", "intersect", "height-csv"])
def test_deterministic(name):
    assert deterministic(name)
