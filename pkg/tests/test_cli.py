import csv
import json

import pytest

from nekhoroshev.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_lattices_count(capsys):
    code, out, _ = run(capsys, "lattices", "-n", "3", "-K", "1", "-j", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["count"] == 3
    assert set(rep) >= {"tool_version", "config_hash", "seed"}


def test_constants_exact_exponent(capsys):
    code, out, _ = run(capsys, "constants")
    assert code == 0
    assert json.loads(out)["exponents"]["a"]["exact"] == "1/6"


def test_reports_are_byte_identical(capsys):
    argv = ("simulate", "--eps", "1e-3", "--steps", "200", "--stride", "20")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_verify_relations_only(capsys):
    code, out, _ = run(capsys, "verify", "--eps-fraction", "0.5", "--no-lemmas")
    assert code == 0
    assert '"fail"' not in out


def test_atlas_csv(tmp_path, capsys):
    path = tmp_path / "slice.csv"
    code, out, _ = run(capsys, "atlas", "--grid", "8", "--csv", str(path))
    assert code == 0
    rep = json.loads(out)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["I1", "I2", "I3", "jstar", "lattice", "min_divisor"]
    assert len(rows) - 1 == rep["labelled"] == rep["points"]


def test_out_file_and_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"seed": 7, "out_dir": str(tmp_path)}))
    code, out, _ = run(capsys, "lattices", "-n", "3", "-K", "2", "--config", str(cfg), "--out", "lat.json")
    assert code == 0 and out == ""
    rep = json.loads((tmp_path / "lat.json").read_text())
    assert rep["seed"] == 7


@pytest.mark.parametrize(
    "payload",
    [
        {"bogus": 1},
        {"budget": 0},
        {"eps_grid": [1e-20, 1e-19]},
        {"model": "/nonexistent/model.json"},
    ],
)
def test_bad_config_exits_2(tmp_path, capsys, payload):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps(payload))
    code, _, err = run(capsys, "constants", "--config", str(cfg))
    assert code == 2
    assert err.startswith("error:")


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "lattices", "-n", "3")[0] == 2
    assert run(capsys, "lattices", "-n", "3", "-K", "2", "--budget", "0")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_missing_config_file(capsys):
    code, _, err = run(capsys, "constants", "--config", "/nonexistent.json")
    assert code == 2 and "not found" in err


def test_config_options_fill_unset_flags(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"options": {"steps": 40, "stride": 20, "eps": 1e-3}}))
    code, out, _ = run(capsys, "simulate", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["samples"] == 3
    # an explicit flag still wins
    _, out, _ = run(capsys, "simulate", "--config", str(cfg), "--stride", "40")
    assert json.loads(out)["samples"] == 2


def test_unknown_config_option(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"options": {"no_such_flag": 1}}))
    code, _, err = run(capsys, "constants", "--config", str(cfg))
    assert code == 2 and "no_such_flag" in err
