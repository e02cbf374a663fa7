# tests/test_cli.py
"""
End-to-end tests of the command line front end
"""

import io
import json

import pandas as pd
import pytest
from pydantic import ValidationError

from src.cli import config_from_args, build_parser, main, parse_values
from src.core.config import ENUMERATION_CONFIG, MONTE_CARLO_CONFIG
from src.core.models import Command, ExperimentConfig


def run(tmp_path, *args, name="out.json"):
    """Run the CLI writing to a file; returns (exit code, file text or None)"""
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out.read_text(encoding="utf-8") if out.exists() else None


def cube_space(tmp_path, n=3, rho=0.5):
    path = tmp_path / "space.json"
    pair = {"support": [-1, 1], "probs": ["1/2", "1/2"], "coupling": {"kind": "resample", "rho": rho}}
    path.write_text(json.dumps({"pairs": [pair] * n}), encoding="utf-8")
    return path


# ===============================================
# Argument handling
# ===============================================

def test_parse_values():
    assert parse_values("0.1,0.5") == [0.1, 0.5]
    assert parse_values("1..3") == [1, 2, 3]
    assert parse_values(None) is None


def test_config_from_args():
    args = build_parser().parse_args(["decay", "--eps", "0.5", "--rho", "0.2,0.9", "--depth", "1..4",
                                      "--samples", "1e4"])
    config = config_from_args(args)
    assert config.command == Command.DECAY
    assert config.params["rho"] == [0.2, 0.9]
    assert config.params["depths"] == [1, 2, 3, 4]
    assert config.params["samples"] == 10000


@pytest.mark.parametrize("params", [
    {"rho": [1.5]},
    {"eps": 0.0, "rho": [0.5]},
    {"eps": 0.5, "delta": 0.6, "rho": [0.5]},
    {"eps": 0.5},
])
def test_experiment_config_validation(params):
    with pytest.raises(ValidationError):
        ExperimentConfig(command=Command.DECAY, params=params)


def test_invalid_rho_exits_with_two(tmp_path):
    code, _ = run(tmp_path, "analyze", "--fn", "named:maj3", "--rho", "1.5")
    assert code == 2


def test_missing_input_file_exits_with_two(tmp_path):
    code, _ = run(tmp_path, "maxcorr", "--space", str(tmp_path / "absent.json"))
    assert code == 2


# ===============================================
# Commands
# ===============================================

def test_analyze_maj3(tmp_path):
    code, text = run(tmp_path, "analyze", "--fn", "named:maj3", "--rho", "0.5")
    assert code == 0
    payload = json.loads(text)
    assert payload["stability"] == pytest.approx(0.40625)
    assert payload["d_lin"] == pytest.approx(0.25)
    assert payload["lemma_bound"] == pytest.approx(0.4375)
    assert payload["lemma_holds"] is True
    assert set(payload["coefficients"]) == {"1", "2", "4", "7"}


def test_analyze_writes_csv_to_stdout(capsys):
    code = main(["analyze", "--fn", "named:parity:3", "--rho", "0.5,0.9", "--format", "csv"])
    assert code == 0
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == ["rho", "stability", "d_lin", "lemma_bound", "lemma_holds"]
    assert frame["stability"].tolist() == pytest.approx([0.125, 0.729])


def test_decay_csv_reports_doubly_exponential(tmp_path):
    code, text = run(tmp_path, "decay", "--eps", "1", "--rho", "0.9", "--depth", "1..3",
                     "--format", "csv", name="decay.csv")
    assert code == 0
    frame = pd.read_csv(io.StringIO(text))
    assert frame["d"].tolist() == [1, 2, 3]
    assert frame["doubly_exponential"].tolist() == pytest.approx([0.81, 0.6561, 0.43046721])
    assert (frame["iterate_bound"] <= frame["closed_form"] + 1e-12).all()


def test_hierarchy_from_tree_file(tmp_path):
    tree = tmp_path / "tree.json"
    tree.write_text(json.dumps({
        "component": {"kind": "named", "name": "maj3"},
        "epsilon": 0.25,
        "children": [{"leaf": 0}, {"leaf": 1}, {"leaf": 2}],
    }), encoding="utf-8")
    code, text = run(tmp_path, "hierarchy", "--tree", str(tree), "--rho", "0.8")
    assert code == 0
    payload = json.loads(text)
    assert payload["passed"] is True and payload["depth"] == 1
    result = payload["results"][0]
    assert result["recursive"] == pytest.approx(0.728)
    assert result["exact"] == pytest.approx(0.728)
    assert result["decay"]["iterate_bound"] == pytest.approx(0.75 * 0.8 + 0.25 * 0.64)


def test_hierarchy_strict_certification_failure(tmp_path):
    code, _ = run(tmp_path, "hierarchy", "--builder", "majority-leak", "--depth", "1", "--rho", "0.5")
    assert code == 2
    code, text = run(tmp_path, "hierarchy", "--builder", "majority-leak", "--depth", "1",
                     "--rho", "0.5", "--no-strict")
    assert code == 0
    assert json.loads(text)["passed"] is False


def test_maxcorr_with_function(tmp_path):
    space = cube_space(tmp_path)
    code, text = run(tmp_path, "maxcorr", "--space", str(space), "--fn", "named:maj3")
    assert code == 0
    payload = json.loads(text)
    assert [row["maxcorr"] for row in payload["pairs"]] == pytest.approx([0.5] * 3)
    assert payload["non_separability"]["epsilon"] == pytest.approx(0.25)
    assert payload["lemma"]["holds"] is True


def test_es_with_contraction(tmp_path):
    code, text = run(tmp_path, "es", "--fn", "named:maj3", "--rho", "0.6")
    assert code == 0
    payload = json.loads(text)
    assert payload["components"]["7"]["norm_sq"] == pytest.approx(0.25)
    assert payload["degree_mass"][1] == pytest.approx(0.75)
    assert payload["contraction"]["holds"] is True


def test_es_capacity_exit_code(tmp_path, monkeypatch):
    monkeypatch.setitem(ENUMERATION_CONFIG, "max_es_coordinates", 2)
    code, _ = run(tmp_path, "es", "--fn", "named:maj3")
    assert code == 3


def test_percolation_csv_columns(tmp_path):
    code, text = run(tmp_path, "percolation", "--n", "2,3", "--rho", "0.5", "--samples", "2000",
                     "--format", "csv", name="perc.csv")
    assert code == 0
    frame = pd.read_csv(io.StringIO(text))
    assert list(frame.columns) == ["n", "rho", "samples", "estimate", "ci_low", "ci_high", "seed"]
    assert frame["n"].tolist() == [2, 3]


def test_percolation_output_ignores_workers(tmp_path, monkeypatch):
    monkeypatch.setitem(MONTE_CARLO_CONFIG, "block_size", 500)
    common = ["percolation", "--n", "4", "--rho", "0.7", "--samples", "3000", "--seed", "21",
              "--format", "csv"]
    _, serial = run(tmp_path, *common, "--workers", "1", name="a.csv")
    _, threaded = run(tmp_path, *common, "--workers", "4", name="b.csv")
    assert serial == threaded


def test_percolation_spectrum(tmp_path):
    code, text = run(tmp_path, "percolation", "--n", "2", "--mode", "spectrum")
    assert code == 0
    payload = json.loads(text)
    assert payload["profiles"][0]["mean"] == pytest.approx(0.0, abs=1e-12)
    assert len(payload["trend"]) == 1


# ===============================================
# Demos
# ===============================================

def test_majority_leak_demo(tmp_path):
    code, text = run(tmp_path, "demo", "--name", "majority-leak", "--depth", "2", "--rho", "0.5")
    assert code == 0
    payload = json.loads(text)
    assert payload["evaluation_check"] == {"inputs": 512, "mismatches": 0}
    assert payload["certification_passed"] is False
    floor = payload["floor"][0]["degree_one_floor"]
    assert payload["results"][0]["exact"] >= floor - 1e-12


def test_cos_arccos_demo(tmp_path):
    code, text = run(tmp_path, "demo", "--name", "cos-arccos", "--depth", "2")
    assert code == 0
    payload = json.loads(text)
    assert payload["max_abs_error_vs_x1"] < 1e-12
    assert payload["certification_passed"] is False


def test_parity_tree_demo(tmp_path):
    code, text = run(tmp_path, "demo", "--name", "parity-tree", "--depth", "2", "--rho", "0.8")
    assert code == 0
    row = json.loads(text)["results"][0]
    assert row["exact"] == pytest.approx(0.8 ** 4)
    assert row["recursive"] == pytest.approx(0.8 ** 4)
    assert row["doubly_exponential"] == pytest.approx(0.8 ** 4)


def test_numbered_demo_names_are_aliases(tmp_path):
    code, text = run(tmp_path, "demo", "--name", "example-1.4", "--depth", "2")
    assert code == 0
    payload = json.loads(text)
    assert payload["name"] == "majority-leak"
    assert payload["evaluation_check"] == {"inputs": 512, "mismatches": 0}
    assert payload["results"][0]["exact"] >= payload["floor"][0]["degree_one_floor"] - 1e-12

    code, text = run(tmp_path, "demo", "--name", "example-1.3", "--depth", "2", name="cos.json")
    assert code == 0
    assert json.loads(text)["max_abs_error_vs_x1"] < 1e-12
