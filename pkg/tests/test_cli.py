import json
import subprocess
import sys

import numpy as np
import numpy.testing as npt
import pytest

from auxsel import build_dag, graph_to_json, mixing_to_json, random_mixing, sample, random_spec
from auxsel.cli import main
from auxsel.fileio import read_csv_matrix, write_csv_matrix, write_json_atomic
from auxsel.scm import SampleMatrix
from auxsel.errors import FormatError

FIG1D = {
    "nodes": [
        {"id": 0, "label": "z1", "observed": False},
        {"id": 1, "label": "z2", "observed": True},
        {"id": 2, "label": "z3", "observed": False},
        {"id": 3, "label": "z4", "observed": True},
    ],
    "edges": [[0, 1], [2, 1], [3, 2]],
}


@pytest.fixture
def fig1d_path(tmp_path):
    path = tmp_path / "fig1d.json"
    path.write_text(json.dumps(FIG1D))
    return str(path)


# --- fileio -------------------------------------------------------------------

def test_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    matrix = SampleMatrix(data=rng.standard_normal((50, 3)), labels=("a", "b", "c"))
    path = tmp_path / "m.csv"
    write_csv_matrix(path, matrix)
    back = read_csv_matrix(path)
    assert back.labels == matrix.labels
    npt.assert_array_equal(back.data, matrix.data)


def test_csv_rejects_non_finite(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1.0,nan\n")
    with pytest.raises(FormatError):
        read_csv_matrix(path)


def test_csv_rejects_column_mismatch(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1.0,2.0\n")
    with pytest.raises(FormatError):
        read_csv_matrix(path)


# --- subcommands ----------------------------------------------------------------

def test_select_output(fig1d_path, capsys):
    assert main(["select", "--graph", fig1d_path]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload == {"chosen": ["z4"], "groups": [["z1"], ["z3"]], "group_count": 2}


def test_select_explain_lists_table(fig1d_path, capsys):
    assert main(["select", "--graph", fig1d_path, "--explain", "--no-prune"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["table"] == [
        {"subset": ["z2"], "group_count": 1},
        {"subset": ["z4"], "group_count": 2},
        {"subset": ["z2", "z4"], "group_count": 1},
    ]


def test_dsep_output(fig1d_path, capsys):
    assert main(["dsep", "--graph", fig1d_path, "--a", "z1", "--b", "z3", "--given", "z2"]) == 0
    assert capsys.readouterr().out == "d-separated: false\n"
    assert main(["dsep", "--graph", fig1d_path, "--a", "z1", "--b", "z3", "--given", "z4"]) == 0
    assert capsys.readouterr().out == "d-separated: true\n"


def test_partition_output(fig1d_path, capsys):
    assert main(["partition", "--graph", fig1d_path, "--given", "z4"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload == {"conditioning": ["z4"], "groups": [["z1"], ["z3"]]}


def test_simulate_deterministic(fig1d_path, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        assert main([
            "simulate", "--graph", fig1d_path, "--seed", "7", "--n", "500",
            "--out", str(out), "--spec-out", str(tmp_path / "spec.json"),
        ]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    spec_doc = json.loads((tmp_path / "spec.json").read_text())
    assert all(0.5 <= e["beta"] <= 1.0 for e in spec_doc["coefficients"])


def test_mix_roundtrip_via_cli(fig1d_path, tmp_path):
    z_path = tmp_path / "z.csv"
    assert main(["simulate", "--graph", fig1d_path, "--seed", "3", "--n", "200", "--out", str(z_path)]) == 0
    mix_path = tmp_path / "mix.json"
    write_json_atomic(mix_path, mixing_to_json(random_mixing("additive-coupling-stack", 4, 5)))
    x_path = tmp_path / "x.csv"
    back_path = tmp_path / "back.csv"
    assert main(["mix", "--spec", str(mix_path), "--in", str(z_path), "--out", str(x_path)]) == 0
    assert main(["mix", "--spec", str(mix_path), "--in", str(x_path), "--out", str(back_path), "--inverse"]) == 0
    npt.assert_allclose(
        read_csv_matrix(back_path).data, read_csv_matrix(z_path).data, atol=1e-10
    )


def test_check_rank_strict_exit(tmp_path, capsys):
    fork = build_dag(3, [(0, 1), (0, 2)], {0}, labels=("u", "a", "b"))
    graph_path = tmp_path / "fork.json"
    write_json_atomic(graph_path, graph_to_json(fork))
    spec_path = tmp_path / "spec.json"
    z_path = tmp_path / "z.csv"
    assert main(["simulate", "--graph", str(graph_path), "--seed", "2", "--n", "10",
                 "--out", str(z_path), "--spec-out", str(spec_path)]) == 0
    part_path = tmp_path / "part.json"
    assert main(["partition", "--graph", str(graph_path), "--given", "u",
                 "--out", str(part_path)]) == 0

    args = ["check-rank", "--graph", str(graph_path), "--spec", str(spec_path),
            "--partition", str(part_path), "--variant", "subtracted", "--samples", "8",
            "--seed", "1"]
    assert main(args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "violated"
    assert report["required_rank"] == 4
    assert "second-derivative" in report["degenerate_blocks"]
    assert main(args + ["--strict"]) == 1


def test_evaluate_cli(fig1d_path, tmp_path, capsys):
    z_path = tmp_path / "z.csv"
    assert main(["simulate", "--graph", fig1d_path, "--seed", "4", "--n", "1000", "--out", str(z_path)]) == 0
    report_path = tmp_path / "report.json"
    assert main(["evaluate", "--true", str(z_path), "--est", str(z_path), "--out", str(report_path)]) == 0
    report = json.loads(report_path.read_text())
    assert report["mcc"] == pytest.approx(1.0)
    assert report["permutation"] == [0, 1, 2, 3]
    assert report["config"]["entropy_base"] == 4
    assert len(report["correlation"]) == 4


def test_pipeline_bundle_and_determinism(fig1d_path, tmp_path, capsys):
    dirs = [tmp_path / "run1", tmp_path / "run2"]
    for d in dirs:
        assert main(["pipeline", "--graph", fig1d_path, "--seed", "7", "--n", "2000",
                     "--outdir", str(d)]) == 0
        capsys.readouterr()
    names = ["spec.json", "z.csv", "x.csv", "mixing.json", "partition.json", "rank.json", "report.json"]
    for name in names:
        a, b = dirs[0] / name, dirs[1] / name
        assert a.exists()
        assert a.read_bytes() == b.read_bytes(), f"{name} differs between runs"
    partition_doc = json.loads((dirs[0] / "partition.json").read_text())
    assert partition_doc == {"conditioning": ["z4"], "groups": [["z1"], ["z3"]]}
    report = json.loads((dirs[0] / "report.json").read_text())
    assert report["mcc"] >= 1.0 - 1e-9


def test_pipeline_fig1c_partition(tmp_path, capsys):
    fig1c = build_dag(5, [(2, 4), (2, 3), (4, 0), (4, 1), (4, 3)], {4})
    graph_path = tmp_path / "fig1c.json"
    write_json_atomic(graph_path, graph_to_json(fig1c))
    outdir = tmp_path / "bundle"
    assert main(["pipeline", "--graph", str(graph_path), "--seed", "3", "--n", "2000",
                 "--outdir", str(outdir)]) == 0
    partition_doc = json.loads((outdir / "partition.json").read_text())
    assert partition_doc == {
        "conditioning": ["z5"],
        "groups": [["z1"], ["z2"], ["z3", "z4"]],
    }


# --- error paths ------------------------------------------------------------------

def test_missing_file_exits_2(capsys):
    assert main(["select", "--graph", "does-not-exist.json"]) == 2
    assert "error:" in capsys.readouterr().err


def test_cycle_exits_1(tmp_path, capsys):
    path = tmp_path / "cyclic.json"
    path.write_text(json.dumps({
        "nodes": [{"id": 0, "label": "a", "observed": False},
                  {"id": 1, "label": "b", "observed": False}],
        "edges": [[0, 1], [1, 0]],
    }))
    assert main(["select", "--graph", str(path)]) == 1


def test_unknown_key_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    doc = dict(FIG1D)
    doc["comment"] = "nope"
    path.write_text(json.dumps(doc))
    assert main(["partition", "--graph", str(path)]) == 2


def test_malformed_json_exits_2(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["dsep", "--graph", str(path), "--a", "x", "--b", "y"]) == 2


def test_failed_command_writes_nothing(tmp_path, capsys):
    path = tmp_path / "cyclic.json"
    path.write_text(json.dumps({
        "nodes": [{"id": 0, "label": "a", "observed": False},
                  {"id": 1, "label": "b", "observed": False}],
        "edges": [[0, 1], [1, 0]],
    }))
    out = tmp_path / "out.json"
    assert main(["partition", "--graph", str(path), "--given", "", "--out", str(out)]) == 1
    assert not out.exists()


def test_unknown_label_is_domain_error(fig1d_path):
    assert main(["dsep", "--graph", fig1d_path, "--a", "zz", "--b", "z3"]) == 1


def test_env_seed_default(fig1d_path, tmp_path, monkeypatch):
    env_out = tmp_path / "env.csv"
    explicit_out = tmp_path / "explicit.csv"
    monkeypatch.setenv("AUXSEL_SEED", "123")
    assert main(["simulate", "--graph", fig1d_path, "--n", "50", "--out", str(env_out)]) == 0
    monkeypatch.delenv("AUXSEL_SEED")
    assert main(["simulate", "--graph", fig1d_path, "--seed", "123", "--n", "50",
                 "--out", str(explicit_out)]) == 0
    assert env_out.read_bytes() == explicit_out.read_bytes()


def test_console_entry_point(fig1d_path):
    proc = subprocess.run(
        [sys.executable, "-m", "auxsel.cli", "select", "--graph", fig1d_path],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["chosen"] == ["z4"]
