import json
import os
import subprocess
import sys

import pytest

from hetcausal.cli import main


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(d), "--nodes", "3000", "--seed", "3", "--true-ate", "0.08"]) == 0
    return d


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_synth_writes_loadable_files(synth_dir):
    for f in ("nodes.tsv", "edges.tsv", "preds.tsv"):
        assert os.path.isfile(synth_dir / f)


def test_metrics_one_block_per_labeled_node(synth_dir, tmp_path):
    assert main(["metrics", "--graph-dir", str(synth_dir), "--out", str(tmp_path)]) == 0
    ind = (tmp_path / "indicators.tsv").read_text().splitlines()
    assert len(ind) == 1 + 3000
    prof = (tmp_path / "profiles.tsv").read_text().splitlines()
    # three relations, three aggregates and the projection row per node
    assert len(prof) == 1 + 3000 * 7


def test_metrics_rerun_byte_identical(synth_dir, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["metrics", "--graph-dir", str(synth_dir), "--out", str(a)]) == 0
    assert main(["metrics", "--graph-dir", str(synth_dir), "--out", str(b), "--threads", "4"]) == 0
    for f in ("profiles.tsv", "indicators.tsv"):
        assert _read(a / f) == _read(b / f)


def test_missing_edges_file(tmp_path, capsys):
    (tmp_path / "nodes.tsv").write_text("a\tpaper\t0\n")
    assert main(["metrics", "--graph-dir", str(tmp_path), "--out", str(tmp_path)]) == 2
    assert "edges.tsv" in capsys.readouterr().err


def test_parse_error_exit_code_names_line(tmp_path, capsys):
    (tmp_path / "nodes.tsv").write_text("a\tpaper\t0\nb\tpaper\t1\n")
    (tmp_path / "edges.tsv").write_text("a\tr\tb\na\tr\tzz\n")
    assert main(["metrics", "--graph-dir", str(tmp_path), "--out", str(tmp_path)]) == 2
    assert "edges.tsv:2" in capsys.readouterr().err


def test_audit_and_report(synth_dir, tmp_path):
    out = tmp_path / "audit"
    args = ["audit", "--graph-dir", str(synth_dir), "--out", str(out), "--bootstrap", "40", "--seed", "7"]
    assert main(args) == 0
    doc = json.loads((out / "effects.json").read_text())
    names = [p["name"] for p in doc["patterns"]]
    assert names == ["P1", "P2", "P3"]
    p1 = doc["patterns"][0]
    assert p1["pass"] is True
    dm = p1["effects"][0]
    assert dm["method"] == "diff_means"
    assert abs(dm["ate"] - 0.08) < 3 * dm["se"]
    md = (out / "patterns_report.md").read_text()
    assert "| P1: H_avg, D_min (11) |" in md
    csv_before = _read(out / "effects.csv")
    os.remove(out / "patterns_report.md")
    assert main(["report", "--out", str(out)]) == 0
    assert (out / "patterns_report.md").read_text() == md
    assert _read(out / "effects.csv") == csv_before


def test_audit_seed_twice_identical(synth_dir, tmp_path):
    for sub in ("a", "b"):
        args = ["audit", "--graph-dir", str(synth_dir), "--out", str(tmp_path / sub), "--bootstrap", "20", "--seed", "7"]
        assert main(args) == 0
    assert _read(tmp_path / "a" / "effects.json") == _read(tmp_path / "b" / "effects.json")


def test_adequacy_failure_still_exits_zero(synth_dir, tmp_path):
    args = ["audit", "--graph-dir", str(synth_dir), "--out", str(tmp_path), "--n-min", "100000", "--bootstrap", "5"]
    assert main(args) == 0
    doc = json.loads((tmp_path / "effects.json").read_text())
    assert all(not p["pass"] for p in doc["patterns"])
    assert "Adequacy failures" in (tmp_path / "patterns_report.md").read_text()


def test_negative_node_count(tmp_path):
    assert main(["synth", "--out", str(tmp_path), "--nodes", "-5"]) == 2


def test_bad_flag_value(tmp_path):
    assert main(["audit", "--alpha", "notanumber"]) == 2
    assert main(["audit", "--graph-dir", str(tmp_path), "--alpha", "1.5"]) == 2


def test_config_file_precedence(synth_dir, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# comment\ngraph-dir = {synth_dir}\nalpha = 0.01\nbootstrap = 10\nn_min = 50\n")
    out = tmp_path / "o"
    assert main(["audit", "--config", str(cfg), "--out", str(out), "--n-min", "40"]) == 0
    meta = json.loads((out / "effects.json").read_text())["meta"]
    assert meta["alpha"] == 0.01  # from the file
    assert meta["bootstrap"] == 10
    assert meta["n_min"] == 40  # the flag wins
    assert meta["s_min"] == 5  # default


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("colour = blue\n")
    assert main(["metrics", "--config", str(cfg)]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hetcausal.cli", "synth", "--out", str(tmp_path), "--nodes", "0"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "error" in proc.stderr
