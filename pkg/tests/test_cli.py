"""CLI harness: reproducibility, formats, report merging."""

import json

import pytest
from click.testing import CliRunner

from dcglab.cli import main
from dcglab.experiments import read_metrics


@pytest.fixture()
def runner():
    return CliRunner()


def test_probe_train_attack_pipeline(tmp_path, runner):
    d = tmp_path / "kb.dcgd"
    pt = tmp_path / "pt.csv"
    r = runner.invoke(main, ["probe-train", "--games", "shapes",
                             "--params", "20x4", "--dict", str(d),
                             "--out", str(pt), "--seed", "3"])
    assert r.exit_code == 0, r.output
    assert d.exists()
    meta, cols, rows = read_metrics(pt)
    assert meta["experiment"] == "probe-train"
    data = [row for row in rows if row[cols.index("stat")] == ""]
    assert len(data) == 1
    assert data[0][cols.index("bindings")] == "2"

    da = tmp_path / "da.csv"
    r = runner.invoke(main, ["attack", "--games", "shapes", "--params", "20x4",
                             "--runs", "5", "--dict", str(d),
                             "--out", str(da), "--seed", "4"])
    assert r.exit_code == 0, r.output
    meta, cols, rows = read_metrics(da)
    succ = [row[cols.index("success")] for row in rows
            if row[cols.index("stat")] == ""]
    assert succ == ["1"] * 5


def test_reproducible_outputs(tmp_path, runner):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (out1, out2):
        r = runner.invoke(main, ["guess", "--r", "1", "--trials", "50000",
                                 "--out", str(out), "--seed", "9"])
        assert r.exit_code == 0, r.output
    assert out1.read_bytes() == out2.read_bytes()

    # identical spec (same file names) in two directories
    (tmp_path / "one").mkdir()
    (tmp_path / "two").mkdir()
    for sub in ("one", "two"):
        r = runner.invoke(main, ["probe-train", "--games", "ships",
                                 "--params", "20x4",
                                 "--dict", str(tmp_path / sub / "k.dcgd"),
                                 "--out", str(tmp_path / sub / "p.csv"),
                                 "--seed", "12"])
        assert r.exit_code == 0, r.output
    assert (tmp_path / "one" / "k.dcgd").read_bytes() == \
        (tmp_path / "two" / "k.dcgd").read_bytes()
    assert (tmp_path / "one" / "p.csv").read_bytes() == \
        (tmp_path / "two" / "p.csv").read_bytes()


def test_json_format(tmp_path, runner):
    out = tmp_path / "g.json"
    r = runner.invoke(main, ["guess", "--r", "1,2", "--trials", "0",
                             "--out", str(out), "--format", "json"])
    assert r.exit_code == 0, r.output
    doc = json.loads(out.read_text())
    assert doc["format"] == "dcglab-metrics"
    by_r = {row[1]: row for row in doc["rows"]}
    assert by_r[1][8] == "1/900"
    assert by_r[2][8] == "1/356400"


def test_report_empty_input(runner):
    r = runner.invoke(main, ["report"])
    assert r.exit_code == 0
    assert "(empty table)" in r.output


def test_report_single_file_passthrough(tmp_path, runner):
    out = tmp_path / "g.csv"
    runner.invoke(main, ["guess", "--r", "1", "--trials", "0", "--out", str(out)])
    merged = tmp_path / "m.csv"
    r = runner.invoke(main, ["report", str(out), "--out", str(merged)])
    assert r.exit_code == 0, r.output
    meta, cols, rows = read_metrics(merged)
    assert len(rows) == 1
    assert rows[0][cols.index("experiment")] == "guess-baseline"
    assert rows[0][cols.index("analytic_exact")] == "1/900"


def test_report_merges_by_key(tmp_path, runner):
    f1, f2 = tmp_path / "v.csv", tmp_path / "r.csv"
    runner.invoke(main, ["vision-bench", "--games", "ships", "--params",
                         "20x4", "--runs", "2", "--out", str(f1), "--seed", "2"])
    runner.invoke(main, ["relay", "--games", "ships", "--params", "20x4",
                         "--trials", "5", "--out", str(f2), "--seed", "2"])
    r = runner.invoke(main, ["report", str(f1), str(f2)])
    assert r.exit_code == 0, r.output
    assert "vision-bench" in r.output and "relay-sweep" in r.output


def test_vision_bench_columns(tmp_path, runner):
    out = tmp_path / "v.csv"
    r = runner.invoke(main, ["vision-bench", "--games", "parking",
                             "--params", "20x4", "--runs", "3",
                             "--out", str(out), "--seed", "5"])
    assert r.exit_code == 0, r.output
    meta, cols, rows = read_metrics(out)
    data = [row for row in rows if row[cols.index("stat")] == ""]
    assert len(data) == 3
    for row in data:
        assert float(row[cols.index("bg_error_rate")]) < 0.07
        assert row[cols.index("mbr_center_inside")] == "1"
