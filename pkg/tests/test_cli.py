import csv
import json
import os

import pytest

from riskrank.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture()
def dataset(tmp_path):
    """Small synthetic dataset shared by the pipeline tests."""
    out = tmp_path / "loans.csv"
    code = run(
        "synth", "--out", out, "--loans", 400, "--products", 3, "--districts", 3,
        "--span-months", 18, "--base-rate", "0.2", "--seed", 5,
    )
    assert code == 0
    return out


def read_error(capsys):
    err = capsys.readouterr().err.strip()
    assert "\n" not in err, "errors must be a single line"
    return json.loads(err)


def test_synth_writes_csv_and_manifest(dataset, tmp_path):
    rows = list(csv.DictReader(open(dataset)))
    assert len(rows) == 400
    manifest = json.loads((tmp_path / "loans.manifest.json").read_text())
    assert manifest["command"] == "synth"
    assert manifest["parameters"]["seed"] == 5
    assert manifest["n_records"] == 400


def test_synth_is_reproducible(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert run("synth", "--out", out, "--loans", 50, "--span-months", 12,
                   "--seed", 11) == 0
    assert a.read_bytes() == b.read_bytes()


def test_synth_from_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "n_loans": 30, "n_products": 2, "n_districts": 2,
        "span_months": 12, "base_default_rate": 0.3, "seed": 1,
    }))
    out = tmp_path / "from_cfg.csv"
    assert run("synth", "--config", cfg, "--out", out) == 0
    assert len(list(csv.DictReader(open(out)))) == 30


def test_score_pipeline(dataset, tmp_path):
    out_dir = tmp_path / "scores"
    code = run("score", "--records", dataset, "--out-dir", out_dir,
               "--window-months", 6)
    assert code == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["version"]
    assert manifest["parameters"]["window_months"] == 6
    assert len(manifest["windows"]) == 13
    solved = [w for w in manifest["windows"] if not w["skipped"]]
    assert solved, "expected at least one solved window"
    for w in solved:
        path = out_dir / f"scores_w{w['index']:03d}.csv"
        assert path.exists()
        rows = list(csv.DictReader(open(path)))
        total = sum(float(r["score"]) for r in rows if r["layer_or_sum"] == "sum")
        assert abs(total - 1.0) < 1e-9


def test_series_cluster_compare_pipeline(dataset, tmp_path):
    series_dir = tmp_path / "series"
    assert run("series", "--records", dataset, "--out-dir", series_dir,
               "--window-months", 6) == 0
    series_csv = series_dir / "series.csv"
    assert series_csv.exists()

    cluster_dir = tmp_path / "clusters"
    assert run("cluster", "--series", series_csv, "--kind", "product",
               "--k", 2, "--out-dir", cluster_dir, "--seed", 3) == 0
    rows = list(csv.DictReader(open(cluster_dir / "clusters.csv")))
    assert {r["node_kind"] for r in rows} == {"product"}
    assert {r["cluster_id"] for r in rows} <= {"0", "1"}
    manifest = json.loads((cluster_dir / "manifest.json").read_text())
    assert manifest["chosen_k"] == 2

    elbow_dir = tmp_path / "elbow"
    assert run("cluster", "--series", series_csv, "--kind", "district",
               "--k-range", "1:3", "--out-dir", elbow_dir) == 0
    curve = list(csv.DictReader(open(elbow_dir / "inertia_curve.csv")))
    assert [r["k"] for r in curve] == ["1", "2", "3"]

    # pick a pair that actually occurs
    pair_row = next(csv.DictReader(open(dataset)))
    compare_dir = tmp_path / "pair"
    assert run("compare", "--records", dataset, "--series", series_csv,
               "--manifest", series_dir / "manifest.json",
               "--district", pair_row["district"], "--product", pair_row["product"],
               "--out-dir", compare_dir) == 0
    name = f"pair_{pair_row['district']}_{pair_row['product']}.csv"
    pair_rows = list(csv.DictReader(open(compare_dir / name)))
    assert len(pair_rows) == 13
    assert set(pair_rows[0]) == {
        "window_index", "score_district", "score_product", "score_sum", "default_rate",
    }


def test_validation_errors_exit_2(dataset, tmp_path, capsys):
    code = run("cluster", "--series", tmp_path / "missing.csv", "--k", 2,
               "--k-range", "1:3", "--out-dir", tmp_path / "x")
    assert code == 2
    assert read_error(capsys)["error"] == "validation"

    code = run("score", "--records", dataset, "--out-dir", tmp_path / "y",
               "--window-months", 0)
    assert code == 2

    code = run("synth", "--out", tmp_path / "z.csv", "--base-rate", "9")
    assert code == 2


def test_unknown_flag_exits_2_with_json_error(capsys):
    assert run("score", "--bogus") == 2
    assert read_error(capsys)["error"] == "validation"


def test_io_errors_exit_4(tmp_path, capsys):
    code = run("score", "--records", tmp_path / "nope.csv",
               "--out-dir", tmp_path / "out")
    assert code == 4
    assert read_error(capsys)["error"] == "io"


def test_convergence_errors_exit_3(dataset, tmp_path, capsys):
    out_dir = tmp_path / "never"
    code = run("score", "--records", dataset, "--out-dir", out_dir,
               "--window-months", 6, "--max-iter", 1)
    assert code == 3
    assert read_error(capsys)["error"] == "convergence"
    assert not out_dir.exists(), "failed runs must not leave partial outputs"


def test_outputs_are_staged_until_success(dataset, tmp_path, capsys):
    out_dir = tmp_path / "staged"
    code = run("compare", "--records", dataset,
               "--series", tmp_path / "missing_series.csv",
               "--manifest", tmp_path / "missing_manifest.json",
               "--district", "D01", "--product", "P01", "--out-dir", out_dir)
    assert code != 0
    assert not out_dir.exists()
    assert not list(tmp_path.glob(".stage-*")), "stage dirs must be cleaned up"


def test_out_dir_env_default(dataset, tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("RISKRANK_OUT", str(target))
    assert run("series", "--records", dataset, "--window-months", 6) == 0
    assert (target / "series.csv").exists()


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        run("--version")
    assert exc.value.code == 0
    assert capsys.readouterr().out.startswith("riskrank ")
