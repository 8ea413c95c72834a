import csv
import json

import numpy as np
import pytest

from aakit import io
from aakit.cli import main
from aakit.hull import exact_curvature_2d
from aakit.simplex import simplex_lsq


@pytest.fixture(autouse=True)
def _repro(monkeypatch):
    monkeypatch.setenv("AAKIT_WORKERS", "1")
    monkeypatch.delenv("AAKIT_SEED", raising=False)


@pytest.fixture
def poly(tmp_path):
    path = tmp_path / "poly.csv"
    assert main(["synth", "--kind", "polytope", "--n", "150", "--d", "8", "--k", "3",
                 "--seed", "2", "--out", str(path)]) == 0
    return path


def test_synth_polytope_points_inside_emitted_vertices(poly):
    x = io.read_csv(poly)
    truth = json.loads(poly.with_name("poly.csv.json").read_text())
    v = np.array(truth["vertices"]).T
    assert max(simplex_lsq(v, col).residual_norm for col in x.T) < 1e-8
    assert truth["manifest"]["command"] == "synth"


def test_synth_lowrank_exact_rank(tmp_path):
    out = tmp_path / "lr.bin"
    assert main(["synth", "--kind", "lowrank-noise", "--n", "60", "--d", "20", "--rank", "4",
                 "--noise", "0", "--format", "bin", "--out", str(out)]) == 0
    s = np.linalg.svd(io.read_binary(out), compute_uv=False)
    assert s[4] < 1e-10


def test_synth_regular_polygon(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["synth", "--kind", "polygon2d", "--k", "12", "--n", "12", "--out", str(out)]) == 0
    truth = json.loads((tmp_path / "p.csv.json").read_text())
    assert np.allclose(truth["kappa"], 1 / 12)
    assert np.allclose(exact_curvature_2d(io.read_csv(out)), truth["kappa"], atol=1e-12)


def test_synth_bad_kind(tmp_path):
    assert main(["synth", "--kind", "spiral", "--out", str(tmp_path / "x")]) == 2


def test_fit_exact_single_archetype(poly, tmp_path):
    out = tmp_path / "fit.json"
    assert main(["fit", "-i", str(poly), "--method", "exact", "--k", "1", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    x = io.read_csv(poly)
    # with k=1 the objective is the fit of every point by one archetype in conv(x)
    z = np.array(payload["model"]["archetypes"]).T
    assert payload["metrics"]["objective"] == pytest.approx(
        np.linalg.norm(x - z) / np.sqrt(x.shape[1]), rel=1e-12)
    best = simplex_lsq(x, x.mean(axis=1)).point
    assert np.linalg.norm(z[:, 0] - x @ best) < 1e-6


def test_fit_aaa_writes_metrics(poly, tmp_path):
    out, metrics = tmp_path / "fit.json", tmp_path / "m.csv"
    assert main(["fit", "-i", str(poly), "--method", "aaa", "--k", "3", "--rank", "4",
                 "--projections", "10000", "--eta", "0.003", "--out", str(out),
                 "--metrics", str(metrics)]) == 0
    rows = list(csv.DictReader(metrics.open()))
    assert rows[0]["method"] == "aaa" and rows[0]["M"] == "10000" and rows[0]["wall_ms"] == ""
    payload = json.loads(out.read_text())
    assert payload["manifest"]["timings"]["wall_ms"] is None
    assert payload["timings"] is None
    assert len(payload["manifest"]["input_digest"]) == 16


def test_fit_svd(poly, tmp_path):
    out = tmp_path / "fit.json"
    assert main(["fit", "-i", str(poly), "--method", "svd", "--k", "2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["metrics"]["p"] == 3


def test_fit_exit_codes(poly, tmp_path):
    assert main(["fit", "-i", str(tmp_path / "nope.csv"), "--k", "2"]) == 2
    assert main(["fit", "-i", str(poly), "--method", "aaa", "--k", "100", "--rank", "3",
                 "--eta", "0.5", "--projections", "1000", "--out", str(tmp_path / "o.json")]) == 3


def test_seed_env_override(poly, tmp_path, monkeypatch):
    monkeypatch.setenv("AAKIT_SEED", "77")
    out = tmp_path / "h.json"
    assert main(["hull", "-i", str(poly), "--seed", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 77


def test_hull_command(tmp_path):
    pts = tmp_path / "p.csv"
    main(["synth", "--kind", "polygon2d", "--profile", "0.4,0.3,0.2,0.1", "--n", "30", "--out", str(pts)])
    out = tmp_path / "h.json"
    assert main(["hull", "-i", str(pts), "--eta", "0.05", "--projections", "20000", "--hausdorff",
                 "--exact-2d", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert sorted(payload["T"]) == [0, 1, 2, 3]
    assert payload["hausdorff_estimate"] < 1e-8


def test_rsvd_command(tmp_path):
    src = tmp_path / "lr.bin"
    main(["synth", "--kind", "lowrank-noise", "--n", "80", "--d", "30", "--rank", "3",
          "--format", "bin", "--out", str(src)])
    out = tmp_path / "sk.bin"
    assert main(["rsvd", "-i", str(src), "--rank", "3", "--out", str(out)]) == 0
    side = json.loads((tmp_path / "sk.bin.json").read_text())
    assert io.read_binary(out).shape == (3, 80)
    assert side["spectral_error_estimate"] < 1e-8
    assert main(["rsvd", "-i", str(src), "--rank", "3", "--log-base", "2", "--out", str(out)]) == 0
    assert json.loads((tmp_path / "sk.bin.json").read_text())["s"] == 7


def _bench(tmp_path, spec):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    out = tmp_path / "bench.csv"
    code = main(["bench", "--spec", str(path), "--out", str(out)])
    rows = list(csv.DictReader(out.open())) if out.exists() else []
    return code, rows


def test_bench_p_sweep(tmp_path):
    code, rows = _bench(tmp_path, {"grid": {"method": ["aaa"], "k": [3], "p": [10, 20, 30], "M": [2000],
                                            "eta": [0.01]}, "repeat": 1,
                                   "data": {"kind": "lowrank-noise", "n": 120, "d": 40, "rank": 5,
                                            "noise": 0.1}})
    assert code == 0
    assert [r["p"] for r in rows] == ["10", "20", "30"]
    assert all(r["error"] == "" for r in rows)


def test_bench_repeats_give_one_row_per_run(tmp_path):
    code, rows = _bench(tmp_path, {"grid": {"method": ["aaa", "svd"], "k": [2], "p": [4], "M": [1000],
                                            "eta": [0.01]}, "repeat": 5,
                                   "data": {"kind": "polytope", "n": 60, "d": 6, "k": 3, "noise": 0.01}})
    assert code == 0
    assert len(rows) == 10
    assert {r["method"] for r in rows} == {"aaa", "svd"}
    assert len({r["objective"] for r in rows if r["method"] == "aaa"}) == 5


def test_bench_records_failures_per_row(tmp_path):
    code, rows = _bench(tmp_path, {"grid": {"method": ["aaa"], "k": [2, 500], "p": [3], "M": [1000],
                                            "eta": [0.5]}, "repeat": 1,
                                   "data": {"kind": "polytope", "n": 40, "d": 5, "k": 3}})
    assert code == 0
    assert rows[0]["error"] == "" and rows[1]["error"].startswith("ConfigError")


def test_bench_empty_grid(tmp_path):
    code, _ = _bench(tmp_path, {"grid": {"method": []}, "data": {"kind": "polytope", "n": 10, "d": 2, "k": 2}})
    assert code == 2
