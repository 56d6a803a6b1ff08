import json
import os
import re

import numpy as np
import pytest

from alphavi.harness.cli import main
from alphavi.harness.config import ConfigError, ExperimentConfig
from alphavi.harness.csvio import emit_csv, read_csv
from alphavi.harness.experiments import (BaselineRejected, gaussian_cell, run_gaussian, run_logreg,
                                         run_weight_collapse)
from alphavi.harness.plotting import render_plot
from alphavi.estimators import KINDS


def small_gaussian(tmp_path, **kw):
    base = dict(experiment="gaussian", estimators=["stl", "rws"], dims=[4], ks=[10, 20],
                steps=40, replicates=2, output_dir=str(tmp_path))
    base.update(kw)
    return ExperimentConfig(**base)


def toy_dataset(path, n=60, d=3, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X @ np.array([1.0, -0.5, 0.25])[:d] + rng.normal(size=n) > 0)
    with open(path, "w") as fh:
        for x, lab in zip(X, y):
            fh.write(("+1 " if lab else "-1 ") + " ".join(f"{j + 1}:{v:.6f}" for j, v in enumerate(x)) + "\n")
    return str(path)


def test_config_roundtrip(tmp_path):
    cfg = small_gaussian(tmp_path, alpha=0.3, seed=2**40 + 3)
    path = tmp_path / "c.json"
    cfg.to_json(path)
    assert ExperimentConfig.from_json(path) == cfg
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "gaussian", "bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig(steps=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(ks=[0])


def test_output_dir_env(monkeypatch):
    monkeypatch.setenv("ALPHAVI_OUT", "/tmp/somewhere")
    assert ExperimentConfig().output_dir == "/tmp/somewhere"


def test_csv_roundtrip(tmp_path):
    rows = [{"a": 1, "b": 0.1 + 0.2, "c": "x"}, {"a": 2, "b": 1e-300 / 3, "c": "y"}]
    path = emit_csv(rows, tmp_path / "r.csv")
    back = read_csv(path)
    assert [r["a"] for r in back] == [1, 2]
    np.testing.assert_allclose([r["b"] for r in back], [rows[0]["b"], rows[1]["b"]], rtol=1e-9)
    assert back[0]["b"] == rows[0]["b"]
    with pytest.raises(ValueError):
        emit_csv([], tmp_path / "empty.csv")
    assert not (tmp_path / "empty.csv").exists()


def test_emit_csv_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_csv([{"a": 1}], blocker / "sub" / "r.csv")


def test_run_gaussian_outputs(tmp_path):
    res = run_gaussian(small_gaussian(tmp_path))
    assert os.path.exists(res["files"]["traces"]) and os.path.exists(res["files"]["final"])
    final = read_csv(res["files"]["final"])
    assert len(final) == 2 * 2 * 2
    row = final[0]
    for col in ("opt_kl_exclusive", "opt_kl_inclusive", "opt_renyi_alpha", "opt_chi_squared",
                "target_optimum", "final_sigma_q2", "status"):
        assert col in row
    assert row["status"] == "ok"
    traces = read_csv(res["files"]["traces"])
    steps = [r["step"] for r in traces if r["estimator"] == "stl" and r["K"] == 10 and r["replicate"] == 0]
    assert steps == list(range(1, 41))


def test_determinism_and_replicate_independence(tmp_path):
    a = run_gaussian(small_gaussian(tmp_path / "a"))
    b = run_gaussian(small_gaussian(tmp_path / "b"))
    for key in ("traces", "final"):
        with open(a["files"][key], "rb") as fa, open(b["files"][key], "rb") as fb:
            assert fa.read() == fb.read()
    c = run_gaussian(small_gaussian(tmp_path / "c", replicates=4))
    first = [r for r in c["final"] if r["replicate"] < 2]
    assert sorted(first, key=str) == sorted(a["final"], key=str)


def test_parallel_matches_serial(tmp_path):
    a = run_gaussian(small_gaussian(tmp_path / "s"))
    b = run_gaussian(small_gaussian(tmp_path / "p", workers=2))
    with open(a["files"]["final"], "rb") as fa, open(b["files"]["final"], "rb") as fb:
        assert fa.read() == fb.read()


def test_timing_file_separate(tmp_path):
    res = run_gaussian(small_gaussian(tmp_path, record_timing=True, ks=[10], replicates=1))
    rows = read_csv(res["files"]["timings"])
    assert all(r["wall_ns"] > 0 for r in rows)
    assert "wall_ns" not in read_csv(res["files"]["traces"])[0]


SCORE_NOISE = pytest.mark.xfail(
    strict=True,
    reason="zero-mean score noise makes Adam wander more than 5% when the curvature is low (d=1)")


@pytest.mark.parametrize("d", [1, 50])
@pytest.mark.parametrize("tag", KINDS)
def test_already_optimal_stays_put(request, tmp_path, tag, d):
    if d == 1 and tag in ("renyi", "rws", "chivi"):
        request.applymarker(SCORE_NOISE)
    cfg = ExperimentConfig(steps=2000, output_dir=str(tmp_path))
    traces, final, _ = gaussian_cell(cfg, tag, d, 1000, 0, variances=np.full(d, 9.0))
    assert final["status"] == "ok"
    values = np.array([r["sigma_q2"] for r in traces])
    assert np.all(np.abs(values / 9.0 - 1) < 0.05)


def test_weight_collapse_runner(tmp_path):
    cfg = ExperimentConfig(experiment="weight-collapse", dims=[10], ks=[1, 50], replicates=3,
                           output_dir=str(tmp_path))
    res = run_weight_collapse(cfg)
    k1 = [r for r in res["spectra"] if r["K"] == 1]
    assert [r["weight"] for r in k1] == [1.0, 1.0, 1.0]
    k50 = [r for r in res["spectra"] if r["K"] == 50 and r["replicate"] == 0]
    assert len(k50) == 10
    assert [s["K"] for s in res["summary"]] == [1, 50]


def test_logreg_runner(tmp_path):
    data = toy_dataset(tmp_path / "toy")
    cfg = ExperimentConfig.for_experiment(
        "logreg", dataset_path=data, estimators=["stl", "chivi"], ks=[10], steps=200, replicates=1,
        hmc_warmup=200, hmc_samples=300, hmc_leapfrog_steps=8, loss_subsample=200,
        output_dir=str(tmp_path / "out"))
    res = run_logreg(cfg)
    assert res["dim"] == 4
    final = read_csv(res["files"]["final"])
    assert {r["estimator"] for r in final} == {"stl", "chivi"}
    assert all(r["status"] == "ok" for r in final)
    steps = [r["step"] for r in read_csv(res["files"]["traces"]) if r["estimator"] == "stl"]
    assert steps == [50, 100, 150, 200]
    params = [r for r in read_csv(res["files"]["params"]) if r["estimator"] == "stl" and r["block"] == "variance"]
    assert [r["rank"] for r in params] == [0, 1, 2, 3]
    base = [r["baseline"] for r in params]
    assert base == sorted(base)
    baseline = read_csv(res["files"]["baseline"])
    assert len(baseline) == 4 and all(r["rhat"] < 1.1 for r in baseline)

    # reusing the baseline gives identical finals
    again = run_logreg(cfg, baseline=res["baseline"])
    assert again["final"] == res["final"]


def test_logreg_baseline_rejection(tmp_path):
    data = toy_dataset(tmp_path / "toy")
    cfg = ExperimentConfig.for_experiment(
        "logreg", dataset_path=data, ks=[10], steps=10, hmc_warmup=20, hmc_samples=20,
        hmc_leapfrog_steps=2, max_rhat=0.5, output_dir=str(tmp_path / "out"))
    with pytest.raises(BaselineRejected):
        run_logreg(cfg)


def test_render_plot_structure(tmp_path):
    res = run_gaussian(small_gaussian(tmp_path, estimators=["stl"], replicates=1, ks=[10, 20, 40]))
    out = tmp_path / "fig.svg"
    render_plot(res["files"]["traces"], {"x": "step", "y": "sigma_q2", "group": "K",
                                         "baselines": [{"value": 5.59, "label": "KL(p||q)"}],
                                         "logy": True}, out)
    svg = out.read_text()
    assert svg.startswith("<?xml")
    assert len(re.findall(r'<g id="series-', svg)) == 3
    assert len(re.findall(r'<g id="baseline-', svg)) == 1
    baseline_block = svg[svg.index('<g id="baseline-0"'):]
    assert "stroke-dasharray" in baseline_block[:1500]
    with pytest.raises(ConfigError):
        render_plot(res["files"]["traces"], {"x": "step", "y": "nope"}, tmp_path / "x.svg")


def test_render_plot_deterministic(tmp_path):
    res = run_gaussian(small_gaussian(tmp_path, estimators=["stl"], replicates=1, ks=[10]))
    spec = {"baselines": [{"value": 5.0}]}
    render_plot(res["files"]["traces"], spec, tmp_path / "a.svg")
    render_plot(res["files"]["traces"], spec, tmp_path / "b.svg")
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def test_cli_oracle(capsys):
    assert main(["oracle", "--dim", "10"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("d,divergence,optimal_variance")
    rows = {line.split(",")[1]: float(line.split(",")[2]) for line in out[1:]}
    assert rows["kl-inclusive"] == pytest.approx(5.59)


def test_cli_runs_and_plots(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"estimators": ["stl"], "dims": [3], "replicates": 1, "steps": 999}))
    out = tmp_path / "out"
    assert main(["gaussian", "--config", str(cfg), "--steps", "15", "--k", "5,10",
                 "--seed", "4", "--out", str(out)]) == 0
    final = read_csv(out / "gaussian_final.csv")
    assert len(final) == 2
    saved = json.loads((out / "gaussian_config.json").read_text())
    assert saved["steps"] == 15 and saved["seed"] == 4 and saved["ks"] == [5, 10]
    assert main(["plot", str(out / "gaussian_traces.csv"), "--out", str(tmp_path / "p.svg"),
                 "--group", "K", "--filter", "estimator=stl", "--baseline", "5.59"]) == 0
    assert (tmp_path / "p.svg").exists()
    assert main(["collapse", "--dim", "5", "--k", "10", "--replicates", "2", "--out", str(out)]) == 0
    assert (out / "collapse_summary.csv").exists()
    assert main(["plot", str(out / "gaussian_traces.csv"), "--out", str(tmp_path / "q.svg"),
                 "--y", "missing"]) == 2
