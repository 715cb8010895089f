import csv
import json
import subprocess
import sys

import pytest

from dealer_sim.analysis import predicted_drift, read_tick_csv, trend_report
from dealer_sim.cli import main, manifest_path
from dealer_sim.engine import run
from dealer_sim.params import RunConfig
from dealer_sim.scenarios import preset

SHORT = ["--set", "target_deals=1500"]


def test_simulate_writes_csv_and_manifest(tmp_path, capsys):
    out = tmp_path / "out.csv"
    assert main(["simulate", "--preset", "fig4-baseline", "--seed", "7", "-o", str(out)] + SHORT) == 0
    header = out.read_text().splitlines()[0]
    assert header == "deal_index,step,price,buyer,n_sellers,mu_n,sum_bids"
    manifest = json.loads(manifest_path(out).read_text())
    assert manifest["config"]["seed"] == 7
    assert manifest["rng_algorithm"].startswith("xoshiro256")
    config = RunConfig.from_dict(manifest["config"])
    assert run(config).final_state_digest == manifest["final_state_digest"]


def test_simulate_override_recorded(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["simulate", "--preset", "fig5-up", "--set", "eps_buyer=0.002", "-o", str(out)]
                + SHORT) == 0
    manifest = json.loads(manifest_path(out).read_text())
    assert manifest["config"]["eps_buyer"] == 0.002
    assert manifest["overrides"]["eps_buyer"] == 0.002


def test_simulate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert main(["simulate", "--preset", "fig7-unpremeditated", "-o", str(path)] + SHORT) == 0
    assert a.read_bytes() == b.read_bytes()


def test_manifest_reproduces_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--preset", "fig8-omega", "--seed", "3", "-o", str(a)] + SHORT) == 0
    assert main(["simulate", "--config", str(manifest_path(a)), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_seed_priority(tmp_path, monkeypatch):
    monkeypatch.setenv("DEALER_SIM_SEED", "41")
    out = tmp_path / "o.csv"
    assert main(["simulate", "--preset", "fig4-baseline", "-o", str(out)] + SHORT) == 0
    assert json.loads(manifest_path(out).read_text())["config"]["seed"] == 41
    assert main(["simulate", "--preset", "fig4-baseline", "--seed", "2", "-o", str(out)] + SHORT) == 0
    assert json.loads(manifest_path(out).read_text())["config"]["seed"] == 2


@pytest.mark.parametrize("argv", [
    ["simulate", "--preset", "nope"],
    ["simulate", "--preset", "fig4-baseline", "--set", "greed=2.0"],
    ["simulate", "--preset", "fig4-baseline", "--set", "colour=red"],
    ["simulate"],
])
def test_simulate_invalid_config_exit_2(argv, tmp_path):
    assert main(argv + ["-o", str(tmp_path / "x.csv")]) == 2


def test_simulate_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"policy": "baseline", "wobble": 1}))
    assert main(["simulate", "--config", str(cfg), "-o", str(tmp_path / "x.csv")]) == 2


def test_simulate_io_failure_exit_3(tmp_path):
    out = tmp_path / "missing_dir" / "x.csv"
    assert main(["simulate", "--preset", "fig4-baseline", "-o", str(out)] + SHORT) == 3


def test_sweep_outputs(tmp_path):
    rc = main(["sweep", "--preset", "fig8-gamma", "--eps=-0.015,0.015", "--seeds", "1,2,3",
               "-o", str(tmp_path), "--set", "target_deals=800", "-j", "2"])
    assert rc == 0
    csvs = sorted(p.name for p in tmp_path.glob("fig8-gamma_eps*_seed*.csv"))
    assert len(csvs) == 6
    assert "fig8-gamma_eps-0.015_seed1.csv" in csvs
    with open(tmp_path / "fig8-gamma_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 6
    # each summary row equals a report recomputed from its CSV and manifest
    for row in rows:
        path = tmp_path / row["csv"]
        manifest = json.loads(manifest_path(path).read_text())
        table = read_tick_csv(path, manifest["initial_sum_bids"])
        rep = trend_report(table, predicted_drift(RunConfig.from_dict(manifest["config"]).params))
        assert float(row["ols_slope"]) == rep.ols_slope
        assert float(row["detrended_range"]) == rep.detrended_range
        assert float(row["conservation_residual"]) == rep.conservation_residual
        assert int(row["n_deals"]) == rep.n_deals == 800


def test_sweep_empty_eps_exit_2(tmp_path):
    assert main(["sweep", "--preset", "fig8-gamma", "--eps", "", "--seeds", "1",
                 "-o", str(tmp_path)]) == 2


def test_sweep_partial_failure_exit_1(tmp_path):
    # eps_buyer=0.5 with eps_seller=0.1 is not a valid premeditated direction
    rc = main(["sweep", "--preset", "fig5-up", "--eps=-0.002,0.5", "--seeds", "1,2",
               "--set", "eps_seller=0.1", "--set", "target_deals=200", "-o", str(tmp_path)])
    assert rc == 1
    with open(tmp_path / "fig5-up_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["status"] for r in rows] == ["ok", "ok", "failed", "failed"]
    assert len(list(tmp_path.glob("fig5-up_eps*.csv"))) == 2


def test_analyze_round_trip(tmp_path, capsys):
    out = tmp_path / "o.csv"
    assert main(["simulate", "--preset", "fig4-baseline", "--seed", "5", "-o", str(out)] + SHORT) == 0
    capsys.readouterr()
    assert main(["analyze", str(out), "--json"]) == 0
    printed = capsys.readouterr().out.splitlines()
    record = json.loads(printed[-1])
    config = preset("fig4-baseline").config
    series = run(config.replace(params=config.params.replace(seed=5), target_deals=1500))
    assert record == trend_report(series).to_dict()
    assert record["conservation_residual"] < 1e-6
    assert any(line.startswith("conservation_residual") for line in printed)


def test_analyze_external(tmp_path, capsys):
    p = tmp_path / "ext.csv"
    p.write_text("tick,price\n" + "\n".join(f"{i},{100 + 0.01 * i}" for i in range(50)))
    assert main(["analyze", "--external", str(p)]) == 0
    text = capsys.readouterr().out
    assert "ols_slope" in text
    assert "conservation_residual  n/a" in text


def test_analyze_missing_file_exit_2(tmp_path):
    assert main(["analyze", str(tmp_path / "nope.csv")]) == 2


def test_analyze_malformed_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.csv"
    p.write_text("deal_index,step,price,buyer,n_sellers,mu_n,sum_bids\n1,0,x,0,1,1.0,0.0\n")
    assert main(["analyze", str(p)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "dealer_sim", "simulate", "--preset", "fig4-baseline",
         "-o", str(out), "--set", "target_deals=100"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(out.read_text().splitlines()) == 101
