import json

import pytest

from rhl.cli import main
from rhl.config import ExperimentConfig


def run_cli(args):
    return main(args)


def test_crho_table_golden(tmp_path):
    rc = run_cli(["--out", str(tmp_path), "crho-table"])
    assert rc == 0
    lines = (tmp_path / "crho_table.csv").read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "alpha1,alpha2,H1,H2,ell,convention,c_rho"
    rows = [ln for ln in lines if not ln.startswith(("#", "alpha1"))]
    assert len(rows) == 24
    # spot check one golden cell
    row = [r for r in rows if r.startswith("0.6,0.7,") and ",0.5," in r][0]
    assert abs(float(row.split(",")[-1]) - 0.3214) < 5e-4


def test_crho_table_linear_convention(tmp_path):
    rc = run_cli(["--out", str(tmp_path), "--convention", "linear", "crho-table"])
    assert rc == 0  # linear mode emits values without golden enforcement


def test_crho_table_broken_tolerance_fails(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tolerances": {"crho_cell_abs": 1e-12}}))
    rc = run_cli(["--config", str(cfg), "--out", str(tmp_path), "crho-table"])
    assert rc == 1


def test_kernel_converge_decreasing(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sweep_T": [100.0, 1000.0], "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "kernel-converge"])
    assert rc == 0
    body = (tmp_path / "kernel_converge.csv").read_text()
    assert "l2_cross" in body


def test_unknown_config_fields_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sve_n_paths": 100, "bogus_field": 1}))
    with pytest.raises(ValueError, match="unknown config fields"):
        ExperimentConfig.from_json(cfg)
    cfg.write_text(json.dumps({"limit": {"alpha1": 0.6, "alpha2": 0.8, "bogus": 2}}))
    with pytest.raises(ValueError, match="unknown limit-parameter"):
        ExperimentConfig.from_json(cfg)


def test_config_hash_stable(tmp_path):
    a = ExperimentConfig()
    b = ExperimentConfig()
    assert a.hash == b.hash
    c = ExperimentConfig(seed=1)
    assert c.hash != a.hash


def test_simulate_sve_summary_schema(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sve_n_paths": 200, "sve_log2_dt": 7,
                               "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "simulate-sve"])
    assert rc == 0
    lines = (tmp_path / "sve_ensemble.csv").read_text().splitlines()
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header.split(",") == ["t", "mean1", "mean2", "var1", "var2", "cov",
                                 "corr", "se_mean1", "se_mean2", "se_cov", "se_corr"]


def test_simulate_hawkes_metadata(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "hawkes": {"alpha1": 0.6, "alpha2": 0.8, "base1": 0.2, "base2": 0.2,
                   "cross_limit": 0.5, "family": "pareto"},
        "hawkes_T": 50.0, "hawkes_replications": 3, "out_dir": str(tmp_path),
    }))
    rc = run_cli(["--config", str(cfg), "simulate-hawkes"])
    assert rc == 0
    counts = (tmp_path / "hawkes_counts.csv").read_text()
    assert "seed" in counts and "approx_mode" in counts
    events = (tmp_path / "hawkes_events_rep0.csv").read_text()
    assert events.splitlines()[0].startswith("# seed:")
    assert "component,time" in events


def test_riccati_check_smoke(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sve_n_paths": 800, "sve_log2_dt": 8,
                               "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "riccati-check"])
    report = json.loads((tmp_path / "riccati_check.json").read_text())
    assert report["sign_convention"] == "as_written"
    assert rc == 0 and report["pass"]


def test_verify_subset_and_report(tmp_path):
    rc = run_cli(["--out", str(tmp_path), "verify", "--only", "criticality",
                  "crho_table", "range_41"])
    assert rc == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["pass"] is True
    names = {r["criterion"] for r in report["criteria"]}
    assert names == {"criticality", "crho_table", "range_41"}
    for rec in report["criteria"]:
        assert set(rec) == {"criterion", "quantity", "measured", "expected",
                            "tolerance", "pass"}


def test_verify_broken_tolerance_nonzero_exit(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tolerances": {"crho_cell_abs": 1e-9},
                               "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "verify", "--only", "crho_table"])
    assert rc == 1


def test_report_data_artifacts(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sweep_T": [100.0, 1000.0], "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "report-data"])
    assert rc == 0
    for name in ("kernel_hierarchy.csv", "decorrelation_curve.csv",
                 "kernel_converge.csv", "covariance_curve.csv"):
        assert (tmp_path / name).exists(), name
    hier = (tmp_path / "kernel_hierarchy.csv").read_text()
    assert "# exponent_k1: -0.40" in hier
    assert "# exponent_cross: +0.40" in hier


def test_crho_table_empty_couplings_header_only(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"crho_couplings": [], "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "crho-table"])
    assert rc == 0
    rows = [ln for ln in (tmp_path / "crho_table.csv").read_text().splitlines()
            if ln and not ln.startswith("#")]
    assert rows == ["alpha1,alpha2,H1,H2,ell,convention,c_rho"]


def test_simulate_sve_raw_paths(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"sve_n_paths": 50, "sve_log2_dt": 6,
                               "sve_emit_paths": 1, "out_dir": str(tmp_path)}))
    rc = run_cli(["--config", str(cfg), "simulate-sve"])
    assert rc == 0
    body = (tmp_path / "sve_path0.csv").read_text()
    assert "t,v1,v2,cross" in body
