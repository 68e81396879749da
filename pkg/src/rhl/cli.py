"""Experiment driver: every verification runs as a subcommand with config
ingestion, deterministic seeding, and CSV/JSON artifact emission.

Subcommands: crho-table, kernel-converge, simulate-hawkes, simulate-sve,
riccati-check, verify, report-data.  Flags: --config PATH, --seed N,
--out DIR, --threads N, --convention {linear,sqrt}; RHL_THREADS is the
fallback for --threads.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analytics import (Convention, LimitParams, calibrate_laplace_sign,
                        covariance_exact, decorrelation_constant,
                        laplace_functional_prediction, riccati_volterra_solve,
                        time_reverse)
from .config import ExperimentConfig
from .grid import GridFunction, write_csv
from .hawkes import events_to_csv, scale_parameters, simulate_hawkes
from .kernels import kernel_convergence_sweep, limit_cross_kernel
from .stats import EnsembleAccumulator, correlation_curve, loglog_slope
from .sve import MomentConsumer, build_scheme, monte_carlo_laplace, run_ensemble
from .verify import CRHO_COUPLINGS, CRHO_TABLE, run_verify


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_json(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out_dir"] = args.out
    if args.convention is not None:
        updates["convention"] = args.convention
    threads = args.threads or int(os.environ.get("RHL_THREADS", "0")) or cfg.threads
    updates["threads"] = threads
    return dataclasses.replace(cfg, **updates) if updates else cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_crho_table(cfg: ExperimentConfig) -> int:
    """Emit the decorrelation-constant table; exit 0 iff every cell under the
    sqrt convention matches the embedded reference values within 5e-4."""
    out = _outdir(cfg)
    conv = cfg.rho_convention
    tol = cfg.tolerances.get("crho_cell_abs", 5e-4)
    rows = []
    failures = []
    golden_lookup = {(a1, a2, ell): ref for a1, a2, refs in CRHO_TABLE
                     for ell, ref in zip(CRHO_COUPLINGS, refs)}
    for a1, a2, _ in CRHO_TABLE:
        for ell in cfg.crho_couplings:
            p = LimitParams(a1, a2, coupling=ell)
            val = decorrelation_constant(p, conv)
            rows.append((a1, a2, a1 - 0.5, a2 - 0.5, ell, cfg.convention, val))
            ref = golden_lookup.get((a1, a2, ell))
            if conv is Convention.SQRT and ref is not None and abs(val - ref) > tol:
                failures.append((a1, a2, ell, val, ref))
    path = out / "crho_table.csv"
    with open(path, "w") as fh:
        fh.write(f"# config_hash: {cfg.hash}\n")
        fh.write("alpha1,alpha2,H1,H2,ell,convention,c_rho\n")
        for r in rows:
            fh.write(",".join(f"{x:.12g}" if isinstance(x, float) else str(x) for x in r) + "\n")
    print(f"wrote {path}")
    if conv is Convention.SQRT and failures:
        for a1, a2, ell, val, ref in failures:
            print(f"MISMATCH ({a1},{a2},ell={ell}): got {val:.6f} want {ref:.6f}",
                  file=sys.stderr)
        return 1
    return 0


def cmd_kernel_converge(cfg: ExperimentConfig) -> int:
    """Run the renormalized-kernel convergence sweep; exit 0 iff every distance
    column is strictly decreasing in T."""
    out = _outdir(cfg)
    fam = cfg.sweep_family()
    rows = kernel_convergence_sweep(fam, cfg.sweep_T)
    path = out / "kernel_converge.csv"
    cols = ["T", "l2_self_1", "l2_self_2", "l2_cross", "l1_product"]
    with open(path, "w") as fh:
        fh.write(f"# config_hash: {cfg.hash}\n")
        fh.write(f"# family: {fam.family}\n")
        fh.write(",".join(cols) + "\n")
        for r in rows:
            fh.write(",".join(f"{r[c]:.12g}" for c in cols) + "\n")
    print(f"wrote {path}")
    ok = True
    for c in cols[1:]:
        vals = [r[c] for r in rows]
        if not all(a > b for a, b in zip(vals, vals[1:])):
            print(f"column {c} not strictly decreasing: {vals}", file=sys.stderr)
            ok = False
    return 0 if ok else 1


def cmd_simulate_hawkes(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg)
    base = cfg.hawkes_base()
    p = scale_parameters(base, cfg.hawkes_T)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.hawkes_replications)
    from .hawkes import replication_map
    from .verify import _count_worker

    args = [(p, int(s.generate_state(1)[0]), cfg.approx_mode, None) for s in seeds]
    results = replication_map(_count_worker, args, cfg.threads)
    counts = [(n1, n2) for n1, n2, _, _ in results]
    ev0 = simulate_hawkes(p, seed=int(seeds[0].generate_state(1)[0]),
                          approx_mode=cfg.approx_mode)
    events_to_csv(ev0, out / "hawkes_events_rep0.csv", p)
    path = out / "hawkes_counts.csv"
    with open(path, "w") as fh:
        fh.write(f"# config_hash: {cfg.hash}\n")
        fh.write(f"# T: {cfg.hawkes_T}\n# approx_mode: {cfg.approx_mode}\n")
        fh.write("replication,seed,T,approx_mode,count1,count2\n")
        for i, ((c1, c2), s) in enumerate(zip(counts, seeds)):
            fh.write(f"{i},{int(s.generate_state(1)[0])},{cfg.hawkes_T},"
                     f"{cfg.approx_mode},{c1},{c2}\n")
    print(f"wrote {path} ({len(counts)} replications)")
    return 0


def _ensemble_summary_csv(path, acc: EnsembleAccumulator, cfg: ExperimentConfig) -> None:
    rho, rho_se = correlation_curve(acc)
    cov = acc.covariance()
    with open(path, "w") as fh:
        fh.write(f"# config_hash: {cfg.hash}\n# seed: {cfg.seed}\n")
        fh.write(f"# n_paths: {acc.count}\n")
        fh.write("t,mean1,mean2,var1,var2,cov,corr,se_mean1,se_mean2,se_cov,se_corr\n")
        t = np.arange(acc.n_points) * acc.dt
        m1, m2 = acc.mean(1), acc.mean(2)
        v1, v2 = acc.variance(1), acc.variance(2)
        se1, se2 = acc.mean_stderr(1), acc.mean_stderr(2)
        se_cov = acc.covariance_stderr()
        for k in range(acc.n_points):
            fh.write(
                f"{t[k]:.12g},{m1[k]:.12g},{m2[k]:.12g},{v1[k]:.12g},{v2[k]:.12g},"
                f"{cov[k]:.12g},{rho[k]:.12g},{se1[k]:.12g},{se2[k]:.12g},"
                f"{se_cov[k]:.12g},{rho_se[k]:.12g}\n"
            )


def cmd_simulate_sve(cfg: ExperimentConfig) -> int:
    out = _outdir(cfg)
    p = cfg.limit_params()
    dt = 2.0 ** -cfg.sve_log2_dt
    n = int(round(1.0 / dt))
    scheme = build_scheme(p, dt, n)
    moments = MomentConsumer(scheme)
    run_ensemble(p, scheme, cfg.sve_n_paths, cfg.seed, [moments])
    path = out / "sve_ensemble.csv"
    _ensemble_summary_csv(path, moments.acc, cfg)
    print(f"wrote {path} ({cfg.sve_n_paths} paths)")
    from .sve import simulate_pair
    for i in range(cfg.sve_emit_paths):
        sp = simulate_pair(p, scheme, seed=cfg.seed + 10_000 + i)
        ppath = out / f"sve_path{i}.csv"
        with open(ppath, "w") as fh:
            fh.write(f"# config_hash: {cfg.hash}\n# seed: {sp.seed}\n")
            fh.write("t,v1,v2,cross\n")
            tgrid = sp.v1.t
            for k in range(len(sp.v1)):
                fh.write(f"{tgrid[k]:.12g},{sp.v1.values[k]:.12g},"
                         f"{sp.v2.values[k]:.12g},{sp.cross_term.values[k]:.12g}\n")
        print(f"wrote {ppath}")
    return 0


def cmd_riccati_check(cfg: ExperimentConfig) -> int:
    """Monte-Carlo Laplace functional against the deterministic prediction."""
    out = _outdir(cfg)
    p = cfg.limit_params()
    dt = 2.0 ** -cfg.sve_log2_dt
    n = int(round(1.0 / dt))
    scheme = build_scheme(p, dt, n)
    b1 = GridFunction(dt, np.full(n + 1, p.level1))
    b2 = GridFunction(dt, np.full(n + 1, p.level2))
    u = GridFunction(dt, np.full(n, 0.5))
    mc, se = monte_carlo_laplace(p, u, scheme, cfg.sve_n_paths, cfg.seed, b1=b1, b2=b2)
    dtf = 2.0 ** -13
    nf = int(round(1.0 / dtf))
    psi = riccati_volterra_solve(p.kernel(1), GridFunction(dtf, np.full(nf, 0.5)))
    sign = calibrate_laplace_sign()
    pred = laplace_functional_prediction(time_reverse(psi),
                                         GridFunction(dtf, np.full(nf, p.level1)), sign)
    report = {
        "config_hash": cfg.hash,
        "seed": cfg.seed,
        "sign_convention": sign.value,
        "mc_estimate": mc,
        "mc_stderr": se,
        "prediction": pred,
        "sigmas": abs(mc - pred) / se if se > 0 else float("nan"),
        "pass": bool(abs(mc - pred) <= 3.0 * se),
    }
    path = out / "riccati_check.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {path} (|dev| = {report['sigmas']:.2f} se)")
    return 0 if report["pass"] else 1


def cmd_verify(cfg: ExperimentConfig, only=None) -> int:
    out = _outdir(cfg)
    records, all_ok = run_verify(cfg, only=only)
    report = {
        "config_hash": cfg.hash,
        "seed": cfg.seed,
        "criteria": records,
        "pass": bool(all_ok),
    }
    path = out / "verify_report.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    n_ok = sum(1 for r in records if r["pass"])
    print(f"wrote {path}: {n_ok}/{len(records)} checks passed")
    for r in records:
        if not r["pass"]:
            print(f"FAIL {r['criterion']}/{r['quantity']}: measured={r['measured']:.6g} "
                  f"expected={r['expected']:.6g} tol={r['tolerance']:.3g}",
                  file=sys.stderr)
    return 0 if all_ok else 1


def cmd_report_data(cfg: ExperimentConfig) -> int:
    """Emit the CSV artifacts the figure renderer consumes."""
    out = _outdir(cfg)
    p = cfg.limit_params()
    dt = 2.0 ** -10
    n = 1024

    # kernel regularity hierarchy: K1, K2, K1*K2 with their exponents
    k1 = p.kernel(1).grid(dt, n)
    k2 = p.kernel(2).grid(dt, n)
    l12 = limit_cross_kernel(cfg.sweep_family(), dt, n)
    path = out / "kernel_hierarchy.csv"
    with open(path, "w") as fh:
        fh.write(f"# config_hash: {cfg.hash}\n")
        fh.write(f"# exponent_k1: {p.alpha1 - 1.0:+.2f}\n")
        fh.write(f"# exponent_k2: {p.alpha2 - 1.0:+.2f}\n")
        fh.write(f"# exponent_cross: {p.alpha1 + p.alpha2 - 1.0:+.2f}\n")
        fh.write("t,k1,k2,cross\n")
        for k in range(1, n):
            fh.write(f"{k * dt:.12g},{k1.values[k]:.12g},{k2.values[k]:.12g},"
                     f"{l12.values[k]:.12g}\n")
    print(f"wrote {path}")

    # decorrelation curve (stationary theory) with the asymptote metadata
    from .analytics import correlation_curve_theory
    rho = correlation_curve_theory(p, dt, n, stationary=True)
    c_rho = decorrelation_constant(p, cfg.rho_convention)
    path = out / "decorrelation_curve.csv"
    with open(path, "w") as fh:
        fh.write(f"# config_hash: {cfg.hash}\n")
        fh.write(f"# slope: {p.alpha1}\n# c_rho: {c_rho:.12g}\n")
        fh.write(f"# convention: {cfg.convention}\n")
        fh.write("t,rho\n")
        for k in range(1, n + 1):
            fh.write(f"{k * dt:.12g},{rho.values[k]:.12g}\n")
    print(f"wrote {path}")

    # convergence sweep
    rc = cmd_kernel_converge(cfg)

    # covariance curve
    cov = covariance_exact(p, dt, n)
    path = out / "covariance_curve.csv"
    write_csv(cov, path, metadata={"config_hash": cfg.hash, "kind": "covariance"})
    print(f"wrote {path}")

    # slope report consumed by the figure annotations
    from .stats import slope_record
    lo, hi = int(round(1e-2 / dt)), int(round(1e-1 / dt))
    t = np.arange(n + 1) * dt
    s, se = loglog_slope(t[lo:hi + 1], rho.values[lo:hi + 1])
    report = [slope_record("decorrelation_theory_curve", [1e-2, 1e-1], s, se,
                           p.alpha1, 0.15)]
    path = out / "slope_report.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {path}")
    return rc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rhl",
        description="bivariate nearly-unstable Hawkes / rough Volterra verification toolkit",
    )
    parser.add_argument("--config", help="JSON config path")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--convention", choices=("linear", "sqrt"), default=None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("crho-table", "kernel-converge", "simulate-hawkes", "simulate-sve",
                 "riccati-check", "report-data"):
        sub.add_parser(name)
    pv = sub.add_parser("verify")
    pv.add_argument("--only", nargs="*", default=None,
                    help="restrict to the named criteria")
    args = parser.parse_args(argv)
    cfg = _load_config(args)
    dispatch = {
        "crho-table": cmd_crho_table,
        "kernel-converge": cmd_kernel_converge,
        "simulate-hawkes": cmd_simulate_hawkes,
        "simulate-sve": cmd_simulate_sve,
        "riccati-check": cmd_riccati_check,
        "report-data": cmd_report_data,
    }
    if args.command == "verify":
        return cmd_verify(cfg, only=args.only)
    return dispatch[args.command](cfg)


if __name__ == "__main__":
    raise SystemExit(main())
