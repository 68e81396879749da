"""The verification registry: every headline check runs through here, both
for the ``verify`` subcommand and for the acceptance test suite.

Each criterion function returns a list of records
``{criterion, quantity, measured, expected, tolerance, pass}``; measured
quantities are pure functions of (config, seed).  Expensive ensembles are
built once in a shared :class:`VerifyContext` and reused across criteria.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytics import (Convention, LaplaceSign, LimitParams, calibrate_laplace_sign,
                        covariance_exact, criticality_determinant, decorrelation_constant,
                        laplace_functional_prediction, mean_profile, product_vs_triple_ratio,
                        riccati_volterra_solve, time_reverse)
from .config import ExperimentConfig
from .grid import GridFunction, convolve, l2_shift_modulus
from .hawkes import (HawkesBase, mean_intensity_bounds, replication_map,
                     scale_parameters, simulate_hawkes, renormalized_value)
from .kernels import (MittagLefflerKernel, PreLimitFamily, kernel_convergence_sweep,
                      limit_covariance, renormalized_cross_kernel,
                      renormalized_self_kernel)
from .mittag import gamma
from .stats import correlation_curve, loglog_slope
from .sve import (IncrementConsumer, LaplaceConsumer, MomentConsumer,
                  build_scheme, run_ensemble)

# Reference values of the decorrelation-constant table (sqrt-coupling
# convention, unit scales and levels), columns coupling = 0.25, 0.50, 0.75.
CRHO_TABLE = [
    (0.55, 0.65, (0.1742, 0.2463, 0.3016)),
    (0.55, 0.80, (0.1778, 0.2514, 0.3079)),
    (0.60, 0.70, (0.2273, 0.3214, 0.3936)),
    (0.60, 0.85, (0.2238, 0.3165, 0.3876)),
    (0.65, 0.75, (0.2547, 0.3602, 0.4412)),
    (0.70, 0.80, (0.2682, 0.3792, 0.4645)),
    (0.75, 0.90, (0.2682, 0.3792, 0.4645)),
    (0.80, 0.95, (0.2660, 0.3762, 0.4608)),
]
CRHO_COUPLINGS = (0.25, 0.50, 0.75)

DEFAULT_TOLERANCES = {
    "crho_cell_abs": 5e-4,
    "range41_abs": 0.01,
    "cross_asymptote_rel": 0.02,
    "product_triple_rel": 0.02,
    "sweep_min_ratio": 5.0,
    "self_slope_target": 0.2,
    "self_slope_tol": 0.05,
    "cross_slope_target": 1.8,
    "cross_slope_tol": 0.1,
    "mean_cov_sigmas": 3.0,
    "decorr_slope_tol": 0.15,
    "increment_cross_tol": 0.15,
    "increment_self_tol": 0.1,
    "laplace_sigmas": 3.0,
    "hawkes_bound_sigmas": 3.0,
    "trend_final_rel": 0.5,
}

# frozen shift-modulus reference configurations (deterministic)
SHIFT_SELF = dict(alpha=0.6, lam=1.0, T=1e4, scale=8.0, log2_dt=20, t_max=2.0,
                  lags=(1 << 12, 1 << 13, 1 << 14, 1 << 15))
SHIFT_CROSS = dict(alpha1=0.6, alpha2=0.8, lam=1.0, T=1e4, scale=4.0,
                   cross_rate=0.01, cross_limit=0.5, log2_dt=19, t_max=16.0,
                   lags=(1 << 10, 1 << 11, 1 << 12, 1 << 13))

# Hawkes -> limit trend reference (approximation mode).  The covariance of the
# renormalized pair scales like coupling/base2, so a small baseline buys cheap
# replications at constant signal-to-noise; the local window average around
# t = 0.5 sharpens the estimate (the quadrature target is averaged identically).
TREND = dict(base=0.05, cross_limit=1.5, T_values=(100.0, 300.0, 1000.0),
             t_unit=0.5, window=(0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65),
             n_reps=80000)


@dataclass
class Record:
    criterion: str
    quantity: str
    measured: float
    expected: float
    tolerance: float
    ok: bool

    def as_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "quantity": self.quantity,
            "measured": self.measured,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "pass": bool(self.ok),
        }


def _rec(criterion, quantity, measured, expected, tol, ok=None) -> Record:
    if ok is None:
        ok = abs(measured - expected) <= tol
    return Record(criterion, quantity, float(measured), float(expected), float(tol), bool(ok))


@dataclass
class VerifyContext:
    """Lazily built shared artifacts (ensembles, schemes, profiles)."""

    cfg: ExperimentConfig
    _cache: dict = field(default_factory=dict)

    @property
    def tol(self) -> dict:
        merged = dict(DEFAULT_TOLERANCES)
        merged.update(self.cfg.tolerances)
        return merged

    def profile_ensemble(self):
        """Reference SVE ensemble with the injected drift profiles."""
        if "profile" not in self._cache:
            p = self.cfg.limit_params()
            dt = 2.0 ** -self.cfg.sve_log2_dt
            n = int(round(1.0 / dt))
            scheme = build_scheme(p, dt, n)
            moments = MomentConsumer(scheme)
            run_ensemble(p, scheme, self.cfg.sve_n_paths, self.cfg.seed, [moments])
            self._cache["profile"] = (p, scheme, moments.acc)
        return self._cache["profile"]

    def stationary_ensemble(self):
        """Stationary-mode ensemble (constant drifts at the stationary levels)
        shared by the decorrelation, increment-scaling, and Laplace checks."""
        if "stationary" not in self._cache:
            base = self.cfg.limit_params()
            p = LimitParams(base.alpha1, base.alpha2, base.scale1, 4.0 * base.scale2,
                            base.coupling, base.base1, base.base2,
                            base.level1, base.level2)
            dt = 2.0 ** -self.cfg.sve_log2_dt
            n = int(round(1.0 / dt))
            scheme = build_scheme(p, dt, n)
            b1 = GridFunction(dt, np.full(n + 1, p.level1))
            b2 = GridFunction(dt, np.full(n + 1, p.level2))
            moments = MomentConsumer(scheme)
            lags = (2, 4, 8, 16)
            s_lo = int(round(0.25 / dt))
            s_hi = int(round(0.90 / dt))
            inc_cross = IncrementConsumer(scheme, lags, which="cross", s_lo=s_lo, s_hi=s_hi)
            inc_self = IncrementConsumer(scheme, lags, which="v2_self", s_lo=s_lo, s_hi=s_hi,
                                         subtract_profiles=(b1.values, b2.values))
            inc_v1 = IncrementConsumer(scheme, lags, which="v1", s_lo=s_lo, s_hi=s_hi,
                                       subtract_profiles=(b1.values, b2.values))
            u = GridFunction(dt, np.full(n, 0.5))
            laplace = LaplaceConsumer(scheme, u)
            run_ensemble(p, scheme, self.cfg.sve_n_paths, self.cfg.seed + 1,
                         [moments, inc_cross, inc_self, inc_v1, laplace],
                         b1=b1, b2=b2)
            self._cache["stationary"] = dict(
                p=p, scheme=scheme, acc=moments.acc, b1=b1, b2=b2, u=u,
                inc_cross=inc_cross.acc, inc_self=inc_self.acc, inc_v1=inc_v1.acc,
                laplace=laplace,
            )
        return self._cache["stationary"]


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def check_crho_table(ctx: VerifyContext) -> list[Record]:
    tol = ctx.tol["crho_cell_abs"]
    out = []
    for a1, a2, row in CRHO_TABLE:
        for ell, expected in zip(CRHO_COUPLINGS, row):
            p = LimitParams(a1, a2, coupling=ell)
            got = decorrelation_constant(p, Convention.SQRT)
            out.append(_rec("crho_table", f"C({a1},{a2},{ell})", got, expected, tol))
    return out


def check_range_41(ctx: VerifyContext) -> list[Record]:
    tol = ctx.tol["range41_abs"]
    out = []
    for ell, expected in ((0.3, 0.14), (0.6, 0.28)):
        p = LimitParams(0.6, 0.8, coupling=ell)
        got = decorrelation_constant(p, Convention.LINEAR)
        out.append(_rec("range_41", f"C_linear(ell={ell})", got, expected, tol))
    return out


def check_cross_asymptote(ctx: VerifyContext) -> list[Record]:
    tol = ctx.tol["cross_asymptote_rel"]
    t = 1e-3
    a1, a2 = 0.6, 0.8
    k1 = MittagLefflerKernel(a1, 1.0)
    k2 = MittagLefflerKernel(a2, 1.0)
    n = 2048
    dtf = t / n
    conv = convolve(k1.grid(dtf, n), k2.grid(dtf, n))
    measured = conv.values[n] / t ** (a1 + a2 - 1.0)
    expected = 1.0 / gamma(a1 + a2)
    ok = abs(measured - expected) <= tol * expected
    return [_rec("cross_asymptote", "K1K2_prefactor(1e-3)", measured, expected,
                 tol * expected, ok)]


def check_product_vs_triple(ctx: VerifyContext) -> list[Record]:
    tol = ctx.tol["product_triple_rel"]
    p = LimitParams(0.6, 0.8)
    res = product_vs_triple_ratio(p, 1e-3)
    ok1 = abs(res.ratio - res.limit_constant) <= tol * res.limit_constant
    ok2 = abs(res.limit_constant - 1.0) > tol
    return [
        _rec("product_vs_triple", "ratio(1e-3)", res.ratio, res.limit_constant,
             tol * res.limit_constant, ok1),
        _rec("product_vs_triple", "constant_ne_1", res.limit_constant, 1.0, tol, ok2),
    ]


def check_kernel_sweeps(ctx: VerifyContext) -> list[Record]:
    min_ratio = ctx.tol["sweep_min_ratio"]
    fam = ctx.cfg.sweep_family()
    rows = kernel_convergence_sweep(fam, ctx.cfg.sweep_T)
    out = []
    for col in ("l2_self_1", "l2_self_2", "l2_cross", "l1_product"):
        vals = [r[col] for r in rows]
        decreasing = all(a > b for a, b in zip(vals, vals[1:]))
        ratio = vals[0] / vals[-1]
        out.append(_rec("kernel_sweeps", f"{col}_decreasing", float(decreasing), 1.0,
                        0.0, decreasing))
        out.append(_rec("kernel_sweeps", f"{col}_ratio", ratio, min_ratio, 0.0,
                        ratio >= min_ratio))
    return out


def check_shift_moduli(ctx: VerifyContext) -> list[Record]:
    t = ctx.tol
    out = []
    # self kernel
    c = SHIFT_SELF
    dt = 2.0 ** -c["log2_dt"]
    n = int(round(c["t_max"] / dt))
    g = renormalized_self_kernel(c["alpha"], c["lam"], c["T"], dt, n, scale=c["scale"])
    mods = [l2_shift_modulus(g, m * dt) for m in c["lags"]]
    slope, _ = loglog_slope([m * dt for m in c["lags"]], mods)
    out.append(_rec("shift_moduli", "self_slope", slope, t["self_slope_target"],
                    t["self_slope_tol"]))
    # cross kernel
    c = SHIFT_CROSS
    dt = 2.0 ** -c["log2_dt"]
    n = int(round(c["t_max"] / dt))
    from .kernels import CrossExciteKernel
    fam = PreLimitFamily(c["alpha1"], c["alpha2"], c["lam"], c["lam"],
                         c["scale"], c["scale"], cross_limit=c["cross_limit"],
                         cross=CrossExciteKernel(c["cross_rate"], 1.0))
    h = renormalized_cross_kernel(fam, c["T"], dt, n, substeps=1)
    mods = [l2_shift_modulus(h, m * dt) for m in c["lags"]]
    slope, _ = loglog_slope([m * dt for m in c["lags"]], mods)
    out.append(_rec("shift_moduli", "cross_slope", slope, t["cross_slope_target"],
                    t["cross_slope_tol"]))
    return out


def check_sve_mean_cov(ctx: VerifyContext) -> list[Record]:
    sig = ctx.tol["mean_cov_sigmas"]
    p, scheme, acc = ctx.profile_ensemble()
    dt, n = scheme.dt, scheme.n_steps
    out = []
    for comp in (1, 2):
        b = mean_profile(p, comp, dt, n)
        resid = np.abs(acc.mean(comp) - b.values)
        se = acc.mean_stderr(comp)
        ok = se > 0.0
        worst = float(np.max(resid[ok] / (sig * se[ok])))
        exact_ok = bool(np.all(resid[~ok] <= 1e-9))
        out.append(_rec("sve_mean_cov", f"mean{comp}_worst_dev_over_{sig}se", worst,
                        0.0, 1.0, worst <= 1.0 and exact_ok))
    cov_th = covariance_exact(p, dt, n)
    cov_emp = acc.covariance()
    cov_se = acc.covariance_stderr()
    for t_chk in (0.1, 0.25, 0.5, 1.0):
        k = int(round(t_chk / dt))
        dev = abs(cov_emp[k] - cov_th.values[k]) / (sig * cov_se[k])
        out.append(_rec("sve_mean_cov", f"cov_dev_over_{sig}se_at_t={t_chk}", dev,
                        0.0, 1.0, dev <= 1.0))
    return out


def check_decorrelation_slope(ctx: VerifyContext) -> list[Record]:
    tol = ctx.tol["decorr_slope_tol"]
    st = ctx.stationary_ensemble()
    p = st["p"]
    rho, _ = correlation_curve(st["acc"])
    dt = st["scheme"].dt
    lo = int(round(1e-2 / dt))
    hi = int(round(1e-1 / dt))
    tgrid = np.arange(st["scheme"].n_steps + 1) * dt
    window = slice(lo, hi + 1)
    slope, _ = loglog_slope(tgrid[window], rho[window])
    return [_rec("decorrelation", "rho_slope", slope, p.alpha1, tol)]


def check_increment_scaling(ctx: VerifyContext) -> list[Record]:
    t = ctx.tol
    st = ctx.stationary_ensemble()
    p = st["p"]
    out = []
    slope_c, _ = st["inc_cross"].slope()
    target_c = 2.0 * (p.alpha1 + p.alpha2) - 1.0
    out.append(_rec("increment_scaling", "cross_q2_slope", slope_c, target_c,
                    t["increment_cross_tol"]))
    slope_s, _ = st["inc_self"].slope()
    target_s = 2.0 * p.alpha2 - 1.0
    out.append(_rec("increment_scaling", "self2_q2_slope", slope_s, target_s,
                    t["increment_self_tol"]))
    out.append(_rec("increment_scaling", "cross_gt_self", slope_c, slope_s, 0.0,
                    slope_c > slope_s))
    return out


def check_riccati_laplace(ctx: VerifyContext) -> list[Record]:
    sig = ctx.tol["laplace_sigmas"]
    st = ctx.stationary_ensemble()
    p = st["p"]
    mc, se = st["laplace"].estimate()
    # deterministic prediction on a finer grid
    dt = 2.0 ** -13
    n = int(round(1.0 / dt))
    u = GridFunction(dt, np.full(n, 0.5))
    psi = riccati_volterra_solve(p.kernel(1), u)
    sign = calibrate_laplace_sign()
    b_const = GridFunction(dt, np.full(n, p.level1))
    pred = laplace_functional_prediction(time_reverse(psi), b_const, sign)
    dev = abs(mc - pred) / (sig * se)
    # the degenerate zero-kernel oracle pins the sign for the exponent form
    out = [
        _rec("riccati_laplace", "sign_pinned_by_zero_kernel_oracle",
             float(sign is LaplaceSign.AS_WRITTEN), 1.0, 0.0,
             sign is LaplaceSign.AS_WRITTEN),
        _rec("riccati_laplace", f"mc_vs_prediction_over_{sig}se", dev, 0.0, 1.0,
             dev <= 1.0),
    ]
    return out


def _count_worker(args):
    p, seed, approx, edges = args
    ev = simulate_hawkes(p, seed=seed, approx_mode=approx)
    h1 = np.histogram(ev.times1, bins=edges)[0] if edges is not None else None
    h2 = np.histogram(ev.times2, bins=edges)[0] if edges is not None else None
    return len(ev.times1), len(ev.times2), h1, h2


def check_hawkes_moments(ctx: VerifyContext) -> list[Record]:
    sig = ctx.tol["hawkes_bound_sigmas"]
    base = ctx.cfg.hawkes_base()
    T = ctx.cfg.hawkes_T
    n_rep = ctx.cfg.hawkes_replications
    p = scale_parameters(base, T)
    bound1, bound2 = mean_intensity_bounds(p)
    seeds = np.random.SeedSequence(ctx.cfg.seed + 2).spawn(n_rep)
    args = [(p, int(s.generate_state(1)[0]), ctx.cfg.approx_mode, None) for s in seeds]
    results = replication_map(_count_worker, args, ctx.cfg.threads)
    rates = np.array([(n1 / T, n2 / T) for n1, n2, _, _ in results])
    out = []
    for comp, bound in ((1, bound1), (2, bound2)):
        m = rates[:, comp - 1].mean()
        se = rates[:, comp - 1].std(ddof=1) / math.sqrt(n_rep)
        ok = m <= bound + sig * se
        out.append(_rec("hawkes_moments", f"mean_rate{comp}_below_bound", m, bound,
                        sig * se, ok))
    # decoupled configuration: zero cross-amplitude => zero binned cross-correlation
    base0 = HawkesBase(base.alpha1, base.alpha2, base.crit1, base.crit2,
                       base.base1, base.base2, 0.0, base.cross, base.family,
                       base.family_scale, base.ml_cap)
    p0 = scale_parameters(base0, T)
    seeds = np.random.SeedSequence(ctx.cfg.seed + 3).spawn(n_rep)
    n_bins = 50
    edges = np.linspace(0.0, T, n_bins + 1)
    args = [(p0, int(s.generate_state(1)[0]), ctx.cfg.approx_mode, edges) for s in seeds]
    results = replication_map(_count_worker, args, ctx.cfg.threads)
    counts = np.empty((n_rep, 2, n_bins))
    for i, (_, _, h1, h2) in enumerate(results):
        counts[i, 0] = h1
        counts[i, 1] = h2
    # center per bin across replications: the near-critical ramp-up is a
    # deterministic trend shared by both components and must not masquerade
    # as cross-correlation
    c1 = (counts[:, 0] - counts[:, 0].mean(axis=0)).ravel()
    c2 = (counts[:, 1] - counts[:, 1].mean(axis=0)).ravel()
    denom = math.sqrt(float((c1 * c1).mean() * (c2 * c2).mean()))
    corr = float((c1 * c2).mean() / denom) if denom > 0 else 0.0
    se_corr = 1.0 / math.sqrt(c1.size)
    out.append(_rec("hawkes_moments", "decoupled_bin_corr", corr, 0.0, sig * se_corr))
    return out


def _trend_worker(args):
    p, seed, window = args
    ev = simulate_hawkes(p, seed=seed, approx_mode=True)
    return [renormalized_value(ev, p, su, approx_mode=True) for su in window]


def check_hawkes_limit_trend(ctx: VerifyContext) -> list[Record]:
    rel = ctx.tol["trend_final_rel"]
    cfgT = TREND
    fam = PreLimitFamily(0.6, 0.8, 1.0, 1.0, 1.0, 1.0,
                         cross_limit=cfgT["cross_limit"], family="ml")
    base = HawkesBase(0.6, 0.8, 1.0, 1.0, cfgT["base"], cfgT["base"],
                      cfgT["cross_limit"], family="ml", family_scale=1.0)
    m2 = cfgT["base"]
    window = cfgT["window"]
    lim = np.mean([limit_covariance(fam, s, 2.0 ** -10) for s in window]) / m2
    gaps = []
    out = []
    for T in cfgT["T_values"]:
        p = scale_parameters(base, T)
        seeds = np.random.SeedSequence(ctx.cfg.seed + 4 + int(T)).spawn(cfgT["n_reps"])
        args = [(p, int(s.generate_state(1)[0]), window) for s in seeds]
        results = replication_map(_trend_worker, args, ctx.cfg.threads, chunksize=64)
        vals = np.asarray(results)
        v1c = vals[:, :, 0] - vals[:, :, 0].mean(axis=0)
        v2c = vals[:, :, 1] - vals[:, :, 1].mean(axis=0)
        cov_hat = float((v1c * v2c).mean())
        gaps.append(abs(cov_hat - lim))
        out.append(_rec("hawkes_limit_trend", f"cov_hat(T={T:g})", cov_hat, lim,
                        float("nan"), True))
    monotone = all(a > b for a, b in zip(gaps, gaps[1:]))
    out.append(_rec("hawkes_limit_trend", "gaps_monotone", float(monotone), 1.0, 0.0,
                    monotone))
    final_rel = gaps[-1] / lim
    out.append(_rec("hawkes_limit_trend", "final_gap_rel", final_rel, 0.0, rel,
                    final_rel <= rel))
    return out


def check_criticality(ctx: VerifyContext) -> list[Record]:
    out = []
    tri = criticality_determinant(1.0 - 1e-2, 1.0 - 1e-2, 0.1, 0.0)
    out.append(_rec("criticality", "triangular_positive", tri, 0.0, 0.0, tri > 0.0))
    sym = criticality_determinant(1.0 - 1e-2, 1.0 - 1e-2, 0.1, 0.1)
    out.append(_rec("criticality", "symmetric_negative", sym, -0.0099, 1e-12,
                    sym < 0.0))
    return out


PRIMARY_CRITERIA = [
    ("crho_table", check_crho_table),
    ("range_41", check_range_41),
    ("cross_asymptote", check_cross_asymptote),
    ("product_vs_triple", check_product_vs_triple),
    ("kernel_sweeps", check_kernel_sweeps),
    ("shift_moduli", check_shift_moduli),
    ("sve_mean_cov", check_sve_mean_cov),
    ("decorrelation", check_decorrelation_slope),
    ("increment_scaling", check_increment_scaling),
    ("riccati_laplace", check_riccati_laplace),
    ("hawkes_moments", check_hawkes_moments),
    ("hawkes_limit_trend", check_hawkes_limit_trend),
    ("criticality", check_criticality),
]


def run_verify(cfg: ExperimentConfig, only: list[str] | None = None) -> tuple[list[dict], bool]:
    ctx = VerifyContext(cfg)
    records: list[dict] = []
    all_ok = True
    for name, fn in PRIMARY_CRITERIA:
        if only and name not in only:
            continue
        for rec in fn(ctx):
            records.append(rec.as_dict())
            all_ok = all_ok and rec.ok
    return records, all_ok
