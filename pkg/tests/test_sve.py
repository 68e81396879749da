import numpy as np
import pytest

from rhl.analytics import LimitParams, mean_profile
from rhl.grid import GridFunction
from rhl.kernels import MittagLefflerKernel
from rhl.mittag import gamma
from rhl.sve import (MomentConsumer, SveScheme, build_scheme, kernel_weights,
                     monte_carlo_laplace, run_ensemble, simulate_pair)

REF = LimitParams(0.6, 0.8, coupling=0.5)
DT, N = 2.0**-9, 512


@pytest.fixture(scope="module")
def scheme():
    return build_scheme(REF, DT, N)


class TestWeights:
    def test_telescoping(self):
        k = MittagLefflerKernel(0.6, 1.0)
        w = kernel_weights(k, DT, N)
        assert float(w.sum()) == pytest.approx(float(k.cumulative(N * DT)), rel=1e-12)

    def test_exponential_boundary_closed_form(self):
        k = MittagLefflerKernel(1.0, 1.0)
        w = kernel_weights(k, 0.01, 64)
        kk = np.arange(64)
        exact = np.exp(-kk * 0.01) * (1.0 - np.exp(-0.01))
        assert np.allclose(w, exact, rtol=1e-10)

    def test_first_cell_fractional_integral(self):
        # first cell = closed-form fractional integral of the leading power
        # term plus the series correction
        alpha, scale, dt = 0.6, 2.0, 1e-4
        w0 = kernel_weights(MittagLefflerKernel(alpha, scale), dt, 2)[0]
        lead = dt**alpha / (scale * gamma(alpha + 1.0))
        assert w0 == pytest.approx(lead, rel=5e-3)
        corrected = lead * (1.0 - dt**alpha / scale * gamma(alpha + 1.0) / gamma(2 * alpha + 1.0))
        assert w0 == pytest.approx(corrected, rel=1e-4)

    def test_scheme_validation(self):
        with pytest.raises(ValueError):
            SveScheme(DT, 4, np.ones(4), np.ones(4), -np.ones(4))


class TestSimulation:
    def test_deterministic_given_seed(self, scheme):
        a = simulate_pair(REF, scheme, seed=7)
        b = simulate_pair(REF, scheme, seed=7)
        assert np.array_equal(a.v1.values, b.v1.values)
        assert np.array_equal(a.v2.values, b.v2.values)
        c = simulate_pair(REF, scheme, seed=8)
        assert not np.array_equal(a.v1.values, c.v1.values)

    def test_cross_term_starts_at_zero(self, scheme):
        p = simulate_pair(REF, scheme, seed=1)
        assert p.cross_term.values[0] == 0.0

    def test_clamped_views_nonnegative(self, scheme):
        p = simulate_pair(REF, scheme, seed=2)
        v1c, v2c = p.clamped()
        assert np.all(v1c.values >= 0.0)
        assert np.all(v2c.values >= 0.0)

    def test_negative_excursions_are_small_artifact(self, scheme):
        # signed state keeps the mean exact; the negative part is a bounded
        # discretization artifact
        acc_neg = []
        for seed in range(20):
            p = simulate_pair(REF, scheme, seed=seed)
            acc_neg.append(np.minimum(p.v1.values, 0.0).mean())
        assert abs(np.mean(acc_neg)) < 0.05

    def test_zero_kernel2_makes_v2_drift_plus_cross(self):
        # zeroing the second self-kernel isolates the shared-noise bookkeeping:
        # V2 - b2 must equal the stored cross term exactly
        scheme0 = SveScheme(DT, N, build_scheme(REF, DT, N).weights1,
                            np.zeros(N), build_scheme(REF, DT, N).weights_cross)
        p = simulate_pair(REF, scheme0, seed=3)
        b2 = mean_profile(REF, 2, DT, N)
        assert np.allclose(p.v2.values - b2.values, p.cross_term.values, atol=1e-12)

    def test_ensemble_mean_matches_profiles(self, scheme):
        mom = MomentConsumer(scheme)
        run_ensemble(REF, scheme, 3000, 99, [mom])
        acc = mom.acc
        for comp in (1, 2):
            b = mean_profile(REF, comp, DT, N).values
            se = acc.mean_stderr(comp)
            dev = np.abs(acc.mean(comp) - b)[1:]
            assert np.all(dev <= np.maximum(4.0 * se[1:], 1e-12))

    def test_zero_coupling_decorrelates(self):
        p0 = LimitParams(0.6, 0.8, coupling=0.0)
        scheme0 = build_scheme(p0, DT, N)
        mom = MomentConsumer(scheme0)
        run_ensemble(p0, scheme0, 2000, 17, [mom])
        k = int(round(0.5 / DT))
        cov = mom.acc.covariance()[k]
        v1 = mom.acc.variance(1)[k]
        v2 = mom.acc.variance(2)[k]
        corr = cov / np.sqrt(v1 * v2)
        assert abs(corr) <= 3.0 / np.sqrt(2000)

    def test_run_reproducible(self, scheme):
        # identical (seed, n_paths, batching) regenerates identical statistics
        m1 = MomentConsumer(scheme)
        run_ensemble(REF, scheme, 600, 5, [m1], batch_size=128)
        m2 = MomentConsumer(scheme)
        run_ensemble(REF, scheme, 600, 5, [m2], batch_size=128)
        assert np.array_equal(m1.acc.mean(1), m2.acc.mean(1))
        assert np.array_equal(m1.acc.covariance(), m2.acc.covariance())


class TestLaplace:
    def test_zero_control_exactly_one(self, scheme):
        u = GridFunction(DT, np.zeros(N))
        est, se = monte_carlo_laplace(REF, u, scheme, 200, 1)
        assert est == 1.0
        assert se == 0.0

    def test_suppressed_kernel_deterministic_limit(self):
        # huge scales kill both kernels: V = b and the functional is
        # exp(-int u b) exactly
        p = LimitParams(0.6, 0.8, scale1=1e12, scale2=1e12, coupling=0.0)
        scheme = build_scheme(p, DT, N)
        u = GridFunction(DT, np.full(N, 0.7))
        b1 = mean_profile(p, 1, DT, N)
        est, se = monte_carlo_laplace(p, u, scheme, 400, 2)
        exact = np.exp(-float(np.sum(0.7 * b1.values[:N]) * DT))
        assert est == pytest.approx(exact, abs=max(3.0 * se, 1e-6))

    def test_control_must_be_nonnegative(self, scheme):
        with pytest.raises(ValueError):
            monte_carlo_laplace(REF, GridFunction(DT, -np.ones(N)), scheme, 10, 1)


class TestCrossTermAccelerator:
    def test_fft_cross_matches_direct_sum(self):
        # the cross sum is the only FFT-accelerated piece of the recursion;
        # it must agree with the direct convolution sum to 1e-10
        rng = np.random.default_rng(31)
        n, paths = 128, 5
        w = np.diff(MittagLefflerKernel(0.7, 1.0).cumulative(np.arange(n + 1) * 0.01))
        u1 = rng.standard_normal((paths, n))
        from scipy.signal import fftconvolve
        fft_version = fftconvolve(u1, w[None, :], axes=1)[:, :n]
        direct = np.zeros((paths, n))
        for k in range(1, n + 1):
            direct[:, k - 1] = u1[:, :k] @ w[:k][::-1]
        assert np.max(np.abs(fft_version - direct)) < 1e-10


class TestCorrelationAgainstQuadrature:
    def test_correlation_curve_tracks_scheme_consistent_theory(self):
        from rhl.analytics import correlation_curve_theory
        from rhl.stats import correlation_curve
        scheme = build_scheme(REF, DT, N)
        mom = MomentConsumer(scheme)
        run_ensemble(REF, scheme, 4000, 123, [mom])
        rho_hat, se = correlation_curve(mom.acc)
        theory = correlation_curve_theory(
            REF, DT, N,
            scheme_weights=(scheme.weights1, scheme.weights2, scheme.weights_cross))
        for t_chk in (0.25, 0.5, 1.0):
            k = int(round(t_chk / DT))
            assert abs(rho_hat[k] - theory.values[k]) <= 3.0 * se[k]
