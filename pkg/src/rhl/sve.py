"""Discretized simulation of the limiting coupled stochastic Volterra system.

The scheme is an explicit Volterra-Euler recursion with cell-integrated
kernel weights:

    V1_k = b1_k + sum_{j<k} w1_{k-1-j} sqrt(V1_j^+) Z1_j / sqrt(dt)
    V2_k = b2_k + sum_{j<k} w2_{k-1-j} sqrt(V2_j^+) Z2_j / sqrt(dt)
         + coupling * sum_{j<k} wc_{k-1-j} sqrt(V1_j^+) Z1_j / sqrt(dt)

with the SAME Z1 draws feeding both the first component and the cross sum of
the second (the inherited-noise structure of the limit system).  The state is
kept signed and the positive part enters only inside the square roots, which
makes the ensemble mean exactly equal to the drift profile; small negative
excursions are a discretization artifact (see ``clamped``).

Batches of paths advance together: the per-step convolution sum is a
matrix-vector product over the batch, and the cross sum is a single FFT
convolution once component 1 is known.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .analytics import LimitParams, mean_profile
from .grid import GridFunction
from .stats import EnsembleAccumulator, IncrementAccumulator


def kernel_weights(kernel, dt: float, n: int) -> np.ndarray:
    """Cell-integrated weights w_k = int_{k dt}^{(k+1) dt} K(u) du.

    ``kernel`` is a MittagLefflerKernel (exact masses from the closed-form
    cumulative) or a GridFunction of cell values (masses = values * dt).
    """
    if isinstance(kernel, GridFunction):
        return kernel.values[:n] * kernel.dt
    edges = np.arange(n + 1) * dt
    return np.diff(kernel.cumulative(edges))


@dataclass(frozen=True)
class SveScheme:
    """Precomputed discretization of the coupled system."""

    dt: float
    n_steps: int
    weights1: np.ndarray = field(repr=False)
    weights2: np.ndarray = field(repr=False)
    weights_cross: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("weights1", "weights2", "weights_cross"):
            w = np.ascontiguousarray(getattr(self, name), dtype=float)
            if w.shape != (self.n_steps,):
                raise ValueError(f"{name} must have length n_steps")
            if np.any(w < 0.0):
                raise ValueError(f"{name} must be nonnegative")
            object.__setattr__(self, name, w)


def build_scheme(p: LimitParams, dt: float, n_steps: int, refine: int = 8) -> SveScheme:
    """Exact self-kernel weights plus refined-grid weights for K1*K2.

    The cross weights carry unit coupling; the recursion scales them by
    ``p.coupling``.
    """
    w1 = kernel_weights(p.kernel(1), dt, n_steps)
    w2 = kernel_weights(p.kernel(2), dt, n_steps)
    dtf = dt / refine
    k1f = p.kernel(1).cell_values(dtf, refine * n_steps)
    k2f = p.kernel(2).cell_values(dtf, refine * n_steps)
    conv = fftconvolve(k1f, k2f)[: refine * n_steps] * dtf
    nodes = np.concatenate(([0.0], conv))
    fine_masses = 0.5 * (nodes[1:] + nodes[:-1]) * dtf
    wc = fine_masses.reshape(n_steps, refine).sum(axis=1)
    return SveScheme(dt, n_steps, w1, w2, wc)


@dataclass(frozen=True)
class SvePaths:
    """A small bundle of simulated paths on the nodes 0..n_steps.

    ``v1``/``v2`` carry the signed scheme state; ``cross_term`` stores the
    inherited-noise sum of the second component alone (zero at t = 0).
    Use :meth:`clamped` for the nonnegative views.
    """

    v1: GridFunction
    v2: GridFunction
    cross_term: GridFunction
    seed: int

    def clamped(self) -> tuple[GridFunction, GridFunction]:
        return (
            GridFunction(self.v1.dt, np.maximum(self.v1.values, 0.0)),
            GridFunction(self.v2.dt, np.maximum(self.v2.values, 0.0)),
        )


def _simulate_batch(b1: np.ndarray, b2: np.ndarray, scheme: SveScheme,
                    coupling: float, n_paths: int, rng: np.random.Generator):
    """Advance a batch of paths; returns (V1, V2, C) of shape (n_paths, n+1)."""
    n = scheme.n_steps
    dt = scheme.dt
    sqdt = np.sqrt(dt)
    z1 = rng.standard_normal((n_paths, n))
    z2 = rng.standard_normal((n_paths, n))

    w1r = scheme.weights1[::-1].copy()
    w2r = scheme.weights2[::-1].copy()

    v1 = np.empty((n_paths, n + 1))
    u1 = np.empty((n_paths, n))
    v1[:, 0] = b1[0]
    u1[:, 0] = np.sqrt(np.maximum(v1[:, 0], 0.0)) * z1[:, 0] / sqdt
    for k in range(1, n + 1):
        v1[:, k] = b1[k] + u1[:, :k] @ w1r[n - k:]
        if k < n:
            u1[:, k] = np.sqrt(np.maximum(v1[:, k], 0.0)) * z1[:, k] / sqdt

    cross = np.empty((n_paths, n + 1))
    cross[:, 0] = 0.0
    cross[:, 1:] = coupling * fftconvolve(u1, scheme.weights_cross[None, :], axes=1)[:, :n]

    v2 = np.empty((n_paths, n + 1))
    u2 = np.empty((n_paths, n))
    v2[:, 0] = b2[0]
    u2[:, 0] = np.sqrt(np.maximum(v2[:, 0], 0.0)) * z2[:, 0] / sqdt
    for k in range(1, n + 1):
        v2[:, k] = b2[k] + cross[:, k] + u2[:, :k] @ w2r[n - k:]
        if k < n:
            u2[:, k] = np.sqrt(np.maximum(v2[:, k], 0.0)) * z2[:, k] / sqdt
    return v1, v2, cross


def simulate_pair(p: LimitParams, scheme: SveScheme, seed: int,
                  b1: GridFunction | None = None,
                  b2: GridFunction | None = None) -> SvePaths:
    """One path pair (deterministic given the seed)."""
    b1v, b2v = _profiles(p, scheme, b1, b2)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    v1, v2, cross = _simulate_batch(b1v, b2v, scheme, p.coupling, 1, rng)
    return SvePaths(
        GridFunction(scheme.dt, v1[0]),
        GridFunction(scheme.dt, v2[0]),
        GridFunction(scheme.dt, cross[0]),
        seed,
    )


def _profiles(p: LimitParams, scheme: SveScheme, b1, b2):
    n = scheme.n_steps
    if b1 is None:
        b1 = mean_profile(p, 1, scheme.dt, n)
    if b2 is None:
        b2 = mean_profile(p, 2, scheme.dt, n)
    if len(b1) != n + 1 or len(b2) != n + 1:
        raise ValueError("drift profiles must be sampled on the n_steps+1 nodes")
    return b1.values, b2.values


def run_ensemble(p: LimitParams, scheme: SveScheme, n_paths: int, seed: int,
                 consumers, b1: GridFunction | None = None,
                 b2: GridFunction | None = None, batch_size: int = 2048) -> None:
    """Stream ``n_paths`` simulated pairs through the consumers.

    Each consumer exposes ``consume(v1, v2, cross)`` receiving batch arrays of
    shape (batch, n_steps+1).  Batches draw from seeds spawned off the master
    seed, so the ensemble is reproducible and mergeable across workers.
    """
    b1v, b2v = _profiles(p, scheme, b1, b2)
    seeds = np.random.SeedSequence(seed).spawn((n_paths + batch_size - 1) // batch_size)
    done = 0
    for s in seeds:
        m = min(batch_size, n_paths - done)
        rng = np.random.Generator(np.random.Philox(s))
        v1, v2, cross = _simulate_batch(b1v, b2v, scheme, p.coupling, m, rng)
        for c in consumers:
            c.consume(v1, v2, cross)
        done += m
        if done >= n_paths:
            break


class MomentConsumer:
    """Feeds an EnsembleAccumulator with (V1, V2) batches."""

    def __init__(self, scheme: SveScheme):
        self.acc = EnsembleAccumulator(scheme.dt, scheme.n_steps + 1)

    def consume(self, v1, v2, cross):
        self.acc.add_batch(v1, v2)


class IncrementConsumer:
    """Accumulates increment moments of a selected path component."""

    def __init__(self, scheme: SveScheme, lags, q: int = 2, which: str = "cross",
                 s_lo: int = 0, s_hi: int | None = None,
                 subtract_profiles: tuple[np.ndarray, np.ndarray] | None = None):
        self.which = which
        self._profiles = subtract_profiles
        self.acc = IncrementAccumulator(scheme.dt, tuple(lags), q=q, s_lo=s_lo, s_hi=s_hi)

    def consume(self, v1, v2, cross):
        if self.which == "cross":
            x = cross
        elif self.which == "v1":
            x = v1 if self._profiles is None else v1 - self._profiles[0]
        elif self.which == "v2_self":
            # self-noise part of component 2: V2 minus drift minus cross term
            x = v2 - cross if self._profiles is None else v2 - cross - self._profiles[1]
        else:
            raise ValueError(f"unknown component {self.which!r}")
        self.acc.add_batch(x)


class LaplaceConsumer:
    """Monte-Carlo Laplace functional mean of exp(-sum u_k V1_k dt)."""

    def __init__(self, scheme: SveScheme, u: GridFunction):
        if len(u) < scheme.n_steps:
            raise ValueError("control must cover the time grid")
        if np.any(u.values < 0.0):
            raise ValueError("the control must be nonnegative")
        self._w = u.values[: scheme.n_steps] * scheme.dt
        self.n = 0
        self.sum = 0.0
        self.sumsq = 0.0

    def consume(self, v1, v2, cross):
        y = np.exp(-(v1[:, :-1] @ self._w))
        self.n += y.shape[0]
        self.sum += float(y.sum())
        self.sumsq += float((y * y).sum())

    def estimate(self) -> tuple[float, float]:
        mean = self.sum / self.n
        var = max(self.sumsq / self.n - mean * mean, 0.0)
        return mean, float(np.sqrt(var / self.n))


def monte_carlo_laplace(p: LimitParams, u: GridFunction, scheme: SveScheme,
                        n_paths: int, seed: int,
                        b1: GridFunction | None = None,
                        b2: GridFunction | None = None) -> tuple[float, float]:
    """Estimate E[exp(-int u V1 dt)] with its standard error."""
    consumer = LaplaceConsumer(scheme, u)
    run_ensemble(p, scheme, n_paths, seed, [consumer], b1=b1, b2=b2)
    return consumer.estimate()


def increment_moment_scaling(paths: np.ndarray, dt: float, lags, q: int = 2,
                             s_lo: int = 0, s_hi: int | None = None) -> tuple[float, float]:
    """Fit log E|X_{t+h}-X_t|^q against log h over a dyadic lag set.

    ``paths`` has shape (n_paths, n_points); requires at least 500 paths for
    a stable fit.
    """
    if paths.shape[0] < 500:
        raise ValueError("need at least 500 paths for increment scaling")
    acc = IncrementAccumulator(dt, tuple(lags), q=q, s_lo=s_lo, s_hi=s_hi)
    acc.add_batch(paths)
    return acc.slope()


def brownian_fixture(n_paths: int, n_steps: int, dt: float, seed: int) -> np.ndarray:
    """Standard Brownian paths for calibration of the increment estimator."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    dw = rng.standard_normal((n_paths, n_steps)) * np.sqrt(dt)
    return np.concatenate([np.zeros((n_paths, 1)), np.cumsum(dw, axis=1)], axis=1)
