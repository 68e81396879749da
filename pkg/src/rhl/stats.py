"""Streaming Monte-Carlo moments over path ensembles, correlation curves,
and log-log slope fitting shared by the simulation drivers.

Accumulators are designed for shard-and-merge: each worker owns a private
accumulator and the results are merged associatively at the end.  Sums are
kept relative to a per-grid-point shift (the first accumulated sample) with
compensated addition, so merges agree to ~1e-12 regardless of order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class _CompensatedSum:
    """Kahan-compensated elementwise accumulator."""

    __slots__ = ("value", "_comp")

    def __init__(self, n: int):
        self.value = np.zeros(n)
        self._comp = np.zeros(n)

    def add(self, x: np.ndarray) -> None:
        y = x - self._comp
        t = self.value + y
        self._comp = (t - self.value) - y
        self.value = t


class EnsembleAccumulator:
    """Streaming mean/variance/covariance per grid point for path pairs.

    Accepts single pairs or whole batches; `merge` combines two accumulators
    built on the same grid (associative and commutative up to compensated-
    summation tolerance).
    """

    def __init__(self, dt: float, n_points: int):
        self.dt = float(dt)
        self.n_points = int(n_points)
        self.count = 0
        self._shift1 = None
        self._shift2 = None
        self._s1 = _CompensatedSum(n_points)
        self._s2 = _CompensatedSum(n_points)
        self._q1 = _CompensatedSum(n_points)
        self._q2 = _CompensatedSum(n_points)
        self._c12 = _CompensatedSum(n_points)

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_points:
            raise ValueError(f"grid mismatch: expected {self.n_points} points, got {x.shape[-1]}")
        return x

    def add_pair(self, x1, x2) -> None:
        self.add_batch(np.asarray(x1)[None, :], np.asarray(x2)[None, :])

    def add_batch(self, x1, x2) -> None:
        x1 = self._check(x1)
        x2 = self._check(x2)
        if x1.shape != x2.shape:
            raise ValueError("component batches differ in shape")
        if self._shift1 is None:
            self._shift1 = x1[0].copy()
            self._shift2 = x2[0].copy()
        d1 = x1 - self._shift1
        d2 = x2 - self._shift2
        self._s1.add(d1.sum(axis=0))
        self._s2.add(d2.sum(axis=0))
        self._q1.add((d1 * d1).sum(axis=0))
        self._q2.add((d2 * d2).sum(axis=0))
        self._c12.add((d1 * d2).sum(axis=0))
        self.count += x1.shape[0]

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        if abs(self.dt - other.dt) > 1e-12 * self.dt or self.n_points != other.n_points:
            raise ValueError("cannot merge accumulators on different grids")
        if other.count == 0:
            return self._copy()
        if self.count == 0:
            return other._copy()
        out = self._copy()
        # rebase the other accumulator's sums onto our shifts
        d1 = other._shift1 - out._shift1
        d2 = other._shift2 - out._shift2
        m = other.count
        s1 = other._s1.value + m * d1
        s2 = other._s2.value + m * d2
        q1 = other._q1.value + 2.0 * d1 * other._s1.value + m * d1 * d1
        q2 = other._q2.value + 2.0 * d2 * other._s2.value + m * d2 * d2
        c12 = other._c12.value + d1 * other._s2.value + d2 * other._s1.value + m * d1 * d2
        out._s1.add(s1)
        out._s2.add(s2)
        out._q1.add(q1)
        out._q2.add(q2)
        out._c12.add(c12)
        out.count += m
        return out

    def _copy(self) -> "EnsembleAccumulator":
        out = EnsembleAccumulator(self.dt, self.n_points)
        out.count = self.count
        if self._shift1 is not None:
            out._shift1 = self._shift1.copy()
            out._shift2 = self._shift2.copy()
        for name in ("_s1", "_s2", "_q1", "_q2", "_c12"):
            src = getattr(self, name)
            dst = getattr(out, name)
            dst.value = src.value.copy()
            dst._comp = src._comp.copy()
        return out

    # ---- finalized statistics -------------------------------------------

    def mean(self, component: int) -> np.ndarray:
        self._require(1)
        s = self._s1 if component == 1 else self._s2
        shift = self._shift1 if component == 1 else self._shift2
        return shift + s.value / self.count

    def variance(self, component: int) -> np.ndarray:
        self._require(2)
        s = (self._s1 if component == 1 else self._s2).value
        q = (self._q1 if component == 1 else self._q2).value
        var = (q - s * s / self.count) / (self.count - 1)
        return np.maximum(var, 0.0)

    def covariance(self) -> np.ndarray:
        self._require(2)
        return (self._c12.value - self._s1.value * self._s2.value / self.count) / (
            self.count - 1
        )

    def mean_stderr(self, component: int) -> np.ndarray:
        return np.sqrt(self.variance(component) / self.count)

    def covariance_stderr(self) -> np.ndarray:
        """Large-sample SE of the sample covariance under joint normality:
        sqrt((var1*var2 + cov^2)/(n-1))."""
        v1, v2 = self.variance(1), self.variance(2)
        return np.sqrt((v1 * v2 + self.covariance() ** 2) / (self.count - 1))

    def _require(self, k: int) -> None:
        if self.count < k:
            raise ValueError(f"need at least {k} accumulated paths, have {self.count}")


def correlation_curve(acc: EnsembleAccumulator) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise correlation estimate with a delta-method standard error.

    Grid points with vanishing variance in either component are marked
    missing (NaN), not zero.  SE uses the normal-theory approximation
    (1 - rho^2)/sqrt(n - 3).
    """
    v1 = acc.variance(1)
    v2 = acc.variance(2)
    cov = acc.covariance()
    rho = np.full(acc.n_points, np.nan)
    ok = (v1 > 0.0) & (v2 > 0.0)
    rho[ok] = cov[ok] / np.sqrt(v1[ok] * v2[ok])
    se = np.full(acc.n_points, np.nan)
    if acc.count > 3:
        se[ok] = (1.0 - rho[ok] ** 2) / math.sqrt(acc.count - 3)
    return rho, se


def loglog_slope(x, y, window=None) -> tuple[float, float]:
    """Least-squares slope of log y against log x with its regression SE.

    ``window`` is an optional index selector (slice or array).  All selected
    values must be strictly positive.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is not None:
        x = x[window]
        y = y[window]
    if x.shape[0] < 2:
        raise ValueError("need at least two points for a slope")
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("log-log fit requires positive data in the window")
    lx, ly = np.log(x), np.log(y)
    lxc = lx - lx.mean()
    sxx = float(np.sum(lxc * lxc))
    slope = float(np.sum(lxc * ly) / sxx)
    resid = ly - ly.mean() - slope * lxc
    dof = x.shape[0] - 2
    stderr = float(np.sqrt(np.sum(resid**2) / dof / sxx)) if dof > 0 else 0.0
    return slope, stderr


@dataclass
class IncrementAccumulator:
    """Streaming q-th absolute moments of path increments over a dyadic lag set.

    For each lag m (in grid steps) accumulates E|X_{s+m dt} - X_{s dt}|^q
    averaged over paths and over base points s in [s_lo, s_hi].
    """

    dt: float
    lags: tuple[int, ...]
    q: int = 2
    s_lo: int = 0
    s_hi: int | None = None
    _sums: np.ndarray = field(init=False)
    _counts: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.q < 2 or self.q % 2 != 0:
            raise ValueError("q must be an even integer >= 2")
        self._sums = np.zeros(len(self.lags))
        self._counts = np.zeros(len(self.lags), dtype=np.int64)

    def add_batch(self, paths: np.ndarray) -> None:
        paths = np.asarray(paths, dtype=float)
        n = paths.shape[1]
        hi = self.s_hi if self.s_hi is not None else n - 1
        for i, m in enumerate(self.lags):
            top = min(hi, n - 1 - m)
            if top < self.s_lo:
                raise ValueError(f"lag {m} leaves no base points in the window")
            d = paths[:, self.s_lo + m: top + 1 + m] - paths[:, self.s_lo: top + 1]
            self._sums[i] += float(np.sum(np.abs(d) ** self.q))
            self._counts[i] += d.size

    def moments(self) -> np.ndarray:
        if np.any(self._counts == 0):
            raise ValueError("no increments accumulated yet")
        return self._sums / self._counts

    def slope(self) -> tuple[float, float]:
        lags_t = np.asarray(self.lags, dtype=float) * self.dt
        return loglog_slope(lags_t, self.moments())


def slope_record(quantity: str, window, slope: float, stderr: float,
                 expected: float, tolerance: float) -> dict:
    """Slope-report record in the documented JSON schema."""
    return {
        "quantity": quantity,
        "window": list(window),
        "slope": float(slope),
        "stderr": float(stderr),
        "expected": float(expected),
        "pass": bool(abs(slope - expected) <= tolerance),
    }
