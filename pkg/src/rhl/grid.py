"""Uniform-grid function carrier and the product-integration calculus on it.

A :class:`GridFunction` stores one value per cell ``[k*dt, (k+1)*dt)``.  For
smooth functions the cell value is simply the sample at the left node; for
kernels with an integrable singularity at zero the first entry must hold the
cell average over ``[0, dt)`` (the pointwise value does not exist there).
All quadrature below treats values as piecewise-constant cell
representatives, which keeps convolution mass-exact for such inputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve


@dataclass(frozen=True)
class GridFunction:
    """A function sampled on the uniform cells of [0, n*dt)."""

    dt: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if v.ndim != 1 or v.shape[0] < 2:
            raise ValueError("values must be a 1-d array with at least 2 entries")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def t(self) -> np.ndarray:
        """Left cell edges t_k = k*dt."""
        return np.arange(len(self)) * self.dt

    @property
    def t_max(self) -> float:
        return len(self) * self.dt

    def restricted(self, t_max: float) -> "GridFunction":
        n = _cells_for(self, t_max)
        return GridFunction(self.dt, self.values[:n])

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return GridFunction(self.dt, self.values * other.values)
        return GridFunction(self.dt, self.values * float(other))

    __rmul__ = __mul__

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.dt, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_grid(self, other)
        return GridFunction(self.dt, self.values - other.values)


def _check_same_dt(f: GridFunction, g: GridFunction) -> None:
    if abs(f.dt - g.dt) > 1e-12 * max(f.dt, g.dt):
        raise ValueError(f"grid steps differ: {f.dt} vs {g.dt}")


def _check_same_grid(f: GridFunction, g: GridFunction) -> None:
    _check_same_dt(f, g)
    if len(f) != len(g):
        raise ValueError(f"grid lengths differ: {len(f)} vs {len(g)}")


def _cells_for(f: GridFunction, t_max: float) -> int:
    n = int(round(t_max / f.dt))
    if n < 1 or n > len(f):
        raise ValueError(f"t_max={t_max} outside the grid domain (0, {f.t_max}]")
    return n


def convolve(f: GridFunction, g: GridFunction) -> GridFunction:
    """(f*g)(t_k) = dt * sum_{j<k} f_j g_{k-1-j}; exact for piecewise-constant inputs.

    With inputs covering [0, n*dt) the result carries the node values of the
    (continuous) convolution at t_0 = 0, ..., t_n = n*dt, so it has one more
    entry than the shorter input.
    """
    _check_same_dt(f, g)
    n = min(len(f), len(g))
    full = fftconvolve(f.values[:n], g.values[:n])[:n] * f.dt
    return GridFunction(f.dt, np.concatenate(([0.0], full)))


def convolve_direct(f: GridFunction, g: GridFunction) -> GridFunction:
    """Direct O(n^2) variant of :func:`convolve` (reference for the FFT path)."""
    _check_same_dt(f, g)
    n = min(len(f), len(g))
    full = np.convolve(f.values[:n], g.values[:n])[:n] * f.dt
    return GridFunction(f.dt, np.concatenate(([0.0], full)))


def integrate(f: GridFunction, t_max: float | None = None) -> float:
    n = _cells_for(f, t_max) if t_max is not None else len(f)
    return float(f.values[:n].sum() * f.dt)


def l2_distance(f: GridFunction, g: GridFunction, t_max: float) -> float:
    """(int_0^t_max (f-g)^2)^(1/2) on the cell representation."""
    _check_same_dt(f, g)
    n = min(len(f), len(g))
    m = _cells_for(GridFunction(f.dt, f.values[:n]), t_max)
    d = f.values[:m] - g.values[:m]
    return float(np.sqrt(np.sum(d * d) * f.dt))


def l1_distance(f: GridFunction, g: GridFunction, t_max: float) -> float:
    _check_same_dt(f, g)
    n = min(len(f), len(g))
    m = _cells_for(GridFunction(f.dt, f.values[:n]), t_max)
    return float(np.sum(np.abs(f.values[:m] - g.values[:m])) * f.dt)


def l2_norm(f: GridFunction, t_max: float | None = None) -> float:
    n = _cells_for(f, t_max) if t_max is not None else len(f)
    v = f.values[:n]
    return float(np.sqrt(np.sum(v * v) * f.dt))


def l2_shift_modulus(f: GridFunction, h: float) -> float:
    """int_0^{t_max-h} (f(u+h) - f(u))^2 du for a lag h that is a multiple of dt."""
    m = int(round(h / f.dt))
    if abs(m * f.dt - h) > 1e-9 * f.dt:
        raise ValueError(f"h={h} is not a multiple of dt={f.dt}")
    if m < 1 or m >= len(f):
        raise ValueError(f"h={h} outside (0, t_max)")
    d = f.values[m:] - f.values[:-m]
    return float(np.sum(d * d) * f.dt)


def write_csv(f: GridFunction, path, metadata: dict | None = None) -> None:
    """Serialize as CSV with header ``t,value`` and 14 significant digits."""
    with open(path, "w") as fh:
        for key, val in (metadata or {}).items():
            fh.write(f"# {key}: {val}\n")
        fh.write("t,value\n")
        for tk, vk in zip(f.t, f.values):
            fh.write(f"{tk:.14g},{vk:.14g}\n")


def read_csv(path) -> tuple[GridFunction, dict]:
    meta: dict[str, str] = {}
    ts, vs = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                key, _, val = line[1:].partition(":")
                meta[key.strip()] = val.strip()
                continue
            if not line or line.startswith("t,"):
                continue
            a, b = line.split(",")
            ts.append(float(a))
            vs.append(float(b))
    dt = ts[1] - ts[0]
    return GridFunction(dt, np.asarray(vs)), meta
