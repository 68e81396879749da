"""Kernel families, resolvents, and the renormalized kernels of the
near-critical rescaling, plus the L2/L1 convergence sweeps built on them.

Kernel grids follow the cell convention of :mod:`rhl.grid`: entry k holds the
exact cell average (cell mass / dt) over [k*dt, (k+1)*dt), so convolution and
resolvent operations are mass-exact even for kernels with an integrable
singularity at zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _core
from .grid import GridFunction, convolve, l1_distance, l2_distance
from .mittag import gamma, mittag_leffler


@dataclass(frozen=True)
class MittagLefflerKernel:
    """Kernel with Laplace transform 1/(1 + scale * z^alpha).

    Pointwise K(t) = t^(alpha-1) E_{alpha,alpha}(-t^alpha/scale) / scale for
    t > 0; total mass 1; short-time behaviour t^(alpha-1)/(scale*Gamma(alpha)).
    alpha = 1 is the exponential boundary case K(t) = exp(-t/scale)/scale.
    """

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not (0.5 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (1/2, 1], got {self.alpha}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0.0):
            raise ValueError("the kernel is evaluated pointwise only for t > 0")
        a, d = self.alpha, self.scale
        return t ** (a - 1.0) * mittag_leffler(a, a, -(t**a) / d) / d

    def cumulative(self, x):
        """int_0^x K = 1 - E_{alpha,1}(-x^alpha/scale); exact."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            raise ValueError("cumulative mass needs x >= 0")
        a, d = self.alpha, self.scale
        out = 1.0 - mittag_leffler(a, 1.0, -np.where(x > 0, x, 0.0) ** a / d)
        return np.where(x > 0, out, 0.0)

    def first_moment_cumulative(self, x):
        """int_0^x t K(t) dt = x [F(x) - 1 + E_{alpha,2}(-x^alpha/scale)]."""
        x = np.asarray(x, dtype=float)
        a, d = self.alpha, self.scale
        e2 = mittag_leffler(a, 2.0, -np.where(x > 0, x, 0.0) ** a / d)
        out = x * (self.cumulative(x) - 1.0 + e2)
        return np.where(x > 0, out, 0.0)

    def cell_values(self, dt: float, n: int) -> np.ndarray:
        edges = np.arange(n + 1) * dt
        return np.diff(self.cumulative(edges)) / dt

    def grid(self, dt: float, n: int) -> GridFunction:
        return GridFunction(dt, self.cell_values(dt, n))

    def laplace(self, z):
        z = np.asarray(z, dtype=float)
        return 1.0 / (1.0 + self.scale * z**self.alpha)


@dataclass(frozen=True)
class ParetoKernel:
    """Heavy-tail density phi(t) = alpha (1+t)^-(1+alpha); unit mass.

    Satisfies the heavy-tail Laplace expansion 1 - phihat(z) ~ delta z^alpha
    with delta = Gamma(1-alpha) (checked by quadrature in the tests).
    """

    alpha: float

    def __post_init__(self):
        if not (0.5 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (1/2, 1), got {self.alpha}")

    @property
    def tail_scale(self) -> float:
        return gamma(1.0 - self.alpha)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise ValueError("the density is supported on t >= 0")
        return self.alpha * (1.0 + t) ** (-(1.0 + self.alpha))

    def cumulative(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - (1.0 + x) ** (-self.alpha)

    def cell_values(self, dt: float, n: int) -> np.ndarray:
        edges = np.arange(n + 1) * dt
        return np.diff(self.cumulative(edges)) / dt

    def grid(self, dt: float, n: int) -> GridFunction:
        return GridFunction(dt, self.cell_values(dt, n))


@dataclass(frozen=True)
class MlShapeDensity:
    """Pre-limit self-excitation density shaped like the Mittag-Leffler kernel.

    Unit mass, heavy tail with (A1)-scale delta = ``scale``; singular at the
    origin (t^(alpha-1)).  Its defining property: the excitation resolvent of
    a*phi is again of Mittag-Leffler shape,

        resolvent(a*phi) = (a/(1-a)) * K_{alpha, scale/(1-a)},

    so the renormalized self-resolvent equals a_T * K exactly.  For event
    simulation the density is capped at level ``cap`` (the clipped mass is
    ~1e-8 at cap=64), which bounds the thinning envelope.
    """

    alpha: float
    scale: float = 1.0
    cap: float = 64.0

    def __post_init__(self):
        if not (0.5 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (1/2, 1), got {self.alpha}")
        if self.scale <= 0.0 or self.cap <= 0.0:
            raise ValueError("scale and cap must be positive")

    @property
    def kernel(self) -> MittagLefflerKernel:
        return MittagLefflerKernel(self.alpha, self.scale)

    @property
    def tail_scale(self) -> float:
        return self.scale

    def cumulative(self, x):
        return self.kernel.cumulative(x)

    def cell_values(self, dt: float, n: int) -> np.ndarray:
        return self.kernel.cell_values(dt, n)

    def resolvent_exact(self, a: float) -> tuple[float, MittagLefflerKernel]:
        """Amplitude and kernel of the closed-form resolvent of a*phi."""
        if not (0.0 < a < 1.0):
            raise ValueError("amplitude must lie in (0, 1)")
        return a / (1.0 - a), MittagLefflerKernel(self.alpha, self.scale / (1.0 - a))


@dataclass(frozen=True)
class CrossExciteKernel:
    """Exponential cross-excitation density scaled to a chosen L1 norm."""

    rate: float = 1.0
    l1_norm: float = 1.0

    def __post_init__(self):
        if self.rate <= 0.0 or self.l1_norm <= 0.0:
            raise ValueError("rate and l1_norm must be positive")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.l1_norm * self.rate * np.exp(-self.rate * t)

    def cumulative(self, x):
        x = np.asarray(x, dtype=float)
        return self.l1_norm * (1.0 - np.exp(-self.rate * x))

    def cell_values(self, dt: float, n: int) -> np.ndarray:
        edges = np.arange(n + 1) * dt
        return np.diff(self.cumulative(edges)) / dt


def resolvent(phi: GridFunction, a: float) -> GridFunction:
    """psi solving psi = a*phi + a*(phi*psi) by forward substitution.

    Total mass satisfies int psi = a/(1-a) up to tail truncation; the kernel
    must be nonnegative and a subcritical (a < 1).
    """
    if not (0.0 < a < 1.0):
        raise ValueError(f"amplitude a={a} outside (0,1): supercritical or void")
    if np.any(phi.values < 0.0):
        raise ValueError("resolvent input must be nonnegative")
    return GridFunction(phi.dt, _core.resolvent_forward(phi.values, a, phi.dt))


@dataclass(frozen=True)
class PreLimitFamily:
    """Concrete pre-limit model for the kernel-convergence machinery.

    ``family`` selects the self-excitation density shape: "ml" (the
    resolvent-closed Mittag-Leffler shape; closed-form resolvents) or
    "pareto" (bounded density; resolvents computed numerically).
    """

    alpha1: float
    alpha2: float
    lam1: float = 1.0
    lam2: float = 1.0
    scale1: float = 1.0
    scale2: float = 1.0
    cross_limit: float = 0.5  # limit cross amplitude (b_inf)
    cross: CrossExciteKernel = field(default_factory=CrossExciteKernel)
    family: str = "ml"

    def __post_init__(self):
        if not (0.5 < self.alpha1 <= self.alpha2 < 1.0):
            raise ValueError("need 1/2 < alpha1 <= alpha2 < 1")
        if min(self.lam1, self.lam2) <= 0.0:
            raise ValueError("criticality constants must be positive")
        if self.cross_limit < 0.0:
            raise ValueError("cross amplitude must be nonnegative")
        if self.family not in ("ml", "pareto"):
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def coupling(self) -> float:
        """Effective coupling: limit cross amplitude times the cross L1 norm."""
        return self.cross_limit * self.cross.l1_norm

    @property
    def rho12(self) -> float:
        """Scale-matching ratio; equals 1 exactly under the matching condition."""
        return self.lam1 ** (1.0 / self.alpha1) / self.lam2 ** (1.0 / self.alpha2)

    def limit_kernel(self, component: int) -> MittagLefflerKernel:
        """Limit kernel of the component rescaled by its own criticality scale."""
        if component == 1:
            return MittagLefflerKernel(self.alpha1, self.scale1)
        return MittagLefflerKernel(self.alpha2, self.scale2)

    def density(self, component: int):
        alpha = self.alpha1 if component == 1 else self.alpha2
        scale = self.scale1 if component == 1 else self.scale2
        if self.family == "ml":
            return MlShapeDensity(alpha, scale)
        return ParetoKernel(alpha)

    def branching(self, component: int, T: float) -> float:
        alpha = self.alpha1 if component == 1 else self.alpha2
        lam = self.lam1 if component == 1 else self.lam2
        a = 1.0 - lam * T ** (-alpha)
        if a <= 0.0:
            raise ValueError(f"T={T} too small: branching ratio {a} <= 0")
        return a


def _rescaled_resolvent_cumulative(fam: PreLimitFamily, component: int, T: float,
                                   u_edges: np.ndarray) -> np.ndarray:
    """Cumulative mass of the resolvent of a_T*phi at the given (original-time)
    edge points; closed form for the ml family."""
    a = fam.branching(component, T)
    dens = fam.density(component)
    if fam.family == "ml":
        amp, ker = dens.resolvent_exact(a)
        return amp * ker.cumulative(u_edges)
    h = u_edges[1] - u_edges[0]
    phi = GridFunction(h, np.diff(dens.cumulative(u_edges)) / h)
    psi = resolvent(phi, a)
    return np.concatenate(([0.0], np.cumsum(psi.values) * h))


def renormalized_self_kernel(alpha: float, lam: float, T: float, dt: float, n: int,
                             family: str = "ml", scale: float = 1.0,
                             substeps: int = 16) -> GridFunction:
    """g_T on [0, n*dt): the self-resolvent rescaled by eps_T = (1-a_T)^(1/alpha).

    g_T(s) = ((1-a_T)/eps_T) * psi_T(s/eps_T); cell averages are exact with
    respect to the (piecewise-constant) resolvent representation.
    """
    fam = PreLimitFamily(alpha, alpha, lam, lam, scale, scale, family=family)
    a = fam.branching(1, T)
    eps = (1.0 - a) ** (1.0 / alpha)
    if family == "ml":
        edges = np.arange(n + 1) * dt
        cum = _rescaled_resolvent_cumulative(fam, 1, T, edges / eps)
        return GridFunction(dt, (1.0 - a) * np.diff(cum) / dt)
    n_res = substeps * n
    u_edges = np.arange(n_res + 1) * (dt / eps / substeps)
    cum = _rescaled_resolvent_cumulative(fam, 1, T, u_edges)
    cells = (1.0 - a) * np.diff(cum[::substeps]) / dt
    return GridFunction(dt, cells)


def renormalized_cross_kernel(fam: PreLimitFamily, T: float, dt: float, n: int,
                              substeps: int = 16) -> GridFunction:
    """The effective cross-resolvent rescaled at the first component's scale.

    Composition (in original time): Psi = phi12_T * (id + psi1) * (id + psi2)
    with phi12_T = b_T * psi12, then
    h_T(s) = T^(2 a1 - a2) (1-a_T^1)(1-a_T^2)/eps^1 * Psi(s/eps^1).
    """
    a1 = fam.branching(1, T)
    a2 = fam.branching(2, T)
    eps1 = (1.0 - a1) ** (1.0 / fam.alpha1)
    b_T = fam.cross_limit * T ** (fam.alpha2 - 2.0 * fam.alpha1)
    if b_T < 0.0:
        raise ValueError("inconsistent parameters: negative cross amplitude")
    if fam.cross_limit == 0.0:
        return GridFunction(dt, np.zeros(n))
    n_u = substeps * n
    h = dt / eps1 / substeps
    u_edges = np.arange(n_u + 1) * h
    psi1 = np.diff(_rescaled_resolvent_cumulative(fam, 1, T, u_edges)) / h
    psi2 = np.diff(_rescaled_resolvent_cumulative(fam, 2, T, u_edges)) / h
    phi12 = np.diff(fam.cross.cumulative(u_edges)) / h

    g = GridFunction(h, phi12)
    stage = GridFunction(h, phi12 + convolve(g, GridFunction(h, psi1)).values[:n_u])
    psi_full = stage.values + convolve(stage, GridFunction(h, psi2)).values[:n_u]
    pref = T ** (2.0 * fam.alpha1 - fam.alpha2) * b_T * (1.0 - a1) * (1.0 - a2) / eps1
    cells = pref * psi_full.reshape(n, substeps).mean(axis=1)
    return GridFunction(dt, cells)


def limit_cross_kernel(fam: PreLimitFamily, dt: float, n: int,
                       refine: int = 8) -> GridFunction:
    """L12 = coupling * (K1 * K2^(rho)) with the second kernel time-rescaled by
    rho12 when the scale-matching condition does not hold (rho12 = 1 restores
    the plain convolution).  Built on a refine-times finer grid, then
    aggregated to cell averages."""
    rho = fam.rho12
    k1 = MittagLefflerKernel(fam.alpha1, fam.scale1)
    # time rescale by rho multiplies the transform scale by rho^alpha2
    k2 = MittagLefflerKernel(fam.alpha2, fam.scale2 * rho**fam.alpha2)
    dtf = dt / refine
    nf = refine * n
    conv = convolve(k1.grid(dtf, nf), k2.grid(dtf, nf))
    cells = conv.values[:nf].reshape(n, refine).mean(axis=1)
    return GridFunction(dt, fam.coupling * cells)


def kernel_convergence_sweep(fam: PreLimitFamily, T_values, dt: float = 2.0**-10,
                             n: int | None = None, substeps: int = 32,
                             t_max: float = 1.0) -> list[dict]:
    """L2/L1 distances of the renormalized kernels to their limits over a
    horizon sweep: columns l2_self_1, l2_self_2, l2_cross, l1_product."""
    if n is None:
        n = int(round(t_max / dt))
    K1 = fam.limit_kernel(1).grid(dt, n)
    K2 = fam.limit_kernel(2).grid(dt, n)
    L12 = limit_cross_kernel(fam, dt, n)
    K1L = GridFunction(dt, K1.values * L12.values[:n])
    rows = []
    for T in T_values:
        g1 = renormalized_self_kernel(fam.alpha1, fam.lam1, T, dt, n,
                                      family=fam.family, scale=fam.scale1,
                                      substeps=substeps)
        g2 = renormalized_self_kernel(fam.alpha2, fam.lam2, T, dt, n,
                                      family=fam.family, scale=fam.scale2,
                                      substeps=substeps)
        hT = renormalized_cross_kernel(fam, T, dt, n, substeps=substeps)
        prod = GridFunction(dt, g1.values * hT.values[:n])
        rows.append({
            "T": T,
            "l2_self_1": l2_distance(g1, K1, t_max),
            "l2_self_2": l2_distance(g2, K2, t_max),
            "l2_cross": l2_distance(hT, L12, t_max),
            "l1_product": l1_distance(prod, K1L, t_max),
        })
    return rows


def prelimit_mean_profile(fam: PreLimitFamily, component: int, T: float,
                          dt: float, n: int) -> GridFunction:
    """Renormalized mean intensity E[V^{T,i}_t] of the *autonomous* component
    on the nodes 0..n of [0, n*dt].

    The baseline is constant in pre-limit time, so the renewal identity gives
    E[V_t] = (1 - a_T) * (1 + int_0^{Tt} resolvent); for the ml family this is
    the closed form 1 - a_T * E_alpha(-t^alpha * lam / scale).  Note the limit
    profile is the cumulative of the component's limit kernel at the scale
    scale/lam, NOT the drift profile of the injected-drift limit system.
    """
    t = np.arange(n + 1) * dt
    a = fam.branching(component, T)
    alpha = fam.alpha1 if component == 1 else fam.alpha2
    lam = fam.lam1 if component == 1 else fam.lam2
    scale = fam.scale1 if component == 1 else fam.scale2
    if fam.family == "ml":
        vals = 1.0 - a * mittag_leffler(alpha, 1.0, -(t**alpha) * lam / scale)
        return GridFunction(dt, vals)
    dens = fam.density(component)
    n_res = 16 * n
    u_edges = np.arange(n_res + 1) * (T * dt / n_res * n / n)  # step T*dt/16
    u_edges = np.linspace(0.0, T * n * dt, n_res + 1)
    h = u_edges[1] - u_edges[0]
    phi = GridFunction(h, np.diff(dens.cumulative(u_edges)) / h)
    psi = resolvent(phi, a)
    cum = np.concatenate(([0.0], np.cumsum(psi.values) * h))
    return GridFunction(dt, (1.0 - a) * (1.0 + cum[::16]))


def limit_mean_profile(fam: PreLimitFamily, component: int,
                       dt: float, n: int) -> GridFunction:
    """T -> infinity limit of :func:`prelimit_mean_profile`: the cumulative
    mass of the limit kernel rescaled by the criticality constant."""
    t = np.arange(n + 1) * dt
    alpha = fam.alpha1 if component == 1 else fam.alpha2
    lam = fam.lam1 if component == 1 else fam.lam2
    scale = fam.scale1 if component == 1 else fam.scale2
    return GridFunction(dt, 1.0 - mittag_leffler(alpha, 1.0, -(t**alpha) * lam / scale))


def prelimit_covariance(fam: PreLimitFamily, T: float, t: float, dt: float,
                        substeps: int = 16) -> float:
    """Quadrature value of Cov(V^{T,1}_t, V^{T,2}_t) from the renormalized
    kernels: int_0^t g_T^1(u) h_T(u) E[V^{T,1}_{t-u}] du."""
    n = int(round(t / dt))
    g1 = renormalized_self_kernel(fam.alpha1, fam.lam1, T, dt, n,
                                  family=fam.family, scale=fam.scale1,
                                  substeps=substeps)
    hT = renormalized_cross_kernel(fam, T, dt, n, substeps=substeps)
    mean1 = prelimit_mean_profile(fam, 1, T, dt, n)
    prod = g1.values * hT.values[:n]
    mid = 0.5 * (mean1.values[1:] + mean1.values[:-1])
    return float(np.sum(prod * mid[::-1]) * dt)


def limit_covariance(fam: PreLimitFamily, t: float, dt: float) -> float:
    """T -> infinity limit of :func:`prelimit_covariance`:
    coupling * int_0^t K1(u) (K1*K2)(u) F_1(t-u) du with F_1 the limit mean."""
    n = int(round(t / dt))
    k1 = fam.limit_kernel(1).grid(dt, n)
    l12 = limit_cross_kernel(fam, dt, n)
    mean1 = limit_mean_profile(fam, 1, dt, n)
    prod = k1.values * l12.values[:n]
    mid = 0.5 * (mean1.values[1:] + mean1.values[:-1])
    return float(np.sum(prod * mid[::-1]) * dt)
