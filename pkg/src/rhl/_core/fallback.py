"""Pure NumPy implementations of the sequential hot loops.

Selected at import time by :mod:`rhl._core` when the compiled extension is
unavailable (or when ``RHL_FORCE_FALLBACK=1``).  Every function here has a
signature-identical compiled twin in ``_ckernels.pyx`` consuming random
numbers in exactly the same order; scalar-state paths agree bit-for-bit,
while history-vector reductions may differ in floating-point summation order
(BLAS dot versus a plain loop) and agree to ~1e-12 instead.
"""
from __future__ import annotations

import math

import numpy as np

# self-excitation kernel kinds shared with the compiled backend
KIND_PARETO = 0
KIND_EXP = 1
KIND_EXPSUM = 2


def resolvent_forward(phi: np.ndarray, a: float, h: float) -> np.ndarray:
    """Solve psi = a*phi + a*(phi * psi) on the cell grid by forward substitution.

    ``phi`` holds cell values (exact cell masses divided by ``h``); the
    convolution uses the piecewise-constant rule, so cell k of the result
    depends only on cells < k of psi.
    """
    n = phi.shape[0]
    psi = np.empty(n)
    phirev = phi[::-1]
    for k in range(n):
        conv = h * np.dot(phirev[n - k:], psi[:k]) if k else 0.0
        psi[k] = a * phi[k] + a * conv
    return psi


def riccati_forward(weights: np.ndarray, u: np.ndarray, bound: float) -> np.ndarray:
    """Explicit forward stepping for psi(t_k) + u(t_k) = sum_{j<k} w_{k-1-j} psi(t_j)^2.

    ``weights[i]`` is the kernel mass over the lag cell [i*dt, (i+1)*dt).
    Raises ``FloatingPointError`` with the first bad index if |psi| exceeds
    ``bound`` (divergence of the explicit scheme).
    """
    n = u.shape[0]
    psi = np.empty(n)
    sq = np.empty(n)
    wrev = weights[::-1]
    nw = weights.shape[0]
    for k in range(n):
        conv = np.dot(wrev[nw - k:], sq[:k]) if k else 0.0
        val = conv - u[k]
        if not np.isfinite(val) or abs(val) > bound:
            raise FloatingPointError(f"riccati iteration diverged at index {k}")
        psi[k] = val
        sq[k] = val * val
    return psi


def riccati_exponent_forward(weights: np.ndarray, u: np.ndarray, bound: float) -> np.ndarray:
    """Explicit forward stepping for psi(t_k) = u(t_k) - (1/2)(sum_{j<k} w_{k-1-j} psi(t_j))^2.

    This is the Laplace-exponent equation of the additive-drift square-root
    Volterra class (square outside the convolution); for an exponential kernel
    it collapses to the classical Feynman-Kac Riccati ODE.
    """
    n = u.shape[0]
    psi = np.empty(n)
    wrev = weights[::-1]
    nw = weights.shape[0]
    for k in range(n):
        conv = np.dot(wrev[nw - k:], psi[:k]) if k else 0.0
        val = u[k] - 0.5 * conv * conv
        if not np.isfinite(val) or abs(val) > bound:
            raise FloatingPointError(f"riccati iteration diverged at index {k}")
        psi[k] = val
    return psi


def volterra_path(b: np.ndarray, weights: np.ndarray, z_over_sqrt_dt: np.ndarray) -> np.ndarray:
    """Single-path explicit Volterra-Euler recursion.

    v_k = b_k + sum_{j<k} w_{k-1-j} * sqrt(max(v_j, 0)) * z_j / sqrt(dt),
    with ``z_over_sqrt_dt`` already divided by sqrt(dt).  The state is kept
    signed; the positive part enters only through the square root.
    """
    n = b.shape[0]
    v = np.empty(n)
    s = np.empty(n)
    wrev = weights[::-1]
    nw = weights.shape[0]
    for k in range(n):
        conv = np.dot(wrev[nw - k:], s[:k]) if k else 0.0
        v[k] = b[k] + conv
        vk = v[k]
        s[k] = np.sqrt(vk) * z_over_sqrt_dt[k] if vk > 0.0 else 0.0
    return v


class UniformBuffer:
    """Block-buffered uniforms so both backends draw in the same order."""

    def __init__(self, rng: np.random.Generator, block: int = 1 << 16):
        self._rng = rng
        self._block = block
        self._buf = rng.random(block)
        self._i = 0

    def refill(self) -> np.ndarray:
        self._buf = self._rng.random(self._block)
        self._i = 0
        return self._buf

    def next(self) -> float:
        if self._i >= self._buf.shape[0]:
            self.refill()
        x = self._buf[self._i]
        self._i += 1
        return x


def _self_contribution(kind, p, nodes, states, hist, nhist, t):
    """a-less sum of the self kernel over past events at time t."""
    if kind == KIND_PARETO:
        if nhist == 0:
            return 0.0
        dt = t - hist[:nhist]
        return float(np.exp(-(1.0 + p) * np.log1p(dt)).sum() * p)
    if kind == KIND_EXP:
        # states[0] holds sum of exp(-p*(t_last - t_i)); caller decays it
        return p * states[0]
    # KIND_EXPSUM: states holds per-node sums of exp(-r_m (t - t_i))
    return float(np.dot(nodes[:, 1], states))


def _decay_states(kind, p, nodes, states, dt):
    if kind == KIND_EXP:
        states[0] *= math.exp(-p * dt)
    elif kind == KIND_EXPSUM:
        states *= np.exp(-nodes[:, 0] * dt)


def _kernel_at_zero(kind, p, nodes):
    if kind == KIND_PARETO:
        return p
    if kind == KIND_EXP:
        return p
    return float(nodes[:, 1].sum())


def hawkes_thinning(
    T: float,
    mu1: float,
    mu2: float,
    a1: float,
    a2: float,
    kind1: int,
    p1: float,
    nodes1: np.ndarray,
    kind2: int,
    p2: float,
    nodes2: np.ndarray,
    cross_scale: float,
    cross_rate: float,
    uni: UniformBuffer,
    cap: int,
):
    """Ogata thinning for the bivariate triangular Hawkes process.

    Both self kernels are nonincreasing, so the exact intensity evaluated at
    the last candidate is a valid upper bound until the next event; the bound
    is refreshed (tightened) at every candidate and bumped by the kernel's
    value at zero on each accepted event.  Component 2 carries an exponential
    cross term fed by component-1 events (decayed exactly in O(1)).

    ``nodes*`` are (m, 2) arrays of (rate, weight) rows for the
    sum-of-exponentials kind and are ignored otherwise.

    Returns (times1, times2) as float arrays.
    """
    t1 = np.empty(1024)
    t2 = np.empty(1024)
    n1 = n2 = 0

    states1 = np.zeros(max(1, nodes1.shape[0]))
    states2 = np.zeros(max(1, nodes2.shape[0]))
    cross_state = 0.0  # sum of exp(-cross_rate*(t - s)) over component-1 events

    jump1 = a1 * _kernel_at_zero(kind1, p1, nodes1)
    jump2 = a2 * _kernel_at_zero(kind2, p2, nodes2)
    cross_jump = cross_scale * cross_rate

    lam1_bound = mu1
    lam2_bound = mu2
    t = 0.0
    while True:
        btot = lam1_bound + lam2_bound
        if btot <= 0.0:
            break
        # triple-draw with the same buffer boundary logic as the compiled twin
        if uni._i + 3 > uni._buf.shape[0]:
            uni.refill()
        w = uni._buf[uni._i]
        pick = uni._buf[uni._i + 1] * btot
        acc = uni._buf[uni._i + 2]
        uni._i += 3
        dt_step = -math.log(w) / btot
        t_new = t + dt_step
        if t_new > T:
            break
        # decay the O(1) states to the candidate time
        _decay_states(kind1, p1, nodes1, states1, dt_step)
        _decay_states(kind2, p2, nodes2, states2, dt_step)
        cross_state *= math.exp(-cross_rate * dt_step)
        t = t_new
        if pick < lam1_bound:
            lam1 = mu1 + a1 * _self_contribution(kind1, p1, nodes1, states1, t1, n1, t)
            accept = acc * lam1_bound < lam1
            lam1_bound = lam1
            if accept:
                if n1 == t1.shape[0]:
                    t1 = np.concatenate([t1, np.empty(t1.shape[0])])
                t1[n1] = t
                n1 += 1
                if n1 + n2 > cap:
                    raise RuntimeError(
                        f"event cap {cap} exceeded at t={t:.6g}: parameters too "
                        "near criticality for this horizon"
                    )
                if kind1 == KIND_EXP:
                    states1[0] += 1.0
                elif kind1 == KIND_EXPSUM:
                    states1 += 1.0
                lam1_bound += jump1
                cross_state += 1.0
                lam2_bound += cross_scale * cross_rate
        else:
            lam2 = (
                mu2
                + a2 * _self_contribution(kind2, p2, nodes2, states2, t2, n2, t)
                + cross_jump * cross_state
            )
            accept = acc * lam2_bound < lam2
            lam2_bound = lam2
            if accept:
                if n2 == t2.shape[0]:
                    t2 = np.concatenate([t2, np.empty(t2.shape[0])])
                t2[n2] = t
                n2 += 1
                if n1 + n2 > cap:
                    raise RuntimeError(
                        f"event cap {cap} exceeded at t={t:.6g}: parameters too "
                        "near criticality for this horizon"
                    )
                if kind2 == KIND_EXP:
                    states2[0] += 1.0
                elif kind2 == KIND_EXPSUM:
                    states2 += 1.0
                lam2_bound += jump2
    return t1[:n1].copy(), t2[:n2].copy()
