# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of rhl._core.fallback (same signatures, same RNG order)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, log1p, sqrt, fabs

cnp.import_array()

KIND_PARETO = 0
KIND_EXP = 1
KIND_EXPSUM = 2


def resolvent_forward(cnp.ndarray[cnp.float64_t, ndim=1] phi, double a, double h):
    cdef Py_ssize_t n = phi.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] psi = np.empty(n)
    cdef Py_ssize_t k, j
    cdef double conv
    for k in range(n):
        conv = 0.0
        for j in range(k):
            conv += phi[k - 1 - j] * psi[j]
        psi[k] = a * phi[k] + a * h * conv
    return psi


def riccati_forward(cnp.ndarray[cnp.float64_t, ndim=1] weights,
                    cnp.ndarray[cnp.float64_t, ndim=1] u, double bound):
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] psi = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sq = np.empty(n)
    cdef Py_ssize_t k, j
    cdef double conv, val
    for k in range(n):
        conv = 0.0
        for j in range(k):
            conv += weights[k - 1 - j] * sq[j]
        val = conv - u[k]
        if not (val == val) or fabs(val) > bound:
            raise FloatingPointError(f"riccati iteration diverged at index {k}")
        psi[k] = val
        sq[k] = val * val
    return psi


def riccati_exponent_forward(cnp.ndarray[cnp.float64_t, ndim=1] weights,
                             cnp.ndarray[cnp.float64_t, ndim=1] u, double bound):
    cdef Py_ssize_t n = u.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] psi = np.empty(n)
    cdef Py_ssize_t k, j
    cdef double conv, val
    for k in range(n):
        conv = 0.0
        for j in range(k):
            conv += weights[k - 1 - j] * psi[j]
        val = u[k] - 0.5 * conv * conv
        if not (val == val) or fabs(val) > bound:
            raise FloatingPointError(f"riccati iteration diverged at index {k}")
        psi[k] = val
    return psi


def volterra_path(cnp.ndarray[cnp.float64_t, ndim=1] b,
                  cnp.ndarray[cnp.float64_t, ndim=1] weights,
                  cnp.ndarray[cnp.float64_t, ndim=1] z_over_sqrt_dt):
    cdef Py_ssize_t n = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s = np.empty(n)
    cdef Py_ssize_t k, j
    cdef double conv, vk
    for k in range(n):
        conv = 0.0
        for j in range(k):
            conv += weights[k - 1 - j] * s[j]
        vk = b[k] + conv
        v[k] = vk
        s[k] = sqrt(vk) * z_over_sqrt_dt[k] if vk > 0.0 else 0.0
    return v


cdef double _self_contribution(int kind, double p,
                               cnp.float64_t[:, :] nodes,
                               cnp.float64_t[:] states,
                               cnp.float64_t[:] hist, Py_ssize_t nhist,
                               double t):
    cdef double s = 0.0
    cdef Py_ssize_t i
    if kind == 0:  # pareto
        for i in range(nhist):
            s += exp(-(1.0 + p) * log1p(t - hist[i]))
        return s * p
    if kind == 1:  # exp
        return p * states[0]
    for i in range(nodes.shape[0]):
        s += nodes[i, 1] * states[i]
    return s


cdef void _decay_states(int kind, double p, cnp.float64_t[:, :] nodes,
                        cnp.float64_t[:] states, double dt):
    cdef Py_ssize_t i
    if kind == 1:
        states[0] *= exp(-p * dt)
    elif kind == 2:
        for i in range(nodes.shape[0]):
            states[i] *= exp(-nodes[i, 0] * dt)


cdef double _kernel_at_zero(int kind, double p, cnp.float64_t[:, :] nodes):
    cdef double s = 0.0
    cdef Py_ssize_t i
    if kind == 0 or kind == 1:
        return p
    for i in range(nodes.shape[0]):
        s += nodes[i, 1]
    return s


def hawkes_thinning(double T, double mu1, double mu2, double a1, double a2,
                    int kind1, double p1, cnp.ndarray[cnp.float64_t, ndim=2] nodes1,
                    int kind2, double p2, cnp.ndarray[cnp.float64_t, ndim=2] nodes2,
                    double cross_scale, double cross_rate,
                    object uni, long cap):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t1 = np.empty(1024)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t2 = np.empty(1024)
    cdef Py_ssize_t n1 = 0, n2 = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] states1 = np.zeros(max(1, nodes1.shape[0]))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] states2 = np.zeros(max(1, nodes2.shape[0]))
    cdef double cross_state = 0.0
    cdef double jump1 = a1 * _kernel_at_zero(kind1, p1, nodes1)
    cdef double jump2 = a2 * _kernel_at_zero(kind2, p2, nodes2)
    cdef double cross_jump = cross_scale * cross_rate
    cdef double lam1_bound = mu1, lam2_bound = mu2
    cdef double t = 0.0, btot, w, dt_step, t_new, pick, acc, lam1, lam2
    cdef bint accept

    # buffered uniforms: identical consumption order as the fallback
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf = uni._buf
    cdef Py_ssize_t bi = uni._i, blen = buf.shape[0]

    try:
        while True:
            btot = lam1_bound + lam2_bound
            if btot <= 0.0:
                break
            if bi + 3 > blen:
                buf = uni.refill()
                bi = 0
                blen = buf.shape[0]
            w = buf[bi]
            pick = buf[bi + 1] * btot
            acc = buf[bi + 2]
            bi += 3
            dt_step = -log(w) / btot
            t_new = t + dt_step
            if t_new > T:
                break
            _decay_states(kind1, p1, nodes1, states1, dt_step)
            _decay_states(kind2, p2, nodes2, states2, dt_step)
            cross_state *= exp(-cross_rate * dt_step)
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
                            "near criticality for this horizon")
                    if kind1 == 1:
                        states1[0] += 1.0
                    elif kind1 == 2:
                        states1 += 1.0
                    lam1_bound += jump1
                    cross_state += 1.0
                    lam2_bound += cross_jump
            else:
                lam2 = (mu2 + a2 * _self_contribution(kind2, p2, nodes2, states2, t2, n2, t)
                        + cross_jump * cross_state)
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
                            "near criticality for this horizon")
                    if kind2 == 1:
                        states2[0] += 1.0
                    elif kind2 == 2:
                        states2 += 1.0
                    lam2_bound += jump2
    finally:
        uni._i = bi
        uni._buf = buf
    return t1[:n1].copy(), t2[:n2].copy()
