"""Numba kernels for the fixed-step integrators and the telegraph sampler.

All kernels are compiled with ``nogil=True`` so independent simulations can
run concurrently from a thread pool.  They are deterministic for fixed
inputs (the telegraph kernel seeds its own RNG stream).  Time is computed
from step indices (t = k*dt + j*h) rather than accumulated, so the drive
phase stays accurate over 1e7+ substeps.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def bloch_rk4(out, s0, p0, q0, gamma, lam, eta, eps, delta, az, ax, wd,
              dt, n_sub):
    """Integrate the (s_z, p, q) system, recording all three every ``dt``.

    ``out`` has shape (n_samples, 3); out[k] = (s_z, p, q) at t = k*dt.
    Each sampling interval is split into ``n_sub`` RK4 substeps.
    """
    n = out.shape[0]
    h = dt / n_sub
    coh = gamma + 2.0 * eta
    s = s0
    p = p0
    q = q0
    for k in range(n):
        out[k, 0] = s
        out[k, 1] = p
        out[k, 2] = q
        tbase = k * dt
        for j in range(n_sub):
            t = tbase + j * h
            c = np.cos(wd * t)
            ez = eps + 2.0 * az * c
            ex = delta + 2.0 * ax * c
            k1s = -2.0 * gamma * s + lam - ex * p
            k1p = ex * s - coh * p - ez * q
            k1q = ez * p - coh * q
            c = np.cos(wd * (t + 0.5 * h))
            ez = eps + 2.0 * az * c
            ex = delta + 2.0 * ax * c
            s2 = s + 0.5 * h * k1s
            p2 = p + 0.5 * h * k1p
            q2 = q + 0.5 * h * k1q
            k2s = -2.0 * gamma * s2 + lam - ex * p2
            k2p = ex * s2 - coh * p2 - ez * q2
            k2q = ez * p2 - coh * q2
            s3 = s + 0.5 * h * k2s
            p3 = p + 0.5 * h * k2p
            q3 = q + 0.5 * h * k2q
            k3s = -2.0 * gamma * s3 + lam - ex * p3
            k3p = ex * s3 - coh * p3 - ez * q3
            k3q = ez * p3 - coh * q3
            c = np.cos(wd * (t + h))
            ez = eps + 2.0 * az * c
            ex = delta + 2.0 * ax * c
            s4 = s + h * k3s
            p4 = p + h * k3p
            q4 = q + h * k3q
            k4s = -2.0 * gamma * s4 + lam - ex * p4
            k4p = ex * s4 - coh * p4 - ez * q4
            k4q = ez * p4 - coh * q4
            s += h * (k1s + 2.0 * k2s + 2.0 * k3s + k4s) / 6.0
            p += h * (k1p + 2.0 * k2p + 2.0 * k3p + k4p) / 6.0
            q += h * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0


@njit(cache=True, nogil=True)
def _rho_rhs(r00, r01, r10, r11, ez, ex, g_relax, kappa, eta):
    coh = 0.5 * (g_relax + kappa) + 2.0 * eta
    d00 = -1j * 0.5 * ex * (r10 - r01) + g_relax * r11 - kappa * r00
    d11 = -1j * 0.5 * ex * (r01 - r10) - g_relax * r11 + kappa * r00
    d01 = -1j * (ez * r01 + 0.5 * ex * (r11 - r00)) - coh * r01
    d10 = -1j * (-ez * r10 + 0.5 * ex * (r00 - r11)) - coh * r10
    return d00, d01, d10, d11


@njit(cache=True, nogil=True)
def rho_rk4(sz_out, rho_out, store_rho, r00, r01, r10, r11,
            g_relax, kappa, eta, eps, delta, az, ax, wd, dt, n_sub):
    """Propagate the full complex density matrix, recording Tr[rho sigma_z].

    All four complex entries evolve independently so Hermiticity is a
    measured property rather than an enforced one.  When ``store_rho`` is
    true, rho_out[k] = (rho00, rho01, rho10, rho11) at each sample.
    """
    n = sz_out.shape[0]
    h = dt / n_sub
    for k in range(n):
        sz_out[k] = (r00 - r11).real
        if store_rho:
            rho_out[k, 0] = r00
            rho_out[k, 1] = r01
            rho_out[k, 2] = r10
            rho_out[k, 3] = r11
        tbase = k * dt
        for j in range(n_sub):
            t = tbase + j * h
            c = np.cos(wd * t)
            ez = eps + 2.0 * az * c
            ex = delta + 2.0 * ax * c
            a00, a01, a10, a11 = _rho_rhs(r00, r01, r10, r11, ez, ex,
                                          g_relax, kappa, eta)
            c = np.cos(wd * (t + 0.5 * h))
            ez = eps + 2.0 * az * c
            ex = delta + 2.0 * ax * c
            b00, b01, b10, b11 = _rho_rhs(r00 + 0.5 * h * a00,
                                          r01 + 0.5 * h * a01,
                                          r10 + 0.5 * h * a10,
                                          r11 + 0.5 * h * a11,
                                          ez, ex, g_relax, kappa, eta)
            c00, c01, c10, c11 = _rho_rhs(r00 + 0.5 * h * b00,
                                          r01 + 0.5 * h * b01,
                                          r10 + 0.5 * h * b10,
                                          r11 + 0.5 * h * b11,
                                          ez, ex, g_relax, kappa, eta)
            c = np.cos(wd * (t + h))
            ez = eps + 2.0 * az * c
            ex = delta + 2.0 * ax * c
            d00, d01, d10, d11 = _rho_rhs(r00 + h * c00, r01 + h * c01,
                                          r10 + h * c10, r11 + h * c11,
                                          ez, ex, g_relax, kappa, eta)
            r00 += h * (a00 + 2.0 * b00 + 2.0 * c00 + d00) / 6.0
            r01 += h * (a01 + 2.0 * b01 + 2.0 * c01 + d01) / 6.0
            r10 += h * (a10 + 2.0 * b10 + 2.0 * c10 + d10) / 6.0
            r11 += h * (a11 + 2.0 * b11 + 2.0 * c11 + d11) / 6.0


@njit(cache=True, nogil=True)
def rate_ode_rk4(out, s0, w, dw, amp, wd, dt, n_sub):
    """RK4 for the classical switching-rate equation ds/dt = -W s + dW(t)."""
    n = out.shape[0]
    h = dt / n_sub
    s = s0
    for k in range(n):
        out[k] = s
        tbase = k * dt
        for j in range(n_sub):
            t = tbase + j * h
            k1 = -w * s + dw + amp * np.cos(wd * t)
            mid = dw + amp * np.cos(wd * (t + 0.5 * h))
            k2 = -w * (s + 0.5 * h * k1) + mid
            k3 = -w * (s + 0.5 * h * k2) + mid
            k4 = -w * (s + h * k3) + dw + amp * np.cos(wd * (t + h))
            s += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


@njit(cache=True, nogil=True)
def telegraph(out, seed, w, dw, amp, wd, dt):
    """Sample one random telegraph trajectory with values in {-1, +1}.

    Flip probabilities use the exact two-state propagator over each step
    with the rates frozen at the step midpoint, which removes the O(W*dt)
    discretisation bias of a naive W*dt flip test (the total rate W is
    constant in time under the asymmetry-modulated drive convention).
    """
    np.random.seed(seed)
    n = out.shape[0]
    decay = (1.0 - np.exp(-w * dt)) / w
    s = 1.0
    for k in range(n):
        out[k] = s
        dw_t = dw + amp * np.cos(wd * (k + 0.5) * dt)
        # escape rate from +1 is (W - dW(t))/2, from -1 it is (W + dW(t))/2
        rate = 0.5 * (w - s * dw_t)
        if np.random.random() < rate * decay:
            s = -s
