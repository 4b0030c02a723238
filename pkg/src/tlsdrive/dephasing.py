"""Qubit dephasing time from a noise spectrum via the window-function integral.

T_phi solves the self-consistent relation

    1/T_phi^2 = C0 * int_0^inf S(w) F(w T_phi) dw

where S is the symmetric two-sided noise density (the stored one-sided
power divided by 2) and F is either the Gaussian-noise window
sin^2(x/2)/(x/2)^2 or its step approximation (F = 1 for w <= 1/T_phi,
else 0).  Spectral lines contribute weight * F(w_line T) exactly.  The
implicit equation is solved by damped fixed-point iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .spectrum import Spectrum

GAUSSIAN_WINDOW = "gaussian_sinc"
STEP_WINDOW = "step"


@dataclass(frozen=True)
class DephasingConfig:
    """Coupling constant, window choice and solver controls."""

    c0: float = 1.0
    window: str = GAUSSIAN_WINDOW
    fixed_point_tol: float = 1.0e-6
    max_iter: int = 100

    def __post_init__(self):
        if self.c0 <= 0:
            raise InvalidParameterError("coupling constant c0 must be > 0")
        if not 0 < self.fixed_point_tol < 1:
            raise InvalidParameterError("fixed_point_tol must be in (0, 1)")
        if self.max_iter < 1:
            raise InvalidParameterError("max_iter must be >= 1")
        if self.window not in (GAUSSIAN_WINDOW, STEP_WINDOW):
            raise InvalidParameterError(f"unknown window {self.window!r}")


@dataclass(frozen=True)
class TphiResult:
    t_phi: float
    iterations: int
    converged: bool


def window_gaussian(x) -> np.ndarray | float:
    """Gaussian-noise window sin^2(x/2)/(x/2)^2, continuous at x = 0."""
    x = np.asarray(x, dtype=float)
    half = 0.5 * x
    out = np.ones_like(x)
    nz = half != 0
    out[nz] = (np.sin(half[nz]) / half[nz]) ** 2
    return out if out.ndim else float(out)


def _window_integral(s: Spectrum, t_phi: float, window: str) -> float:
    """int_0^inf S_two_sided(w) F(w T) dw over the grid plus exact lines.

    The density is extended flat from the first grid point down to w = 0
    (the sliver below the spectral resolution would otherwise be lost and
    bias T_phi high).
    """
    two_sided = 0.5 * s.power
    freqs = np.concatenate(([0.0], s.freqs))
    vals = np.concatenate(([two_sided[0]], two_sided))
    if window == GAUSSIAN_WINDOW:
        total = float(np.trapezoid(vals * window_gaussian(freqs * t_phi),
                                   freqs))
        for w, wt in s.lines:
            total += 0.5 * wt * window_gaussian(w * t_phi)
    else:
        cut = 1.0 / t_phi
        hi = min(cut, s.omega_max)
        inside = (freqs > 0.0) & (freqs < hi)
        nodes = np.concatenate(([0.0], freqs[inside], [hi]))
        node_vals = np.interp(nodes, freqs, vals)
        total = float(np.trapezoid(node_vals, nodes))
        for w, wt in s.lines:
            if w <= cut:
                total += 0.5 * wt
    return total


def _lorentzian_guess(s: Spectrum, c0: float) -> float:
    """Step-window closed form on the spectrum's best-fit Lorentzian."""
    norm = s.norm_total if s.norm_total > 0 else 1.0
    s0 = 0.5 * s.power[0]
    if s0 <= 0:
        return 1.0 / math.sqrt(c0 * norm)
    w_fit = norm / (math.pi * s0)
    t = 1.0 / math.sqrt(c0 * norm)
    for _ in range(8):
        integral = (norm / math.pi) * math.atan(1.0 / (w_fit * t))
        if integral <= 0:
            break
        t = 0.5 * (t + 1.0 / math.sqrt(c0 * integral))
    return t


def tphi_solve(s: Spectrum, cfg: DephasingConfig) -> TphiResult:
    """Solve the self-consistent dephasing-time relation.

    Damped fixed-point iteration T <- (T + g(T))/2 with
    g(T) = [C0 int S F(wT)]^{-1/2}, started from the step-window closed
    form of the spectrum's best-fit Lorentzian.  A spectrum with no
    weight signals divergent T_phi as (inf, 0, False).
    """
    has_weight = (s.power.sum() > 0) or any(w > 0 for _, w in s.lines)
    if not has_weight:
        return TphiResult(t_phi=math.inf, iterations=0, converged=False)
    t = _lorentzian_guess(s, cfg.c0)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        integral = _window_integral(s, t, cfg.window)
        if integral <= 0:
            return TphiResult(t_phi=math.inf, iterations=iterations,
                              converged=False)
        g = 1.0 / math.sqrt(cfg.c0 * integral)
        t_new = 0.5 * (t + g)
        if abs(t_new - t) <= cfg.fixed_point_tol * abs(t_new):
            t = t_new
            converged = True
            break
        t = t_new
    return TphiResult(t_phi=t, iterations=iterations, converged=converged)


def enhancement_ratio(driven: Spectrum, undriven: Spectrum,
                      cfg: DephasingConfig) -> float:
    """T_phi with drive divided by T_phi without."""
    res_d = tphi_solve(driven, cfg)
    res_0 = tphi_solve(undriven, cfg)
    if not (res_d.converged and res_0.converged):
        raise InvalidParameterError(
            "dephasing-time solve did not converge for "
            f"{'driven' if not res_d.converged else 'undriven'} spectrum")
    return res_d.t_phi / res_0.t_phi
