"""Closed-form classical stochastic resonance and a telegraph-process oracle.

Drive convention
----------------
The oscillating field tilts the double well, modulating the *asymmetry* of
the switching rates while leaving their sum constant:

    W+(t) = (W - dW - A cos(w_d t)) / 2      escape rate from s = +1
    W-(t) = (W + dW + A cos(w_d t)) / 2      escape rate from s = -1

so W(t) = W+ + W- = W and dW(t) = W- - W+ = dW + A cos(w_d t).  For this
rate model the driven spectrum

    S(w) = (1 - R) (W/pi)/(W^2 + w^2) + (R/2)[delta(w-w_d) + delta(w+w_d)],
    R = (A^2/2)/(W^2 + w_d^2)

is exact (not merely weak-drive perturbative): the conditional fluctuation
autocorrelation decays at the constant rate W, and the coherent mean
response A cos(w_d t - phi)/sqrt(W^2 + w_d^2) carries weight R.  Both rates
stay non-negative only for A + |dW| <= W, which bounds the validity of the
stochastic sampler.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import ceil

import numpy as np

from . import _kernels
from .errors import (InvalidParameterError, StabilityError, ValidityError,
                     WeakDriveValidityWarning)
from .series import SAMPLE_PATH, TimeSeries, sample_count
from .spectrum import Spectrum, average_spectra, psd_from_timeseries

#: flip probability per step must stay below this (sampler resolution bound)
MAX_RATE_DT = 0.05
#: internal RK4 step satisfies h * max(W, w_d) <= this
STABILITY_MARGIN = 0.1


@dataclass(frozen=True)
class ClassicalTls:
    """Two-state fluctuator with total rate W, asymmetry dW and drive (A, w_d)."""

    w_total: float
    dw: float = 0.0
    drive_amp: float = 0.0
    drive_freq: float = 0.0

    def __post_init__(self):
        if self.w_total <= 0:
            raise InvalidParameterError("w_total must be positive")
        if abs(self.dw) > self.w_total:
            raise InvalidParameterError("|dw| must not exceed w_total")
        if self.drive_amp < 0 or self.drive_freq < 0:
            raise InvalidParameterError("drive_amp and drive_freq must be >= 0")

    def rates_nonnegative(self) -> bool:
        """True when both instantaneous rates stay >= 0 over a drive cycle."""
        return self.drive_amp + abs(self.dw) <= self.w_total * (1 + 1e-12)


def lorentzian_psd(tls: ClassicalTls, omega) -> np.ndarray | float:
    """Two-sided undriven PSD, normalised so its integral over all w is 1."""
    if tls.drive_amp != 0:
        raise ValidityError("lorentzian_psd is the undriven (A = 0) spectrum")
    return _lorentzian(tls.w_total, omega)


def _lorentzian(w_total: float, omega):
    omega = np.asarray(omega, dtype=float)
    out = (w_total / np.pi) / (w_total ** 2 + omega ** 2)
    return out if out.ndim else float(out)


def redistribution_ratio(tls: ClassicalTls) -> float:
    """Fraction of spectral weight the drive moves out of the Lorentzian.

    Returns the raw R = (A^2/2)/(W^2 + w_d^2) without clamping; a value
    above 1 is flagged with :class:`WeakDriveValidityWarning` because the
    closed-form redistribution result is outside its range of validity
    there.
    """
    r = (tls.drive_amp ** 2 / 2.0) / (tls.w_total ** 2 + tls.drive_freq ** 2)
    if r > 1.0:
        warnings.warn(
            f"redistribution ratio {r:.3g} > 1: weak-field formula outside "
            "its validity range", WeakDriveValidityWarning, stacklevel=2)
    return r


@dataclass(frozen=True)
class DrivenPsd:
    """Driven spectrum: smooth background plus exact delta components."""

    background: object                      # callable w -> two-sided density
    delta_weights: tuple                    # ((w, weight), ...) on full axis
    ratio: float

    def total_weight(self) -> float:
        """Analytic two-sided integral: background plus delta weights."""
        return (1.0 - self.ratio) + sum(w for _, w in self.delta_weights)


def driven_psd_weak(tls: ClassicalTls) -> DrivenPsd:
    """Driven two-sided PSD as (1-R) x Lorentzian plus deltas at +-w_d."""
    r = redistribution_ratio(tls)
    if r > 1.0:
        raise ValidityError(
            f"R = {r:.3g} > 1: driven spectrum undefined, reduce drive_amp "
            "or raise drive_freq")
    w_total = tls.w_total

    def background(omega):
        return (1.0 - r) * _lorentzian(w_total, omega)

    if r == 0.0:
        deltas = ()
    else:
        deltas = ((tls.drive_freq, r / 2.0), (-tls.drive_freq, r / 2.0))
    return DrivenPsd(background=background, delta_weights=deltas, ratio=r)


def _substeps(tls: ClassicalTls, fs: float, limit: int = 100_000) -> int:
    scale = max(tls.w_total, tls.drive_freq)
    n_sub = max(1, ceil(scale / (STABILITY_MARGIN * fs)))
    if n_sub > limit:
        raise StabilityError(
            f"sampling rate {fs} needs {n_sub} substeps against frequency "
            f"scale {scale}; raise fs")
    return n_sub


def rate_ode_trajectory(tls: ClassicalTls, s0: float, fs: float,
                        t_max: float) -> TimeSeries:
    """Deterministic population difference under the driven rate equation.

    Integrates ds/dt = -W s + dW + A cos(w_d t) with fixed-step RK4,
    subdividing each sampling interval to keep h*max(W, w_d) <= 0.1.
    """
    if not -1.0 <= s0 <= 1.0:
        raise InvalidParameterError("s0 must lie in [-1, 1]")
    n = sample_count(fs, t_max)
    n_sub = _substeps(tls, fs)
    out = np.empty(n)
    _kernels.rate_ode_rk4(out, s0, tls.w_total, tls.dw, tls.drive_amp,
                          tls.drive_freq, 1.0 / fs, n_sub)
    return TimeSeries(out, fs, t_max, initial_state=f"s0={s0:g}",
                      kind="relaxation")


def rate_ode_exact(tls: ClassicalTls, s0: float, t) -> np.ndarray:
    """Integrating-factor solution of the driven rate equation."""
    t = np.asarray(t, dtype=float)
    w, dw, a, wd = tls.w_total, tls.dw, tls.drive_amp, tls.drive_freq
    decay = np.exp(-w * t)
    out = s0 * decay + (dw / w) * (1.0 - decay)
    if a != 0.0:
        denom = w ** 2 + wd ** 2
        out = out + a * (w * np.cos(wd * t) + wd * np.sin(wd * t)
                         - w * decay) / denom
    return out


def _check_telegraph_preconditions(tls: ClassicalTls, fs: float) -> None:
    if not tls.rates_nonnegative():
        raise InvalidParameterError(
            f"instantaneous switching rates go negative over the drive "
            f"cycle (need A + |dW| <= W, got {tls.drive_amp} + {abs(tls.dw)}"
            f" > {tls.w_total}); no valid telegraph process exists")
    max_rate = 0.5 * (tls.w_total + abs(tls.dw) + tls.drive_amp)
    if max_rate / fs > MAX_RATE_DT:
        raise InvalidParameterError(
            f"max rate x dt = {max_rate / fs:.3g} exceeds {MAX_RATE_DT}; "
            "raise fs")
    if tls.drive_freq / fs > np.pi / 4:
        raise InvalidParameterError(
            "sampling must resolve the drive: need w_d/fs <= pi/4")


def telegraph_sample(tls: ClassicalTls, seed: int, fs: float,
                     t_max: float) -> TimeSeries:
    """One random telegraph trajectory (values in {-1, +1})."""
    _check_telegraph_preconditions(tls, fs)
    n = sample_count(fs, t_max)
    out = np.empty(n)
    _kernels.telegraph(out, seed, tls.w_total, tls.dw, tls.drive_amp,
                       tls.drive_freq, 1.0 / fs)
    return TimeSeries(out, fs, t_max, initial_state="+1", kind=SAMPLE_PATH)


def averaged_telegraph_psd(tls: ClassicalTls, n_seeds: int, fs: float,
                           t_max: float, seed0: int = 0,
                           chunk: int = 64) -> Spectrum:
    """Periodogram averaged over ``n_seeds`` independent trajectories."""
    if n_seeds < 1:
        raise InvalidParameterError("need at least one seed")
    _check_telegraph_preconditions(tls, fs)
    n = sample_count(fs, t_max)
    dt = 1.0 / fs
    acc = None
    buf = np.empty((chunk, n))
    done = 0
    while done < n_seeds:
        m = min(chunk, n_seeds - done)
        for i in range(m):
            _kernels.telegraph(buf[i], seed0 + done + i, tls.w_total, tls.dw,
                               tls.drive_amp, tls.drive_freq, dt)
        mag = np.abs(np.fft.rfft(buf[:m], axis=1)) ** 2
        sums = mag.sum(axis=0)
        acc = sums if acc is None else acc + sums
        done += m
    two = acc * dt / (2.0 * np.pi * n * n_seeds)
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
    dc = float(two[0])
    power = 2.0 * two[1:]
    if n % 2 == 0:
        power[-1] = two[-1]
    domega = omega[1]
    meta = {"fs": fs, "t_max": t_max, "estimator": "periodogram",
            "segments": 1, "window": "none", "averaged": n_seeds,
            "seed0": seed0}
    return Spectrum(freqs=omega[1:], power=power, dc=dc,
                    norm_total=float(domega * (dc + power.sum())), meta=meta)
