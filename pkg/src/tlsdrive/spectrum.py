"""One-sided noise power spectral densities and band-weight measures.

Conventions
-----------
``Spectrum.power`` holds the one-sided density: twice the symmetric
two-sided density S(w), sampled on an ascending w > 0 grid.  With the
normalisation used throughout the package the two-sided integral of an
undriven fluctuator spectrum is 1, so ``norm_total`` of such a spectrum
is 1 up to estimator error.  The w = 0 bin (the series mean) is stored
separately in ``dc`` and never enters band integrals.  Singular spectral
lines (delta components of analytic driven spectra) are carried exactly
as (frequency, folded weight) pairs in ``lines``; rasterising them onto
a grid is never done here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .errors import DegenerateInputError, InvalidInputError
from .series import RELAXATION, SAMPLE_PATH, TimeSeries

CORRELATION = "correlation"
PERIODOGRAM = "periodogram"


@dataclass
class Spectrum:
    freqs: np.ndarray
    power: np.ndarray
    dc: float = 0.0
    norm_total: float = 0.0
    lines: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.power = np.asarray(self.power, dtype=float)
        if self.freqs.ndim != 1 or self.freqs.shape != self.power.shape:
            raise InvalidInputError("freqs and power must be 1-d and equal length")
        if self.freqs.size < 2:
            raise InvalidInputError("spectrum needs at least 2 frequency bins")
        if np.any(self.freqs <= 0) or np.any(np.diff(self.freqs) <= 0):
            raise InvalidInputError("freqs must be strictly ascending and > 0")
        if np.any(self.power < 0):
            raise InvalidInputError("power must be non-negative")

    @property
    def omega_min(self) -> float:
        return float(self.freqs[0])

    @property
    def omega_max(self) -> float:
        return float(self.freqs[-1])


def _fold_onesided(two_sided: np.ndarray, even_n: bool) -> np.ndarray:
    """Drop the DC bin and fold the symmetry factor into w > 0 bins."""
    one = 2.0 * two_sided[1:]
    if even_n:
        one[-1] = two_sided[-1]  # Nyquist bin has no mirror image
    return one


def psd_from_timeseries(ts: TimeSeries, estimator: str | None = None,
                        detrend: bool = False, segments: int = 1,
                        normalize: bool | None = None) -> Spectrum:
    """Estimate the one-sided PSD of a time series.

    Relaxation series are read as the correlation function itself, so the
    density is the cosine transform S(w) = (1/pi) * Re int_0^T s_z(t)
    e^{-iwt} dt; negative excursions of the finite transform (dispersive
    wings of driven-comb components) are clipped at zero and the result
    is rescaled so the two-sided integral equals the conserved value
    s_z(0), which the weight sum rule demands (``normalize=False`` keeps
    the raw clipped transform; the pre-normalisation totals stay in
    ``meta``).  Sample paths get the periodogram |FFT|^2 * dt / (2 pi N),
    whose integral already equals the mean square exactly, optionally
    segment-averaged (boxcar window, 50% overlap) when ``segments`` > 1.
    """
    if estimator is None:
        estimator = CORRELATION if ts.kind == RELAXATION else PERIODOGRAM
    if estimator not in (CORRELATION, PERIODOGRAM):
        raise InvalidInputError(f"unknown estimator {estimator!r}")
    if segments < 1:
        raise InvalidInputError("segments must be >= 1")
    if normalize is None:
        normalize = estimator == CORRELATION
    x = ts.values
    n = x.size
    dt = ts.dt
    offset = 0.0
    meta = {
        "fs": ts.fs,
        "t_max": ts.t_max,
        "estimator": estimator,
        "segments": segments,
        "window": "none",
        "detrended": bool(detrend),
        "initial_state": ts.initial_state,
    }

    if estimator == CORRELATION:
        if segments != 1:
            raise InvalidInputError(
                "segment averaging only applies to the periodogram estimator")
        if detrend:
            # steady-state offset, estimated from the trailing quarter
            offset = float(np.mean(x[-(n // 4):]))
            x = x - offset
        fx = np.fft.rfft(x)
        omega = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
        t_last = (n - 1) * dt
        two = (dt / np.pi) * (fx.real
                              - 0.5 * x[0]
                              - 0.5 * x[-1] * np.cos(omega * t_last))
        signed_total = _implied_total(two, omega, n)
        two = np.clip(two, 0.0, None)
        clipped_total = _implied_total(two, omega, n)
        if normalize and clipped_total > 0:
            two *= signed_total / clipped_total
        dc = float(two[0])
        power = _fold_onesided(two, n % 2 == 0)
        freqs = omega[1:]
        meta["signed_total"] = signed_total
        meta["clipped_total"] = clipped_total
        meta["sum_rule_normalized"] = bool(normalize)
        meta["offset"] = offset
    else:
        if detrend:
            offset = float(np.mean(x))
            x = x - offset
            meta["offset"] = offset
        if segments == 1:
            fx = np.fft.rfft(x)
            omega = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
            two = (np.abs(fx) ** 2) * dt / (2.0 * np.pi * n)
            dc = float(two[0])
            power = _fold_onesided(two, n % 2 == 0)
            freqs = omega[1:]
        else:
            nper = int(2 * n // (segments + 1))
            if nper < 2:
                raise InvalidInputError("too many segments for series length")
            f, pxx = signal.welch(x, fs=ts.fs, window="boxcar", nperseg=nper,
                                  noverlap=nper // 2, detrend=False,
                                  scaling="density", return_onesided=True)
            # scipy normalises against ordinary frequency; rescale to angular
            omega = 2.0 * np.pi * f
            two_scaled = pxx / (2.0 * np.pi)   # already one-sided except DC
            dc = float(two_scaled[0])
            power = two_scaled[1:]
            freqs = omega[1:]
            meta["window"] = "boxcar"
            meta["nperseg"] = nper

    domega = freqs[0]
    norm_total = float(domega * (dc + power.sum()))
    return Spectrum(freqs=freqs, power=power, dc=dc, norm_total=norm_total,
                    meta=meta)


def _implied_total(two_sided: np.ndarray, omega: np.ndarray, n: int) -> float:
    dom = omega[1]
    weights = np.full(two_sided.size, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return float(dom * np.dot(weights, two_sided))


def spectrum_from_analytic(background, deltas, freqs) -> Spectrum:
    """Rasterise a two-sided analytic density plus delta components.

    ``background`` maps |w| to the two-sided density; ``deltas`` is a list
    of (w, weight) pairs on the full axis (mirror entries at -w are folded
    onto the positive line).
    """
    freqs = np.asarray(freqs, dtype=float)
    bg = np.clip(np.asarray(background(freqs), dtype=float), 0.0, None)
    power = 2.0 * bg
    folded: dict[float, float] = {}
    for w, wt in deltas:
        key = abs(float(w))
        if key == 0.0:
            raise InvalidInputError("delta at w=0 is a DC offset, not a line")
        folded[key] = folded.get(key, 0.0) + float(wt)
    lines = tuple(sorted(folded.items()))
    dc = float(background(0.0))
    # background weight including the unresolved [0, w_min) sliver
    grid_part = float(np.trapezoid(power, freqs))
    edge = (dc + bg[0]) * freqs[0]
    norm_total = grid_part + edge + sum(w for _, w in lines)
    return Spectrum(freqs=freqs, power=power, dc=dc, norm_total=norm_total,
                    lines=lines, meta={"estimator": "analytic"})


def band_weight(s: Spectrum, omega_lo: float, omega_hi: float) -> float:
    """Two-sided-equivalent spectral weight in [omega_lo, omega_hi].

    Trapezoidal on the stored one-sided density (symmetry factor already
    folded in), with interpolated band edges; spectral lines inside the
    band contribute their weights exactly.  The DC bin never contributes.
    """
    if omega_lo < 0 or omega_hi < omega_lo:
        raise InvalidInputError("need 0 <= omega_lo <= omega_hi")
    if omega_hi > s.omega_max * (1 + 1e-9):
        raise InvalidInputError(
            f"band edge {omega_hi} beyond grid Nyquist {s.omega_max}")
    if omega_hi == omega_lo:
        return 0.0
    lo = max(omega_lo, s.omega_min)
    hi = min(omega_hi, s.omega_max)
    total = 0.0
    if hi > lo:
        inside = (s.freqs > lo) & (s.freqs < hi)
        nodes = np.concatenate(([lo], s.freqs[inside], [hi]))
        vals = np.interp(nodes, s.freqs, s.power)
        total = float(np.trapezoid(vals, nodes))
    for w, wt in s.lines:
        if omega_lo < w <= omega_hi:
            total += wt
    return total


def empirical_redistribution(driven: Spectrum, undriven: Spectrum,
                             omega_cut: float) -> float:
    """Fraction of low-frequency weight removed by the drive.

    Returns 1 - B_d(0, omega_cut) / B_0(0, omega_cut) with B the band
    weight.  ``omega_cut`` should sit between the fluctuator switching
    rate and the drive frequency.
    """
    for s in (driven, undriven):
        if omega_cut > s.omega_max * (1 + 1e-9) or omega_cut <= s.omega_min:
            raise InvalidInputError(
                "omega_cut must lie inside both spectral grids")
    b_driven = band_weight(driven, 0.0, omega_cut)
    b_undriven = band_weight(undriven, 0.0, omega_cut)
    if b_undriven <= 0 or not np.isfinite(b_undriven):
        raise DegenerateInputError("undriven band weight vanishes")
    return 1.0 - b_driven / b_undriven


def log_grid(omega_lo: float, omega_hi: float,
             points_per_decade: int = 200) -> np.ndarray:
    """Logarithmic frequency grid used for multi-fluctuator aggregates."""
    if omega_lo <= 0 or omega_hi <= omega_lo:
        raise InvalidInputError("need 0 < omega_lo < omega_hi")
    decades = np.log10(omega_hi / omega_lo)
    npts = max(2, int(np.ceil(decades * points_per_decade)) + 1)
    return np.logspace(np.log10(omega_lo), np.log10(omega_hi), npts)


def _edge_slope(logw: np.ndarray, logp: np.ndarray) -> float:
    if logw.size < 2:
        return 0.0
    return float(np.polyfit(logw, logp, 1)[0])


def resample_loglog(s: Spectrum, grid: np.ndarray) -> np.ndarray:
    """Interpolate the one-sided density onto ``grid``.

    Inside the native range the density is interpolated linearly in
    log(w); outside it, the last (first) decade's log-log power-law fit
    extends the tails so members simulated over different bandwidths can
    share one grid.
    """
    grid = np.asarray(grid, dtype=float)
    out = np.interp(np.log10(grid), np.log10(s.freqs), s.power)
    pos = s.power > 0
    logw = np.log10(s.freqs[pos]) if pos.any() else np.array([])
    logp = np.log10(s.power[pos]) if pos.any() else np.array([])

    low = grid < s.omega_min
    if low.any():
        sel = pos & (s.freqs <= 10.0 * s.omega_min)
        if sel.sum() >= 2 and s.power[0] > 0:
            slope = _edge_slope(np.log10(s.freqs[sel]), np.log10(s.power[sel]))
            out[low] = s.power[0] * (grid[low] / s.omega_min) ** slope
        else:
            out[low] = s.power[0]
    high = grid > s.omega_max
    if high.any():
        sel = pos & (s.freqs >= 0.1 * s.omega_max)
        if sel.sum() >= 2 and s.power[-1] > 0:
            slope = _edge_slope(np.log10(s.freqs[sel]), np.log10(s.power[sel]))
            out[high] = s.power[-1] * (grid[high] / s.omega_max) ** slope
        else:
            out[high] = 0.0
    return np.clip(out, 0.0, None)


def aggregate(spectra: list[Spectrum], common_grid: np.ndarray) -> Spectrum:
    """Pointwise sum of member spectra resampled onto ``common_grid``."""
    if not spectra:
        raise InvalidInputError("aggregate needs at least one spectrum")
    common_grid = np.asarray(common_grid, dtype=float)
    power = np.zeros_like(common_grid)
    dc = 0.0
    norm_total = 0.0
    lines: dict[float, float] = {}
    for s in spectra:
        power += resample_loglog(s, common_grid)
        dc += s.dc
        norm_total += s.norm_total
        for w, wt in s.lines:
            lines[w] = lines.get(w, 0.0) + wt
    meta = {"estimator": "aggregate", "members": len(spectra)}
    return Spectrum(freqs=common_grid, power=power, dc=dc,
                    norm_total=norm_total, lines=tuple(sorted(lines.items())),
                    meta=meta)


def average_spectra(spectra: list[Spectrum]) -> Spectrum:
    """Mean of spectra sharing one grid (ensemble-averaged periodograms)."""
    if not spectra:
        raise InvalidInputError("average needs at least one spectrum")
    base = spectra[0]
    for s in spectra[1:]:
        if s.freqs.shape != base.freqs.shape or not np.allclose(
                s.freqs, base.freqs):
            raise InvalidInputError("averaged spectra must share one grid")
    power = np.mean([s.power for s in spectra], axis=0)
    dc = float(np.mean([s.dc for s in spectra]))
    norm = float(np.mean([s.norm_total for s in spectra]))
    meta = dict(base.meta)
    meta["averaged"] = len(spectra)
    return Spectrum(freqs=base.freqs.copy(), power=power, dc=dc,
                    norm_total=norm, meta=meta)
