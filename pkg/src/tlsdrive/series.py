"""Uniformly sampled s_z time series."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

#: Series kinds.  A "relaxation" series is an ensemble-averaged trajectory
#: whose values are read as the correlation function itself; a
#: "sample-path" series is one stochastic realisation whose PSD is
#: estimated from the squared Fourier magnitude.
RELAXATION = "relaxation"
SAMPLE_PATH = "sample-path"


@dataclass
class TimeSeries:
    """s_z samples on the uniform grid t_k = k / fs, k = 0 .. n-1."""

    values: np.ndarray
    fs: float
    t_max: float
    initial_state: str = "|0>"
    kind: str = RELAXATION

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 2:
            raise InvalidInputError("time series needs at least 2 samples")
        if self.fs <= 0 or self.t_max <= 0:
            raise InvalidInputError("fs and t_max must be positive")
        n = self.fs * self.t_max
        if abs(n - round(n)) > 1e-6 or round(n) != self.values.size:
            raise InvalidInputError(
                f"length {self.values.size} != fs*t_max = {n}")
        if self.kind not in (RELAXATION, SAMPLE_PATH):
            raise InvalidInputError(f"unknown series kind {self.kind!r}")

    @property
    def dt(self) -> float:
        return 1.0 / self.fs

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) / self.fs


def sample_count(fs: float, t_max: float) -> int:
    """Number of samples for a (fs, t_max) window; must be a whole number."""
    n = fs * t_max
    if fs <= 0 or t_max <= 0 or abs(n - round(n)) > 1e-6 or round(n) < 2:
        raise InvalidInputError(
            f"fs*t_max must be a positive integer >= 2, got {n}")
    return int(round(n))
