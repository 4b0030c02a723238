"""Driven two-level-fluctuator dynamics in the Lindblad formalism.

The working representation is the real triple (s_z, p, q):

    s_z = rho00 - rho11,   q = rho01 + rho10 = 2 Re rho01,

and p is the real variable that multiplies the tunneling terms in the
coupled equations

    ds_z/dt = -2 Gamma s_z + lambda - (Delta + 2 a_x cos w_d t) p
    dp/dt   =  (Delta + 2 a_x cos w_d t) s_z - (Gamma + 2 eta) p
               - (eps + 2 a_z cos w_d t) q
    dq/dt   =  (eps + 2 a_z cos w_d t) p - (Gamma + 2 eta) q.

Matching against the full density-matrix propagator fixes the mapping
p = 2 Im rho01 = -<sigma_y> (so s_z^2 + p^2 + q^2 is the Bloch norm).
Rates: Gamma = (gamma + kappa)/2 and lambda = gamma - kappa, with gamma
the relaxation (|1> -> |0>), kappa the excitation and eta the pure
dephasing rate; gamma, kappa, eta >= 0 and detailed balance reads
lambda = 2 Gamma tanh(eps / (2 theta)) for bath temperature theta
expressed as a rate (k_B T / hbar in units of the reference rate).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, tanh

import numpy as np
from scipy import constants

from . import _kernels
from .errors import InvalidParameterError, StabilityError
from .series import RELAXATION, TimeSeries, sample_count

#: internal step keeps h * omega_max below this (RK4 accuracy/stability)
STABILITY_MARGIN = 0.1
#: default bath temperature in rate units; >> all default splittings, so
#: detailed balance gives lambda ~ 0
DEFAULT_THETA = 1.0e4
BLOCH_NORM_TOL = 1.0e-8


def detailed_balance_lambda(gamma_total: float, epsilon: float,
                            theta: float) -> float:
    """Rate asymmetry lambda = 2 Gamma tanh(eps / (2 theta))."""
    if gamma_total <= 0:
        raise InvalidParameterError("gamma_total must be positive")
    if theta <= 0:
        raise InvalidParameterError("temperature theta must be positive")
    return 2.0 * gamma_total * tanh(epsilon / (2.0 * theta))


def theta_from_physical(temperature_k: float, gamma_rad_per_s: float) -> float:
    """Convert (T in kelvin, reference rate in rad/s) to dimensionless theta."""
    if temperature_k <= 0 or gamma_rad_per_s <= 0:
        raise InvalidParameterError("temperature and rate must be positive")
    return constants.k * temperature_k / (constants.hbar * gamma_rad_per_s)


@dataclass(frozen=True)
class TlsParams:
    """Physical parameters of one fluctuator, in units of a reference rate."""

    gamma_relax: float
    kappa_excite: float
    eta: float = 0.0
    epsilon: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        if self.gamma_relax < 0 or self.kappa_excite < 0 or self.eta < 0:
            raise InvalidParameterError("rates gamma, kappa, eta must be >= 0")
        if self.gamma_relax + self.kappa_excite <= 0:
            raise InvalidParameterError("total relaxation rate must be > 0")

    @property
    def gamma_total(self) -> float:
        return 0.5 * (self.gamma_relax + self.kappa_excite)

    @property
    def lam(self) -> float:
        return self.gamma_relax - self.kappa_excite

    @classmethod
    def symmetric(cls, gamma_total: float = 1.0, eta: float = 0.0,
                  epsilon: float = 0.0, delta: float = 0.0) -> "TlsParams":
        """Equal up/down rates (lambda = 0), the infinite-temperature limit."""
        return cls(gamma_relax=gamma_total, kappa_excite=gamma_total,
                   eta=eta, epsilon=epsilon, delta=delta)

    @classmethod
    def with_detailed_balance(cls, gamma_total: float, eta: float = 0.0,
                              epsilon: float = 0.0, delta: float = 0.0,
                              theta: float = DEFAULT_THETA) -> "TlsParams":
        lam = detailed_balance_lambda(gamma_total, epsilon, theta)
        return cls(gamma_relax=gamma_total + lam / 2.0,
                   kappa_excite=gamma_total - lam / 2.0,
                   eta=eta, epsilon=epsilon, delta=delta)


@dataclass(frozen=True)
class DriveParams:
    """Longitudinal/transverse drive couplings and drive frequency."""

    alpha_z: float = 0.0
    alpha_x: float = 0.0
    omega_d: float = 0.0

    def __post_init__(self):
        if self.alpha_z < 0 or self.alpha_x < 0 or self.omega_d < 0:
            raise InvalidParameterError(
                "alpha_z, alpha_x and omega_d must be >= 0")

    @property
    def is_off(self) -> bool:
        return self.alpha_z == 0.0 and self.alpha_x == 0.0


NO_DRIVE = DriveParams()


@dataclass(frozen=True)
class BlochState:
    s_z: float
    p: float = 0.0
    q: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        if abs(self.s_z) > 1.0 + BLOCH_NORM_TOL:
            raise InvalidParameterError("|s_z| must not exceed 1")
        if self.norm_sq() > 1.0 + BLOCH_NORM_TOL:
            raise InvalidParameterError("Bloch norm exceeds 1")

    def norm_sq(self) -> float:
        return self.s_z ** 2 + self.p ** 2 + self.q ** 2

    @classmethod
    def ground(cls) -> "BlochState":
        """The |0> state, (s_z, p, q) = (1, 0, 0)."""
        return cls(s_z=1.0)

    def to_density_matrix(self) -> np.ndarray:
        rho01 = 0.5 * (self.q + 1j * self.p)
        return np.array([[0.5 * (1 + self.s_z), rho01],
                         [np.conj(rho01), 0.5 * (1 - self.s_z)]])


def derivatives(state: BlochState, params: TlsParams,
                drive: DriveParams) -> tuple[float, float, float]:
    """Right-hand side (ds_z/dt, dp/dt, dq/dt) at the state's own time."""
    c = np.cos(drive.omega_d * state.t)
    ez = params.epsilon + 2.0 * drive.alpha_z * c
    ex = params.delta + 2.0 * drive.alpha_x * c
    g = params.gamma_total
    coh = g + 2.0 * params.eta
    ds = -2.0 * g * state.s_z + params.lam - ex * state.p
    dp = ex * state.s_z - coh * state.p - ez * state.q
    dq = ez * state.p - coh * state.q
    return ds, dp, dq


def dominant_frequency_scale(params: TlsParams,
                             drive: DriveParams) -> tuple[str, float]:
    """Largest frequency scale in the problem, with its name."""
    scales = {
        "2*Gamma": 2.0 * params.gamma_total,
        "Gamma + 2*eta": params.gamma_total + 2.0 * params.eta,
        "epsilon + 2*alpha_z": params.epsilon + 2.0 * drive.alpha_z,
        "delta + 2*alpha_x": params.delta + 2.0 * drive.alpha_x,
        "omega_d": drive.omega_d,
    }
    name = max(scales, key=scales.get)
    return name, scales[name]


def _resolve_substeps(params: TlsParams, drive: DriveParams, fs: float,
                      substeps: int | None, substep_limit: int) -> int:
    if substeps is not None:
        if substeps < 1:
            raise InvalidParameterError("substeps must be >= 1")
        return substeps
    name, omega_max = dominant_frequency_scale(params, drive)
    n_sub = max(1, ceil(omega_max / (STABILITY_MARGIN * fs)))
    if n_sub > substep_limit:
        raise StabilityError(
            f"stability bound h*omega_max <= {STABILITY_MARGIN} needs "
            f"{n_sub} substeps per sample against the largest frequency "
            f"scale {name} = {omega_max:g}; raise fs or the substep limit")
    return n_sub


def integrate(params: TlsParams, drive: DriveParams = NO_DRIVE,
              init: BlochState | None = None, fs: float = 1.0e4,
              t_max: float = 1.0e2, substeps: int | None = None,
              substep_limit: int = 100_000,
              return_bloch: bool = False):
    """Fixed-step RK4 integration of the (s_z, p, q) equations.

    Samples s_z every 1/fs.  The internal step is h = 1/(fs*n_sub) with
    n_sub chosen so h*omega_max <= 0.1 where omega_max is the largest
    frequency scale; integration refuses (StabilityError) if that would
    exceed ``substep_limit``.  With ``return_bloch`` the full (n, 3)
    Bloch trajectory is returned alongside the series.
    """
    init = init or BlochState.ground()
    n = sample_count(fs, t_max)
    n_sub = _resolve_substeps(params, drive, fs, substeps, substep_limit)
    out = np.empty((n, 3))
    _kernels.bloch_rk4(out, init.s_z, init.p, init.q, params.gamma_total,
                       params.lam, params.eta, params.epsilon, params.delta,
                       drive.alpha_z, drive.alpha_x, drive.omega_d,
                       1.0 / fs, n_sub)
    label = "|0>" if (init.s_z, init.p, init.q) == (1.0, 0.0, 0.0) else "custom"
    ts = TimeSeries(out[:, 0].copy(), fs, t_max, initial_state=label,
                    kind=RELAXATION)
    if return_bloch:
        return ts, out
    return ts


def integrate_full_density_matrix(params: TlsParams,
                                  drive: DriveParams = NO_DRIVE,
                                  init: BlochState | None = None,
                                  fs: float = 1.0e4, t_max: float = 1.0e2,
                                  substeps: int | None = None,
                                  substep_limit: int = 100_000,
                                  store_rho: bool = False):
    """Propagate the complex 2x2 density matrix (cross-validation oracle).

    Independent formulation of the same physics as :func:`integrate`; the
    returned series holds Tr[rho sigma_z].  With ``store_rho`` the full
    (n, 4) complex trajectory (rho00, rho01, rho10, rho11) is returned
    alongside, for Hermiticity/positivity checks.
    """
    init = init or BlochState.ground()
    n = sample_count(fs, t_max)
    n_sub = _resolve_substeps(params, drive, fs, substeps, substep_limit)
    sz = np.empty(n)
    rho = np.empty((n if store_rho else 1, 4), dtype=np.complex128)
    rho0 = init.to_density_matrix()
    _kernels.rho_rk4(sz, rho, store_rho, rho0[0, 0], rho0[0, 1], rho0[1, 0],
                     rho0[1, 1], params.gamma_relax, params.kappa_excite,
                     params.eta, params.epsilon, params.delta, drive.alpha_z,
                     drive.alpha_x, drive.omega_d, 1.0 / fs, n_sub)
    label = "|0>" if (init.s_z, init.p, init.q) == (1.0, 0.0, 0.0) else "custom"
    ts = TimeSeries(sz, fs, t_max, initial_state=label, kind=RELAXATION)
    if store_rho:
        return ts, rho
    return ts
