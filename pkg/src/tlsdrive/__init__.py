"""Driven two-level-fluctuator noise and qubit dephasing toolkit."""

from .classical import (ClassicalTls, DrivenPsd, averaged_telegraph_psd,
                        driven_psd_weak, lorentzian_psd, rate_ode_exact,
                        rate_ode_trajectory, redistribution_ratio,
                        telegraph_sample)
from .dephasing import (DephasingConfig, TphiResult, enhancement_ratio,
                        tphi_solve, window_gaussian)
from .ensemble import (EnsembleSpec, default_1f_ensemble, fit_loglog_slope,
                       simulate_ensemble)
from .errors import (DegenerateInputError, InvalidInputError,
                     InvalidParameterError, StabilityError, TlsDriveError,
                     ValidityError, WeakDriveValidityWarning)
from .lindblad import (BlochState, DriveParams, TlsParams,
                       detailed_balance_lambda, derivatives, integrate,
                       integrate_full_density_matrix, theta_from_physical)
from .series import TimeSeries
from .spectrum import (Spectrum, aggregate, band_weight,
                       empirical_redistribution, log_grid,
                       psd_from_timeseries, spectrum_from_analytic)

__version__ = "0.1.0"
