"""Correlator dynamics of spin-1/2 ensembles under collective dissipation ramped as ``1/(nu t)``.

Submodules
----------
spin_algebra   sparse complex operators, Pauli and spin-1 matrices
lindblad       master-equation simulation and correlator extraction
rg             block-diagonal spin-1 equations for correlator amplitudes
ode            adaptive Runge-Kutta integration in ``ln t``
specfun        gamma, Bessel and ``1F2`` functions with error estimates
exact          one- and two-site closed forms and exponent predictions
saddle         late-time saddle-point asymptote for general ``n``
fitting        power-law exponent extraction and drift diagnostics
presets        initial states
config         YAML run documents
workflows      trajectories, sweeps and cross-route checks
cli            command-line front end
"""

from . import errors
from .errors import (ApproximationGapError, ConfigError, DimensionError, FitError, FrameError,
                     IntegrationError, NoTransitionError, NumericalFailure, PoleError, RampDissError,
                     ResonantNuError)
from .exact import predict_alpha
from .fitting import FitResult, fit_exponent
from .lindblad import CorrelatorLabel, DensityState, RampConfig
from .rg import CorrelatorState

__version__ = "0.1.0"

__all__ = [
    "errors",
    "RampDissError",
    "DimensionError",
    "ConfigError",
    "NumericalFailure",
    "IntegrationError",
    "PoleError",
    "ApproximationGapError",
    "ResonantNuError",
    "NoTransitionError",
    "FitError",
    "FrameError",
    "RampConfig",
    "CorrelatorLabel",
    "DensityState",
    "CorrelatorState",
    "predict_alpha",
    "fit_exponent",
    "FitResult",
    "__version__",
]
