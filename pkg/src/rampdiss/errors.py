"""Exception hierarchy shared by all modules.

Every error raised on purpose by the library derives from :class:`RampDissError`,
so callers (in particular the command line front end) can map failure classes
to exit codes without catching unrelated exceptions.
"""

from __future__ import annotations


class RampDissError(Exception):
    """Base class for all library errors."""


class DimensionError(RampDissError, ValueError):
    """Operand shapes or site indices are inconsistent."""


class ConfigError(RampDissError, ValueError):
    """A configuration document or parameter set failed validation."""


class NumericalFailure(RampDissError, RuntimeError):
    """A numerical routine could not deliver a certified result."""


class IntegrationError(NumericalFailure):
    """The ODE integrator gave up (step-size underflow or step budget).

    Attributes
    ----------
    time : float
        Physical time at which the integrator failed.
    """

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t = {time:.6g})")
        self.time = time


class PoleError(NumericalFailure):
    """A special function was requested exactly at one of its poles."""


class ApproximationGapError(NumericalFailure):
    """No evaluation regime of a special function certifies the target accuracy."""


class ResonantNuError(RampDissError, ValueError):
    """A closed form is singular at the requested ramp rate.

    The numeric integration route must be used instead.
    """

    def __init__(self, message: str, nu: float):
        super().__init__(f"{message} (nu = {nu!r}); use the numeric route")
        self.nu = nu


class NoTransitionError(RampDissError, ValueError):
    """An exponent has a single analytic branch, so no kink exists at nu = 2."""


class FitError(RampDissError, ValueError):
    """Exponent extraction could not be carried out on the given samples.

    Attributes
    ----------
    best_window : tuple of float or None
        Closest candidate window when window selection failed.
    drift : float or None
        Relative slope variation over ``best_window``.
    """

    def __init__(self, message: str, best_window: tuple[float, float] | None = None,
                 drift: float | None = None):
        super().__init__(message)
        self.best_window = best_window
        self.drift = drift


class FrameError(RampDissError, ValueError):
    """A correlator state was passed in the wrong reference frame."""
