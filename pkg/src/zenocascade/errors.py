"""Exception types shared across the package.

Every numerical failure mode has a named exception so the CLI can report
the failing stage by name (exit code 2) instead of leaking tracebacks.
"""


class ZenoCascadeError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(ZenoCascadeError):
    """Scenario configuration is missing keys, malformed, or inconsistent."""


class NonIntegrable(ZenoCascadeError):
    """A density (or density-weighted integrand) has no finite integral."""


class NoConvergence(ZenoCascadeError):
    """Adaptive quadrature exhausted its subdivision budget."""


class PoleOnSupportBoundary(ZenoCascadeError):
    """Principal-value pole coincides with a jump of the integrand.

    Raised instead of silently smoothing over the discontinuity.
    """


class OscillationResolution(ZenoCascadeError):
    """Oscillatory Fourier quadrature cannot resolve the requested phase."""


class StepTooCoarse(ZenoCascadeError):
    """Volterra time step too large: halving it moves the endpoint too much."""


class GridMismatch(ZenoCascadeError):
    """Two traces or grids do not share the same axis."""


class GridTooCoarse(ZenoCascadeError):
    """Spectrum grid step does not resolve the narrowest line factor."""


class NoPeak(ZenoCascadeError):
    """Lorentzian fit failed: no interior maximum or no convergence."""


class RangeTooNarrow(ZenoCascadeError):
    """Discretization range misses too much of the density mass."""


class RecurrenceTooShort(ZenoCascadeError):
    """Discrete-continuum recurrence horizon is too short for the decay time."""


class NormDrift(ZenoCascadeError):
    """State norm left the unitarity tolerance during integration."""


class NotConverged(ZenoCascadeError):
    """Oracle end state not settled: intermediate sector still populated."""
