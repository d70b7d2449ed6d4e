"""Coupling spectral densities driving both cascade transitions.

A spectral density integrates the squared transition matrix elements over
the degeneracy index, leaving a nonnegative function of the emitted-quantum
energy only.  All observables depend on the coupling exclusively through
these functions; coupling phases never enter and are not represented.

Natural units throughout (hbar = 1); energies and rates share one
arbitrary scale.  ``evaluate`` is identically zero for negative energies:
there are no field quanta with negative energy, and clipping here (rather
than at call sites) keeps every downstream integral's lower limit honest.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import NonIntegrable

# Finiteness guard applied at construction time.
MAX_TOTAL_WEIGHT = 1e12


def _as_float_array(omega):
    arr = np.asarray(omega, dtype=float)
    return arr, np.isscalar(omega) or arr.ndim == 0


class SpectralDensity:
    """Base class: a nonnegative, integrable function of energy.

    Subclasses provide ``_evaluate_positive`` on omega >= 0 and the
    metadata used by the quadrature layer (``cutoff_scale``, ``support``,
    ``breakpoints``).
    """

    #: energy beyond which the density is negligible (family-specific)
    cutoff_scale: float

    def _evaluate_positive(self, omega: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def evaluate(self, omega) -> float | np.ndarray:
        """Density value at ``omega``; exactly zero for omega < 0."""
        arr, scalar = _as_float_array(omega)
        with np.errstate(under="ignore"):
            values = np.where(arr >= 0.0, self._evaluate_positive(np.maximum(arr, 0.0)), 0.0)
        return float(values) if scalar else values

    __call__ = evaluate

    def support(self) -> tuple[float, float]:
        """Interval outside which the density vanishes (hi may be inf)."""
        return (0.0, np.inf)

    def breakpoints(self) -> tuple[float, ...]:
        """Interior kinks/jumps the adaptive quadrature should split at."""
        return ()

    def total_weight(self) -> float:
        """Integral of the density over [0, inf)."""
        from . import quadrature

        result = quadrature.integrate_semi_infinite(self)
        if not np.isfinite(result.value) or result.value > MAX_TOTAL_WEIGHT:
            raise NonIntegrable(f"density weight {result.value!r} exceeds bound")
        return result.value


@dataclass(frozen=True)
class FlatWindow(SpectralDensity):
    """Constant value ``v0`` on the energy window [a, b], zero elsewhere."""

    v0: float
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b):
            raise ValueError(f"window requires 0 <= a < b, got [{self.a}, {self.b}]")
        if self.v0 < 0.0:
            raise ValueError("v0 must be nonnegative")
        object.__setattr__(self, "cutoff_scale", self.b)
        self.total_weight()

    def _evaluate_positive(self, omega):
        return np.where((omega >= self.a) & (omega <= self.b), self.v0, 0.0)

    def support(self):
        return (self.a, self.b)

    def breakpoints(self):
        return (self.a, self.b)


@dataclass(frozen=True)
class OhmicExp(SpectralDensity):
    """Ohmic density with exponential cutoff: g2 * omega * exp(-omega/cutoff)."""

    g2: float
    cutoff: float

    def __post_init__(self):
        if self.g2 < 0.0:
            raise ValueError("g2 must be nonnegative")
        if self.cutoff <= 0.0:
            raise ValueError("cutoff must be positive")
        object.__setattr__(self, "cutoff_scale", self.cutoff)
        self.total_weight()

    def _evaluate_positive(self, omega):
        return self.g2 * omega * np.exp(-omega / self.cutoff)


@dataclass(frozen=True)
class ShiftedLorentzian(SpectralDensity):
    """Lorentzian of total weight ~``amplitude`` centred at positive energy.

    amplitude/pi * width / (width^2 + (omega - center)^2), clipped to
    omega >= 0.  Its overlap with a Lorentzian line factor has a closed
    convolution form, which the tests use to cross-check the quadrature.
    """

    amplitude: float
    center: float
    width: float

    def __post_init__(self):
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be nonnegative")
        if self.width <= 0.0 or self.center <= 0.0:
            raise ValueError("center and width must be positive")
        object.__setattr__(self, "cutoff_scale", self.center + 10.0 * self.width)
        self.total_weight()

    def _evaluate_positive(self, omega):
        return (self.amplitude / np.pi) * self.width / (
            self.width**2 + (omega - self.center) ** 2
        )

    def breakpoints(self):
        # not kinks, but the adaptive splitter must not overlook the peak
        return (max(0.0, self.center - self.width), self.center,
                self.center + self.width)


class Tabulated(SpectralDensity):
    """Piecewise-linear density through (omega, value) nodes, zero outside."""

    def __init__(self, omega, values):
        omega = np.asarray(omega, dtype=float)
        values = np.asarray(values, dtype=float)
        if omega.ndim != 1 or omega.shape != values.shape or omega.size < 2:
            raise ValueError("table needs matching 1-d omega/value arrays, >= 2 rows")
        if np.any(np.diff(omega) <= 0.0):
            raise ValueError("table omega grid must be strictly increasing")
        if omega[0] < 0.0:
            raise ValueError("table omega grid must be nonnegative")
        if np.any(values < 0.0):
            raise ValueError("table values must be nonnegative")
        self.omega = omega
        self.values = values
        self.cutoff_scale = float(omega[-1])
        self.total_weight()

    @classmethod
    def from_csv(cls, path: str | Path) -> "Tabulated":
        """Load a two-column (omega, value) CSV with a one-line header."""
        rows = []
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            next(reader)  # header line
            for row in reader:
                if not row or row[0].lstrip().startswith("#"):
                    continue
                rows.append((float(row[0]), float(row[1])))
        if not rows:
            raise ValueError(f"no data rows in table {path}")
        omega, values = zip(*rows)
        return cls(np.array(omega), np.array(values))

    def _evaluate_positive(self, omega):
        return np.interp(omega, self.omega, self.values, left=0.0, right=0.0)

    def support(self):
        return (float(self.omega[0]), float(self.omega[-1]))

    def breakpoints(self):
        return tuple(float(w) for w in self.omega)
