"""Complex decay constants and corrected transition energies.

A level's complex decay constant gamma = lam + i*mu combines half the
decay probability per unit time (lam, so the full rate is 2*lam) with the
radiation shift of the level (mu).  The unperturbed constant comes from
the density at the transition energy plus a principal-value shift
integral; the perturbed constant of the cascade's initial level replaces
the sharp resonance by a Lorentzian of half-width lam1 centred at the
shift-corrected transition energy, which is the entire content of the
Zeno-like perturbation:

    lam~0 = integral  V(w) * lam1 / (lam1^2 + (w - w01 + mu1)^2) dw
    mu~0  = -integral V(w) * (w - w01 + mu1) / (lam1^2 + (w - w01 + mu1)^2) dw

In the lam1 -> 0 limit these reduce to the golden rule pi*V and the
principal-value shift; in the lam1 -> inf limit both vanish (decay and
shift are frozen).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import quadrature
from .densities import SpectralDensity
from .errors import NoConvergence
from .quadrature import DEFAULT_ATOL, DEFAULT_RTOL


@dataclass(frozen=True)
class ComplexDecayConstant:
    """Half-rate and radiation shift of an unstable level."""

    lam: float  # half the decay probability per unit time, >= 0
    mu: float   # radiation (energy) shift

    def __post_init__(self):
        if self.lam < -1e-15:
            raise ValueError(f"negative half-rate {self.lam!r}")

    @property
    def rate(self) -> float:
        """Full decay probability per unit time (2 * lam)."""
        return 2.0 * self.lam

    @property
    def as_complex(self) -> complex:
        return complex(self.lam, self.mu)


@dataclass(frozen=True)
class CascadeSystem:
    """Three-level cascade: energies of both transitions and both densities.

    omega01 may be negative (initial level below the intermediate one);
    omega12 must be positive with nonvanishing density at the resonance,
    otherwise the second transition cannot decay and there is nothing to
    perturb the first one with.
    """

    omega01: float
    omega12: float
    density_y: SpectralDensity
    density_z: SpectralDensity

    def __post_init__(self):
        if self.omega12 <= 0.0:
            raise ValueError("omega12 must be positive")
        if self.density_z(self.omega12) <= 0.0:
            raise ValueError("density_z must be positive at omega12")

    @property
    def omega02(self) -> float:
        return self.omega01 + self.omega12


@dataclass(frozen=True)
class CorrectedEnergies:
    """Transition energies shifted by the perturbed and intermediate shifts."""

    bar01: float
    bar12: float
    bar02: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.bar02 is None:
            object.__setattr__(self, "bar02", self.bar01 + self.bar12)


def bare_constant(
    density: SpectralDensity,
    transition_energy: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> ComplexDecayConstant:
    """Unperturbed constant: lam = pi*V(E), mu = -PV integral of V/(w - E)."""
    lam = np.pi * float(density(transition_energy))
    shift = quadrature.principal_value(density, transition_energy, rtol, atol)
    return ComplexDecayConstant(lam, -shift.value)


def perturbed_constant(
    system: CascadeSystem,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> tuple[ComplexDecayConstant, ComplexDecayConstant]:
    """Decay constant of the initial level perturbed by the intermediate
    level's instability, together with the intermediate constant itself.
    """
    gamma1 = bare_constant(system.density_z, system.omega12, rtol, atol)
    center = system.omega01 - gamma1.mu
    absorb = quadrature.lorentzian_convolution(
        system.density_y, center, gamma1.lam, "absorptive", rtol, atol)
    disperse = quadrature.lorentzian_convolution(
        system.density_y, center, gamma1.lam, "dispersive", rtol, atol)
    return ComplexDecayConstant(absorb.value, -disperse.value), gamma1


def golden_rule(
    system: CascadeSystem,
    gamma1: ComplexDecayConstant | None = None,
) -> float:
    """Unperturbed rate 2*pi*V at the shift-corrected transition energy.

    Zero whenever the corrected energy falls below the spectrum edge.
    """
    if gamma1 is None:
        gamma1 = bare_constant(system.density_z, system.omega12)
    return 2.0 * np.pi * float(system.density_y(system.omega01 - gamma1.mu))


def corrected_energies(
    system: CascadeSystem,
    perturbed: ComplexDecayConstant,
    gamma1: ComplexDecayConstant,
) -> CorrectedEnergies:
    """Line centres: both level shifts folded into the transition energies."""
    bar01 = system.omega01 + perturbed.mu - gamma1.mu
    bar12 = system.omega12 + gamma1.mu
    return CorrectedEnergies(bar01, bar12)


@dataclass(frozen=True)
class CascadeConstants:
    """Everything the spectra need, computed once per scenario."""

    system: CascadeSystem
    bare0: ComplexDecayConstant       # initial level, second transition ignored
    gamma1: ComplexDecayConstant      # intermediate level
    perturbed: ComplexDecayConstant   # initial level, perturbed
    golden_rate: float
    energies: CorrectedEnergies


def compute_constants(
    system: CascadeSystem,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
) -> CascadeConstants:
    perturbed, gamma1 = perturbed_constant(system, rtol, atol)
    return CascadeConstants(
        system=system,
        bare0=bare_constant(system.density_y, system.omega01, rtol, atol),
        gamma1=gamma1,
        perturbed=perturbed,
        golden_rate=golden_rule(system, gamma1),
        energies=corrected_energies(system, perturbed, gamma1),
    )


@dataclass(frozen=True)
class ZenoPoint:
    lambda1: float
    rate_perturbed: float   # 2 * lam~0
    shift_perturbed: float  # mu~0


def zeno_curve(
    system: CascadeSystem,
    lambda1_values: Sequence[float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    max_workers: int | None = None,
) -> list[ZenoPoint]:
    """Perturbed rate and shift swept over the intermediate half-rate.

    lam1 is treated as a free numerical parameter while mu1 stays at its
    physical value from density_z, isolating the suppression effect.
    Points are independent; evaluation may run concurrently but the
    output order always follows the input order.
    """
    if any(l1 <= 0.0 for l1 in lambda1_values):
        raise ValueError("lambda1 sweep values must be positive")
    gamma1 = bare_constant(system.density_z, system.omega12, rtol, atol)
    center = system.omega01 - gamma1.mu

    def point(lam1: float) -> ZenoPoint:
        absorb = quadrature.lorentzian_convolution(
            system.density_y, center, lam1, "absorptive", rtol, atol)
        disperse = quadrature.lorentzian_convolution(
            system.density_y, center, lam1, "dispersive", rtol, atol)
        return ZenoPoint(lam1, 2.0 * absorb.value, -disperse.value)

    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(point, lambda1_values))
    return [point(l1) for l1 in lambda1_values]


def perturbed_rate_reference(
    system: CascadeSystem,
    gamma1: ComplexDecayConstant,
    rtol: float = 1e-10,
    atol: float = 1e-14,
) -> float:
    """Perturbed rate by a deliberately independent integration route.

    Integrates 2 * V(w) * lam1 / (lam1^2 + (w - w01 + mu1)^2) directly in
    energy space on decade-split subintervals around the line, with no
    shared code with the arctangent-substitution path, as a consistency
    check between the two published forms of the same quantity.
    """
    from scipy import integrate

    lam1, mu1 = gamma1.lam, gamma1.mu
    center = system.omega01 - mu1
    support = system.density_y.support()
    upper = support[1]
    if not np.isfinite(upper):
        upper = max(center, 0.0) + quadrature.TRUNCATION_MULTIPLE * max(
            system.density_y.cutoff_scale, lam1)
        upper *= 16.0  # generous: this is the high-accuracy reference

    def integrand(w):
        return 2.0 * system.density_y(w) * lam1 / (lam1**2 + (w - center) ** 2)

    cuts = {0.0, upper}
    cuts.update(b for b in system.density_y.breakpoints())
    for k in range(-6, 7):
        for sign in (-1.0, 1.0):
            cuts.add(center + sign * lam1 * 10.0**k)
    edges = sorted(c for c in cuts if 0.0 <= c <= upper)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        piece, err = integrate.quad(integrand, lo, hi, epsabs=atol,
                                    epsrel=rtol, limit=300)
        if not np.isfinite(piece):
            raise NoConvergence("reference-form quadrature diverged")
        total += piece
    return total
