"""Brute-force verification by discretizing both continua.

Both emission continua are sampled on uniform midpoint grids; the coupling
of each mode is the square root of (density * grid step), real and
nonnegative since only squared couplings enter any observable.  The basis
holds the initial state, one block of one-quantum states, and the product
block of two-quantum states; within this single-excitation-per-continuum
sector the Schroedinger equation is integrated exactly (to solver
tolerance) in the interaction picture, where only detunings appear and the
large absolute level energies never enter.

A discretized continuum spuriously refeeds the system after the
recurrence time 2*pi/(grid step); every quantitative claim must stay
inside half that horizon, and construction fails when the decay lifetime
cannot fit under it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rates
from .errors import NormDrift, NotConverged, RangeTooNarrow, RecurrenceTooShort
from .quadrature import _quad
from .rates import CascadeSystem
from .spectra import SpectrumGrid, _make_grid

#: maximum density mass allowed outside the discretization range
MASS_OUTSIDE_LIMIT = 1e-3
#: decay must fit under the recurrence horizon with this margin
RECURRENCE_MARGIN = 20.0
#: norm conservation tolerance (unitarity check)
NORM_TOLERANCE = 1e-8
#: intermediate sector must be empty to this level before spectra are read
INTERMEDIATE_LIMIT = 1e-3


@dataclass(frozen=True)
class DiscreteModel:
    """Midpoint-sampled continua and their mode couplings."""

    system: CascadeSystem
    y_energies: np.ndarray
    y_couplings: np.ndarray
    z_energies: np.ndarray
    z_couplings: np.ndarray
    y_step: float
    z_step: float
    lam_tilde: float  # analytic perturbed half-rate, kept for the guards

    @property
    def dimension(self) -> int:
        ny, nz = self.y_energies.size, self.z_energies.size
        return 1 + ny + ny * nz

    @property
    def recurrence_time(self) -> float:
        return 2.0 * np.pi / max(self.y_step, self.z_step)

    def suggested_dt(self, phase_budget: float = 0.02) -> float:
        """Step keeping the fastest interaction-picture phase below
        ``phase_budget`` radians, which holds fixed-step norm drift far
        under the unitarity tolerance for the horizons the guards allow."""
        w_max = max(
            np.max(np.abs(self.y_energies - self.system.omega01)),
            np.max(np.abs(self.z_energies - self.system.omega12)),
            np.sqrt(np.sum(self.y_couplings**2)),
            np.sqrt(np.sum(self.z_couplings**2)),
        )
        return phase_budget / w_max


def _mass_in_range(density, lo, hi) -> float:
    value, _, _ = _quad(density, lo, hi, rtol=1e-9, atol=1e-13,
                        points=density.breakpoints())
    return value


def discretize(
    system: CascadeSystem,
    n_y: int,
    n_z: int,
    y_range: tuple[float, float],
    z_range: tuple[float, float],
) -> DiscreteModel:
    """Uniform midpoint discretization of both continua.

    Fails with RangeTooNarrow when either range misses more than 1e-3 of
    its density mass, and with RecurrenceTooShort when the decay lifetime
    of the initial level does not fit under the recurrence horizon.
    """
    if n_y < 50 or n_z < 50:
        raise ValueError("need at least 50 modes per continuum")
    for lo, hi in (y_range, z_range):
        if not (0.0 <= lo < hi):
            raise ValueError(f"bad range [{lo}, {hi}]")

    for label, density, (lo, hi) in (("y", system.density_y, y_range),
                                     ("z", system.density_z, z_range)):
        total = density.total_weight()
        outside = total - _mass_in_range(density, lo, hi)
        if outside > MASS_OUTSIDE_LIMIT * total:
            raise RangeTooNarrow(
                f"{label}-range misses {outside / total:.2e} of the density mass")

    y_step = (y_range[1] - y_range[0]) / n_y
    z_step = (z_range[1] - z_range[0]) / n_z
    y_energies = y_range[0] + y_step * (np.arange(n_y) + 0.5)
    z_energies = z_range[0] + z_step * (np.arange(n_z) + 0.5)
    y_couplings = np.sqrt(np.asarray(system.density_y(y_energies)) * y_step)
    z_couplings = np.sqrt(np.asarray(system.density_z(z_energies)) * z_step)

    perturbed, _ = rates.perturbed_constant(system)
    t_rec = 2.0 * np.pi / max(y_step, z_step)
    if perturbed.lam * t_rec <= RECURRENCE_MARGIN:
        raise RecurrenceTooShort(
            f"lam~0 * t_rec = {perturbed.lam * t_rec:.2f} <= {RECURRENCE_MARGIN:g}; "
            "refine the grids or shorten the lifetime")
    return DiscreteModel(system, y_energies, y_couplings, z_energies,
                         z_couplings, y_step, z_step, perturbed.lam)


@dataclass(frozen=True)
class OracleHistory:
    """Sampled populations and the final state of one evolution."""

    model: DiscreteModel
    times: np.ndarray
    a0: np.ndarray                 # complex amplitude of the initial state
    population_initial: np.ndarray
    population_intermediate: np.ndarray
    population_final: np.ndarray
    norm_history: np.ndarray
    final_a1: np.ndarray
    final_a2: np.ndarray
    dt: float

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def max_norm_drift(self) -> float:
        return float(np.max(np.abs(self.norm_history - 1.0)))


def evolve(
    model: DiscreteModel,
    t_final: float,
    dt: float | None = None,
    n_samples: int = 400,
) -> OracleHistory:
    """Fixed-step classic fourth-order integration of the sector equations.

    Interaction picture: time-dependent phases carry the detunings, the
    state vector is (a0, a1[k], a2[k, j]).  Unitarity is monitored at every
    sample; drift beyond NORM_TOLERANCE raises NormDrift.
    """
    if dt is None:
        dt = model.suggested_dt()
    n_steps = int(np.ceil(t_final / dt))
    dt = t_final / n_steps

    g = model.y_couplings
    h = model.z_couplings
    det_y = model.y_energies - model.system.omega01
    det_z = model.z_energies - model.system.omega12

    a0 = 1.0 + 0.0j
    a1 = np.zeros(g.size, dtype=complex)
    a2 = np.zeros((g.size, h.size), dtype=complex)

    def derivative(t, a0_c, a1_c, a2_c):
        py = np.exp(1j * det_y * t)
        pz = np.exp(1j * det_z * t)
        gy = g * py
        hz = h * pz
        d0 = -1j * np.dot(np.conj(gy), a1_c)
        d1 = -1j * (gy * a0_c + a2_c @ np.conj(hz))
        d2 = -1j * np.outer(a1_c, hz)
        return d0, d1, d2

    stride = max(1, n_steps // n_samples)
    times = [0.0]
    a0_hist = [a0]
    p0_hist = [1.0]
    p1_hist = [0.0]
    p2_hist = [0.0]
    norms = [1.0]

    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = derivative(t, a0, a1, a2)
        k2 = derivative(t + 0.5 * dt, a0 + 0.5 * dt * k1[0],
                        a1 + 0.5 * dt * k1[1], a2 + 0.5 * dt * k1[2])
        k3 = derivative(t + 0.5 * dt, a0 + 0.5 * dt * k2[0],
                        a1 + 0.5 * dt * k2[1], a2 + 0.5 * dt * k2[2])
        k4 = derivative(t + dt, a0 + dt * k3[0], a1 + dt * k3[1],
                        a2 + dt * k3[2])
        a0 = a0 + (dt / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        a1 = a1 + (dt / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        a2 = a2 + (dt / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        t = step * dt

        if step % stride == 0 or step == n_steps:
            p0 = abs(a0) ** 2
            p1 = float(np.sum(np.abs(a1) ** 2))
            p2 = float(np.sum(np.abs(a2) ** 2))
            norm = p0 + p1 + p2
            if abs(norm - 1.0) > NORM_TOLERANCE:
                raise NormDrift(
                    f"norm drifted to {norm - 1.0:+.3e} at t={t:.4g} "
                    f"(dt={dt:.3e} too coarse)")
            times.append(t)
            a0_hist.append(a0)
            p0_hist.append(p0)
            p1_hist.append(p1)
            p2_hist.append(p2)
            norms.append(norm)

    return OracleHistory(
        model=model,
        times=np.asarray(times),
        a0=np.asarray(a0_hist),
        population_initial=np.asarray(p0_hist),
        population_intermediate=np.asarray(p1_hist),
        population_final=np.asarray(p2_hist),
        norm_history=np.asarray(norms),
        final_a1=a1,
        final_a2=a2,
        dt=dt,
    )


def extract_spectra(history: OracleHistory) -> SpectrumGrid:
    """Density-normalized joint spectrum |a2|^2 / (dy * dz) on the mode grid.

    Valid only when the evolution stayed inside half the recurrence horizon
    and the intermediate sector has emptied out.
    """
    model = history.model
    if history.t_final >= 0.5 * model.recurrence_time:
        raise RecurrenceTooShort(
            f"t_final={history.t_final:.4g} is past half the recurrence "
            f"horizon {model.recurrence_time:.4g}")
    leftover = float(np.sum(np.abs(history.final_a1) ** 2))
    if leftover > INTERMEDIATE_LIMIT:
        raise NotConverged(
            f"intermediate sector still holds {leftover:.2e} probability")
    values = np.abs(history.final_a2) ** 2 / (model.y_step * model.z_step)
    return _make_grid((model.y_energies.copy(), model.z_energies.copy()),
                      values, "oracle_joint")


def l1_distance(a: SpectrumGrid, b: SpectrumGrid) -> float:
    """Relative L1 distance of two spectra sampled on the same grid."""
    if a.values.shape != b.values.shape:
        raise ValueError("spectra shapes differ")
    num = np.sum(np.abs(a.values - b.values))
    den = np.sum(np.abs(b.values))
    return float(num / den)


def reference_joint_on_model(constants, model: DiscreteModel) -> SpectrumGrid:
    """Analytic joint distribution evaluated at the oracle's mode energies."""
    lam_t = constants.perturbed.lam
    lam1 = constants.gamma1.lam
    bar02, bar12 = constants.energies.bar02, constants.energies.bar12
    y = model.y_energies
    z = model.z_energies
    vy = np.asarray(constants.system.density_y(y), dtype=float)
    wz = np.asarray(constants.system.density_z(z), dtype=float)
    ridge = lam_t**2 + (y[:, None] + z[None, :] - bar02) ** 2
    zline = lam1**2 + (z - bar12) ** 2
    values = vy[:, None] * wz[None, :] / (ridge * zline[None, :])
    return _make_grid((y.copy(), z.copy()), values, "joint")
