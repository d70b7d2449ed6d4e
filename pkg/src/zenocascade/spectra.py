"""Energy distributions of the two emitted quanta.

The joint distribution factorizes into both spectral densities over two
Lorentzian line factors: a ridge of half-width lam~0 along constant total
energy centred on the corrected two-step transition energy, and a line of
half-width lam1 in the second quantum's energy:

    p(wy, wz) = V(wy) W(wz) / ( [lam~0^2 + (wy + wz - bar02)^2]
                                * [lam1^2 + (wz - bar12)^2] )

Marginals and the total-energy distribution come either from direct grid
integration of the joint density (mode "numeric", always valid) or from
the residue/slow-variation closed forms (mode "closed", valid when the
densities vary slowly on the line-factor scales).  Spectra are reported
unnormalized with the measured total mass attached; a mass deficit is a
diagnostic of approximation breakdown, not something to hide by rescaling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import curve_fit

from . import quadrature
from .errors import GridTooCoarse, NoPeak
from .rates import CascadeConstants

Mode = Literal["numeric", "closed"]

#: grid step must stay at or below the ridge half-width over this factor
RIDGE_RESOLUTION = 5.0


@dataclass(frozen=True)
class SpectrumGrid:
    """Sampled distribution on uniform axes, with its integrated mass."""

    axes: tuple[np.ndarray, ...]
    values: np.ndarray
    tag: str
    mass: float

    def __post_init__(self):
        if self.values.min() < 0.0:
            raise ValueError("spectrum values must be nonnegative")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def step(self, axis: int = 0) -> float:
        ax = self.axes[axis]
        return float(ax[1] - ax[0])


def _grid_mass(axes, values) -> float:
    mass = values
    for ax in reversed(axes):
        mass = np.trapezoid(mass, ax, axis=-1)
    return float(mass)


def _make_grid(axes, values, tag) -> SpectrumGrid:
    return SpectrumGrid(tuple(axes), values, tag, _grid_mass(axes, values))


@dataclass(frozen=True)
class GridSpec:
    y_min: float
    y_max: float
    y_step: float
    z_min: float
    z_max: float
    z_step: float

    def y_axis(self) -> np.ndarray:
        return _axis(self.y_min, self.y_max, self.y_step)

    def z_axis(self) -> np.ndarray:
        return _axis(self.z_min, self.z_max, self.z_step)

    @classmethod
    def auto(cls, constants: CascadeConstants, resolution: float = 10.0) -> "GridSpec":
        """Range rule: each axis covers its full density support plus at
        least 20 line half-widths around the corresponding peak."""
        lam_t = constants.perturbed.lam
        lam1 = constants.gamma1.lam
        step = min(lam_t, lam1) / resolution
        wy = 20.0 * (lam_t + lam1)
        wz = 20.0 * lam1
        y_lo, y_hi = _effective_support(constants.system.density_y)
        z_lo, z_hi = _effective_support(constants.system.density_z)
        bar01, bar12 = constants.energies.bar01, constants.energies.bar12
        return cls(
            y_min=max(0.0, min(y_lo, bar01 - wy)),
            y_max=max(y_hi, bar01 + wy),
            y_step=step,
            z_min=max(0.0, min(z_lo, bar12 - wz)),
            z_max=max(z_hi, bar12 + wz),
            z_step=step,
        )


def _axis(lo, hi, step) -> np.ndarray:
    n = max(2, int(np.ceil((hi - lo) / step)) + 1)
    return lo + step * np.arange(n)


def _effective_support(density) -> tuple[float, float]:
    lo, hi = density.support()
    if not np.isfinite(hi):
        hi = density.cutoff_scale * 15.0  # exp-type tail mass ~ 5e-6 beyond
    return lo, hi


def joint_spectrum(
    constants: CascadeConstants,
    grid: GridSpec | None = None,
) -> SpectrumGrid:
    """Joint distribution p(wy, wz) on the product grid (2D)."""
    if grid is None:
        grid = GridSpec.auto(constants)
    lam_t = constants.perturbed.lam
    lam1 = constants.gamma1.lam
    if lam_t <= 0.0 or lam1 <= 0.0:
        raise ValueError("joint spectrum needs strictly positive half-rates")
    if max(grid.y_step, grid.z_step) > lam_t / RIDGE_RESOLUTION * (1.0 + 1e-12):
        raise GridTooCoarse(
            f"grid step {max(grid.y_step, grid.z_step):.3e} exceeds "
            f"ridge half-width / {RIDGE_RESOLUTION:g} = {lam_t / RIDGE_RESOLUTION:.3e}")

    y = grid.y_axis()
    z = grid.z_axis()
    vy = np.asarray(constants.system.density_y(y), dtype=float)
    wz = np.asarray(constants.system.density_z(z), dtype=float)
    bar02, bar12 = constants.energies.bar02, constants.energies.bar12
    zline = lam1**2 + (z - bar12) ** 2
    values = np.empty((y.size, z.size))
    block = max(1, int(4e6 // z.size))
    for i0 in range(0, y.size, block):
        i1 = min(i0 + block, y.size)
        ridge = lam_t**2 + (y[i0:i1, None] + z[None, :] - bar02) ** 2
        values[i0:i1] = (vy[i0:i1, None] * wz[None, :]) / (ridge * zline[None, :])
    return _make_grid((y, z), values, "joint")


def _require_joint(source):
    if not (isinstance(source, SpectrumGrid) and source.ndim == 2):
        raise TypeError("numeric mode needs a 2-d joint SpectrumGrid")
    return source


def _require_constants(source, axis):
    if not isinstance(source, CascadeConstants):
        raise TypeError("closed mode needs CascadeConstants")
    if axis is None:
        raise ValueError("closed mode needs an explicit axis")
    return np.asarray(axis, dtype=float)


def marginal_y(
    source: SpectrumGrid | CascadeConstants,
    mode: Mode = "numeric",
    axis: np.ndarray | None = None,
) -> SpectrumGrid:
    """First-quantum spectrum: z integrated out, or the residue closed form
    (a Lorentzian of half-width lam~0 + lam1 under the density envelope)."""
    if mode == "numeric":
        joint = _require_joint(source)
        y, z = joint.axes
        values = np.trapezoid(joint.values, z, axis=1)
        return _make_grid((y,), values, "marginal_y_numeric")
    constants = source
    y = _require_constants(source, axis)
    lam_t = constants.perturbed.lam
    width = lam_t + constants.gamma1.lam
    vy = np.asarray(constants.system.density_y(y), dtype=float)
    line = (1.0 / np.pi) * width / (width**2 + (y - constants.energies.bar01) ** 2)
    values = np.pi * vy / lam_t * line
    return _make_grid((y,), values, "marginal_y_closed")


def marginal_z(
    source: SpectrumGrid | CascadeConstants,
    mode: Mode = "numeric",
    axis: np.ndarray | None = None,
) -> SpectrumGrid:
    """Second-quantum spectrum: y integrated out, or the slow-variation
    closed form (Lorentzian of half-width lam1 under the mirrored density)."""
    if mode == "numeric":
        joint = _require_joint(source)
        y, z = joint.axes
        values = np.trapezoid(joint.values, y, axis=0)
        return _make_grid((z,), values, "marginal_z_numeric")
    constants = source
    z = _require_constants(source, axis)
    lam_t = constants.perturbed.lam
    lam1 = constants.gamma1.lam
    mirrored = np.asarray(
        constants.system.density_y(constants.energies.bar02 - z), dtype=float)
    line = (1.0 / np.pi) * lam1 / (lam1**2 + (z - constants.energies.bar12) ** 2)
    values = np.pi * mirrored / lam_t * line
    return _make_grid((z,), values, "marginal_z_closed")


def sum_energy(
    source: SpectrumGrid | CascadeConstants,
    mode: Mode = "numeric",
    axis: np.ndarray | None = None,
) -> SpectrumGrid:
    """Distribution of the total emitted energy.

    numeric: anti-diagonal integration of the joint grid with linear
    interpolation between nodes.  closed: narrow ridge Lorentzian under the
    Lorentzian-smeared density weight S."""
    if mode == "numeric":
        joint = _require_joint(source)
        y, z = joint.axes
        step = min(joint.step(0), joint.step(1))
        omega = _axis(y[0] + z[0], y[-1] + z[-1], step)
        weights = np.full(y.size, joint.step(0))
        weights[0] *= 0.5
        weights[-1] *= 0.5
        values = np.zeros(omega.size)
        for i in range(y.size):
            values += weights[i] * np.interp(
                omega - y[i], z, joint.values[i], left=0.0, right=0.0)
        return _make_grid((omega,), values, "sum_numeric")

    constants = source
    omega = _require_constants(source, axis)
    lam_t = constants.perturbed.lam
    lam1 = constants.gamma1.lam
    bar12, bar02 = constants.energies.bar12, constants.energies.bar02
    s_weight = np.empty(omega.size)
    for k, om in enumerate(omega):
        if om <= 0.0:
            s_weight[k] = 0.0
            continue
        conv = quadrature.lorentzian_convolution(
            constants.system.density_y, om - bar12, lam1, "absorptive",
            upper_cut=om)
        s_weight[k] = conv.value / np.pi
    values = s_weight / (lam_t**2 + (omega - bar02) ** 2)
    values = np.maximum(values, 0.0)
    return _make_grid((omega,), values, "sum_closed")


@dataclass(frozen=True)
class LorentzianFit:
    center: float
    half_width: float
    amplitude: float
    residual: float  # relative L2 misfit


def fit_lorentzian(spectrum: SpectrumGrid) -> LorentzianFit:
    """Least-squares Lorentzian fit of a single-peak 1D spectrum.

    Raises NoPeak when the maximum sits on the grid boundary or the fit
    does not converge; a large residual (reported, not raised) is how a
    deformed or continuous spectrum shows up.
    """
    if spectrum.ndim != 1:
        raise ValueError("fit_lorentzian expects a 1-d spectrum")
    x = spectrum.axes[0]
    v = spectrum.values
    imax = int(np.argmax(v))
    if imax == 0 or imax == v.size - 1 or v[imax] <= 0.0:
        raise NoPeak("maximum sits on the grid boundary")

    half = 0.5 * v[imax]
    above = v >= half
    left = imax - np.argmin(above[:imax + 1][::-1])
    right = imax + np.argmin(above[imax:])
    hw0 = max(0.5 * (x[min(right, v.size - 1)] - x[max(left, 0)]),
              x[1] - x[0])

    def model(xx, amp, center, hw):
        return amp * hw**2 / (hw**2 + (xx - center) ** 2)

    try:
        params, _ = curve_fit(
            model, x, v, p0=(v[imax], x[imax], hw0),
            bounds=([0.0, x[0], 0.0], [np.inf, x[-1], 10.0 * (x[-1] - x[0])]),
            maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise NoPeak(f"Lorentzian fit did not converge: {exc}") from exc
    amp, center, hw = params
    residual = float(np.linalg.norm(model(x, *params) - v) / np.linalg.norm(v))
    return LorentzianFit(float(center), float(abs(hw)), float(amp), residual)


def fwhm(spectrum: SpectrumGrid) -> float:
    """Full width at half maximum read off the grid by linear interpolation."""
    x = spectrum.axes[0]
    v = spectrum.values
    imax = int(np.argmax(v))
    if imax == 0 or imax == v.size - 1:
        raise NoPeak("maximum sits on the grid boundary")
    half = 0.5 * v[imax]

    def crossing(idx_range):
        for i in idx_range:
            lo, hi = sorted((v[i], v[i + 1]))
            if lo <= half <= hi and v[i] != v[i + 1]:
                frac = (half - v[i]) / (v[i + 1] - v[i])
                return x[i] + frac * (x[i + 1] - x[i])
        raise NoPeak("half-maximum level never crossed")

    left = crossing(range(imax - 1, -1, -1))
    right = crossing(range(imax, v.size - 1))
    return float(right - left)


def classify_regime(constants: CascadeConstants) -> str:
    """Operational regime labels for the three qualitative cases."""
    bar01 = constants.energies.bar01
    lam1 = constants.gamma1.lam
    if bar01 < 0.0:
        return "regime3"
    if lam1 < 0.1 * bar01:
        return "regime1"
    if lam1 <= 10.0 * bar01:
        return "regime2"
    return "regime2"
