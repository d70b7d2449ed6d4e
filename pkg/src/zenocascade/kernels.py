"""Memory kernels and the non-Markovian amplitude equation.

The survival amplitude of the initial level obeys a convolution Volterra
integro-differential equation

    da/dt (t) = - integral_0^t a(t1) q(t - t1) dt1,

with the kernel

    q(tau) = exp(-damping*tau) * exp(i*E*tau)
             * integral_0^inf V(w) exp(-i*w*tau) dw,

E the transition energy and damping the complex decay constant of the
decay's final state (zero for a stable final state).  A wide smooth
density has a narrow Fourier peak, so q is sharply concentrated near
tau = 0 and the Markovian reduction a(t) = exp(-gamma*t) applies for
times well past 1/E; the solver here keeps the full convolution so the
reduction can be checked rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import integrate

from .densities import FlatWindow, SpectralDensity, Tabulated
from .errors import GridMismatch, OscillationResolution, StepTooCoarse
from .rates import ComplexDecayConstant

#: kernel samples with |q| below this fraction of q(0) are treated as zero
KERNEL_FLOOR = 1e-12


def _fourier_flat(density: FlatWindow, tau: np.ndarray) -> np.ndarray:
    # integral_a^b v0 e^{-iw tau} dw, written in a cancellation-free form
    half = 0.5 * (density.b - density.a)
    mid = 0.5 * (density.b + density.a)
    return (density.v0 * (density.b - density.a)
            * np.sinc(half * tau / np.pi) * np.exp(-1j * mid * tau))


def _fourier_polyline(omega: np.ndarray, values: np.ndarray,
                      tau: np.ndarray) -> np.ndarray:
    """Exact transform of a piecewise-linear density (Filon-stable)."""
    out = np.zeros(tau.shape, dtype=complex)
    small = np.abs(tau) < 1e-300
    safe_tau = np.where(small, 1.0, tau)
    for w1, w2, v1, v2 in zip(omega[:-1], omega[1:], values[:-1], values[1:]):
        half = 0.5 * (w2 - w1)
        mid = 0.5 * (w2 + w1)
        vbar = 0.5 * (v1 + v2)
        slope = (v2 - v1) / (w2 - w1)
        y = half * safe_tau
        # int_{-u}^{u} (vbar + s*x) e^{-ix tau} dx, via sin(y)/y forms
        even = vbar * 2.0 * half * np.sinc(y / np.pi)
        siny_min_ycosy = np.where(
            np.abs(y) < 1e-4,
            y**3 / 3.0 - y**5 / 30.0,
            np.sin(y) - y * np.cos(y),
        )
        odd = -2j * slope * siny_min_ycosy / safe_tau**2
        out += np.exp(-1j * mid * safe_tau) * (even + odd)
    if np.any(small):
        out[small] = np.trapezoid(values, omega)
    return out


def _fourier_oscillatory(density: SpectralDensity, tau: np.ndarray,
                         rtol: float, atol: float) -> np.ndarray:
    """Oscillatory quadrature of the density transform, per tau sample."""
    from .quadrature import _initial_upper, _scale_markers

    upper, _ = _initial_upper(density, density.cutoff_scale, density.support()[1],
                              atol)
    # split only at genuine features; QAWO subdivides smooth segments itself
    cuts = sorted({0.0, upper, *(b for b in density.breakpoints() if b < upper)})
    weight = density.total_weight()
    # absolute tolerance relative to q(0): tail samples this small are far
    # below anything the convolution can feel
    eps = max(atol, 1e-9 * weight)
    out = np.empty(tau.shape, dtype=complex)
    for k, t in enumerate(tau.ravel()):
        if t == 0.0:
            out[k] = weight
            continue
        real = imag = 0.0
        try:
            for lo, hi in zip(cuts[:-1], cuts[1:]):
                real += integrate.quad(density, lo, hi, weight="cos", wvar=t,
                                       epsabs=eps, epsrel=rtol, limit=400)[0]
                imag += integrate.quad(density, lo, hi, weight="sin", wvar=t,
                                       epsabs=eps, epsrel=rtol, limit=400)[0]
        except Exception as exc:
            raise OscillationResolution(
                f"oscillatory quadrature failed at tau={t!r}: {exc}") from exc
        out[k] = real - 1j * imag
    return out


@dataclass(frozen=True)
class MemoryKernel:
    """Kernel samples on a uniform tau grid, ready for the solver."""

    transition_energy: float
    density: SpectralDensity
    damping: complex
    step: float
    values: np.ndarray  # complex, values[k] = q(k * step)

    @property
    def tau(self) -> np.ndarray:
        return self.step * np.arange(len(self.values))

    @property
    def weight(self) -> float:
        """q(0), the total density weight."""
        return float(self.values[0].real)


def build_kernel(
    density: SpectralDensity,
    transition_energy: float,
    damping: complex = 0.0,
    *,
    t_max: float,
    step: float,
    rtol: float = 1e-10,
    atol: float = 1e-14,
) -> MemoryKernel:
    """Sample q(tau) on the uniform grid 0, step, ..., >= t_max.

    The grid must resolve the density's Fourier peak (step well below
    1/cutoff_scale).  Samples past the point where |q| stays below
    KERNEL_FLOOR * q(0) are zeroed, which bounds the solver's convolution
    window for damped kernels.
    """
    if step <= 0.0 or t_max <= 0.0:
        raise ValueError("t_max and step must be positive")
    n = int(np.ceil(t_max / step)) + 1
    tau = step * np.arange(n)

    lam = float(np.real(damping))
    if lam > 0.0:
        # exp(-lam*tau) alone pushes |q| under the floor past this point
        t_cut = -np.log(KERNEL_FLOOR) / lam
        n_keep = min(n, int(np.ceil(t_cut / step)) + 1)
    else:
        n_keep = n
    tau_kept = tau[:n_keep]

    if isinstance(density, FlatWindow):
        transform = _fourier_flat(density, tau_kept)
    elif isinstance(density, Tabulated):
        transform = _fourier_polyline(density.omega, density.values, tau_kept)
    else:
        transform = _fourier_oscillatory(density, tau_kept, rtol, atol)

    values = np.zeros(n, dtype=complex)
    phase = np.exp((1j * transition_energy - damping) * tau_kept)
    values[:n_keep] = transform * phase
    weight = abs(values[0])
    dead = np.abs(values) < KERNEL_FLOOR * weight
    # zero only the all-dead tail, not interior oscillation nulls
    alive = np.nonzero(~dead)[0]
    if alive.size and alive[-1] + 1 < n:
        values[alive[-1] + 1:] = 0.0
    return MemoryKernel(transition_energy, density, complex(damping), step, values)


@dataclass(frozen=True)
class AmplitudeTrace:
    """Survival amplitude samples on a uniform time grid."""

    times: np.ndarray
    values: np.ndarray
    method: Literal["volterra", "markov"]
    transition_energy: float | None = None

    def __post_init__(self):
        if abs(self.values[0] - 1.0) > 1e-12:
            raise ValueError("amplitude must start at 1")
        if np.max(np.abs(self.values)) > 1.0 + 1e-6:
            raise ValueError("amplitude exceeded the unitarity bound")

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def probability(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def _advance(values: np.ndarray, q: np.ndarray, h: float, n_steps: int,
             window: int) -> None:
    """Product-integration trapezoidal stepping, in place.

    At each step the convolution over the past is a trapezoid sum of
    kernel samples against amplitude samples on the shared grid; the new
    amplitude appears only through q(0), so the update is explicit.
    """
    q0 = q[0]
    denom = 1.0 + 0.25 * h * h * q0
    conv_prev = 0.0 + 0.0j
    for n in range(n_steps):
        m = n + 1
        j0 = max(1, m - window)
        # sum_{j=j0}^{n} q_{m-j} a_j  (kernel reversed against the amplitude)
        partial = np.dot(values[j0:m], q[m - j0:0:-1]) if m > 1 else 0.0
        tail = 0.5 * q[m] * values[0] if m <= window else 0.0
        known = h * (tail + partial)
        values[m] = (values[n] - 0.5 * h * (conv_prev + known)) / denom
        conv_prev = known + 0.5 * h * q0 * values[m]


def solve_volterra(
    kernel: MemoryKernel,
    t_max: float,
    step: float,
    check_rtol: float | None = 1e-2,
) -> AmplitudeTrace:
    """March the convolution equation to ``t_max`` with step ``step``.

    Second-order product-integration trapezoidal rule; cost is one dot
    product of the live kernel window per step.  When ``check_rtol`` is
    set, a run at double the step must agree at the endpoint to that
    relative tolerance, otherwise StepTooCoarse is raised.
    """
    if abs(kernel.step - step) > 1e-12 * step:
        raise GridMismatch(
            f"kernel step {kernel.step!r} does not match solver step {step!r}")
    n_steps = int(round(t_max / step))
    if len(kernel.values) < n_steps + 1:
        raise GridMismatch("kernel grid does not cover the requested horizon")

    q = kernel.values
    alive = np.nonzero(np.abs(q) > 0.0)[0]
    window = int(alive[-1]) if alive.size else 0

    values = np.empty(n_steps + 1, dtype=complex)
    values[0] = 1.0
    _advance(values, q, step, n_steps, max(window, 1))

    if check_rtol is not None and n_steps >= 4:
        coarse_n = n_steps // 2
        coarse = np.empty(coarse_n + 1, dtype=complex)
        coarse[0] = 1.0
        _advance(coarse, q[::2], 2.0 * step, coarse_n, max(window // 2, 1))
        end = abs(values[2 * coarse_n])
        # modulus endpoint: a global O(h^2) phase drift is benign, the
        # survival probability is what every downstream check consumes
        if abs(abs(coarse[-1]) - end) > check_rtol * max(end, 1e-30):
            raise StepTooCoarse(
                f"doubling the step moves the endpoint modulus by "
                f"{abs(abs(coarse[-1]) - end):.3e} (limit {check_rtol:.1e} relative)")

    times = step * np.arange(n_steps + 1)
    return AmplitudeTrace(times, values, "volterra", kernel.transition_energy)


def markov_trace(
    gamma: ComplexDecayConstant | complex,
    t_max: float,
    step: float,
    transition_energy: float | None = None,
) -> AmplitudeTrace:
    """Exponential samples exp(-gamma*t) of the Markovian reduction."""
    g = gamma.as_complex if isinstance(gamma, ComplexDecayConstant) else complex(gamma)
    n_steps = int(round(t_max / step))
    times = step * np.arange(n_steps + 1)
    values = np.exp(-(g.real + 1j * g.imag) * times)
    return AmplitudeTrace(times, values, "markov", transition_energy)


@dataclass(frozen=True)
class TraceDeviation:
    sup_rel: float
    l2_rel: float
    t_min: float
    n_compared: int


def compare_traces(
    a: AmplitudeTrace,
    b: AmplitudeTrace,
    t_min: float | None = None,
) -> TraceDeviation:
    """Sup and L2 relative deviation of |amplitude| over t >= t_min.

    The default t_min of 10/|E| excludes the short-time region where the
    Markovian reduction is not claimed to hold.
    """
    if a.times.shape != b.times.shape or not np.allclose(
            a.times, b.times, rtol=0.0, atol=1e-9 * a.step):
        raise GridMismatch("traces are not on the same time grid")
    if t_min is None:
        energy = a.transition_energy or b.transition_energy
        t_min = 10.0 / abs(energy) if energy else 0.0
    mask = a.times >= t_min
    if not np.any(mask):
        raise GridMismatch(f"no samples past t_min={t_min!r}")
    mod_a = np.abs(a.values[mask])
    mod_b = np.abs(b.values[mask])
    scale = np.maximum(mod_b, 1e-300)
    rel = np.abs(mod_a - mod_b) / scale
    l2 = float(np.sqrt(np.sum((mod_a - mod_b) ** 2) / np.sum(mod_b**2)))
    return TraceDeviation(float(rel.max()), l2, float(t_min), int(mask.sum()))
