"""One-dimensional integrals used throughout the cascade computations.

Three entry points:

* ``integrate_semi_infinite`` -- smooth or compactly supported integrands
  on [0, inf), truncated where a tail bound drops below tolerance.
* ``principal_value`` -- Cauchy principal values with a simple pole,
  computed by symmetric-interval pairing around the pole plus ordinary
  adaptive integrals outside, with a Richardson step in the exclusion
  radius to confirm insensitivity.
* ``lorentzian_convolution`` -- absorptive/dispersive overlap of a density
  with a Lorentzian line factor, evaluated under the arctangent
  substitution so the result stays accurate for any half-width.

The local adaptive engine is QUADPACK (nested Gauss-Kronrod rules with
interval bisection, global tolerance split by interval error), which is
exactly the scheme the window-edge kinks of the flat-window family need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy import integrate

from .errors import NoConvergence, NonIntegrable, PoleOnSupportBoundary

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-12
#: truncation of semi-infinite ranges starts at center + K * max(cutoff, half_width)
TRUNCATION_MULTIPLE = 50.0
#: principal-value exclusion radius, as a fraction of the local scale
PV_DELTA_FRACTION = 1e-3

_QUAD_LIMIT = 500
_MAX_EXTENSIONS = 25


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.error_estimate < 0.0:
            raise ValueError("error_estimate must be nonnegative")


def _hints(f, cutoff_scale, breakpoints):
    """Pull truncation metadata off a density-like integrand."""
    if cutoff_scale is None:
        cutoff_scale = getattr(f, "cutoff_scale", None)
    if breakpoints is None:
        breaks = getattr(f, "breakpoints", None)
        breakpoints = tuple(breaks()) if callable(breaks) else ()
    support = getattr(f, "support", None)
    support = support() if callable(support) else (0.0, np.inf)
    return cutoff_scale, tuple(breakpoints), support


def _quad(f, lo, hi, rtol, atol, points=()):
    pts = sorted(p for p in points if lo < p < hi)
    if len(pts) > 160:
        # a dense node set (finely tabulated density) would exceed the
        # subdivision budget; keep a representative subset as hints
        stride = len(pts) // 120 + 1
        pts = pts[::stride]
    try:
        value, err, info = integrate.quad(
            f, lo, hi,
            epsabs=atol, epsrel=rtol,
            limit=_QUAD_LIMIT,
            points=pts or None,
            full_output=True,
        )[:3]
    except Exception as exc:  # quad raises on hard failures (e.g. NaN)
        raise NoConvergence(f"quadrature failed on [{lo}, {hi}]: {exc}") from exc
    if not np.isfinite(value):
        raise NoConvergence(f"quadrature diverged on [{lo}, {hi}]")
    if err > 10.0 * (atol + rtol * abs(value)) and info["last"] >= _QUAD_LIMIT:
        raise NoConvergence(
            f"subdivision limit reached on [{lo}, {hi}] (err={err:.3e})"
        )
    return value, err, info["neval"]


def _tail_bound(g, upper, cutoff_scale):
    # covers both exponential tails (~ g * cutoff) and 1/w^2 tails (~ g * w)
    return abs(g(upper)) * 2.0 * max(upper, cutoff_scale or 0.0)


def _scale_markers(hi, *scales):
    """Geometric split points so the adaptive rule cannot overlook structure
    that occupies a tiny fraction of a wide integration range."""
    pts = []
    for scale in scales:
        if scale and np.isfinite(scale) and scale > 0.0:
            x = 0.25 * scale
            while x < hi:
                pts.append(x)
                x *= 2.0
    return pts


def _initial_upper(f, cutoff_scale, support_hi, atol, center=0.0, half_width=0.0):
    if np.isfinite(support_hi):
        return float(support_hi), True
    if cutoff_scale is not None:
        return center + TRUNCATION_MULTIPLE * max(cutoff_scale, half_width), False
    # bare callable: probe geometrically for the decay scale
    upper = 1.0
    for _ in range(60):
        samples = np.abs([f(upper * x) for x in (1.0, 1.17, 1.43, 1.71, 1.96)])
        if samples.max() * 2.0 * upper < max(atol, 1e-300):
            return 2.0 * upper, False
        upper *= 2.0
    raise NonIntegrable("integrand does not decay on [0, inf)")


def _integrate_extending(g, lo, upper, exact, rtol, atol, points, cutoff_scale):
    """Quadrature on [lo, upper], extending the range until the tail bound
    is below tolerance (skipped when ``exact``: support ends at ``upper``)."""
    value, err, nevals = _quad(g, lo, upper, rtol, atol, points)
    if exact:
        return value, err, nevals, upper
    for _ in range(_MAX_EXTENSIONS):
        tail = _tail_bound(g, upper, cutoff_scale)
        if tail <= 0.5 * (atol + rtol * abs(value)):
            return value, err + tail, nevals, upper
        piece, perr, pn = _quad(g, upper, 4.0 * upper, rtol, atol, points)
        value += piece
        err += perr
        nevals += pn
        upper *= 4.0
    raise NonIntegrable("tail bound never dropped below the tolerance")


def integrate_semi_infinite(
    f: Callable[[float], float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    *,
    cutoff_scale: float | None = None,
    breakpoints: tuple[float, ...] | None = None,
) -> QuadratureResult:
    """Adaptive estimate of the integral of ``f`` over [0, inf).

    ``f`` must be piecewise smooth and either compactly supported or
    decaying; densities carry their own ``cutoff_scale``/``breakpoints``
    hints, other callables are probed geometrically.
    """
    cutoff_scale, points, support = _hints(f, cutoff_scale, breakpoints)
    lo = max(0.0, support[0])
    upper, exact = _initial_upper(f, cutoff_scale, support[1], atol)
    pts = list(points) + _scale_markers(upper, cutoff_scale)
    value, err, nevals, _ = _integrate_extending(
        f, lo, upper, exact, rtol, atol, pts, cutoff_scale)
    return QuadratureResult(value, err, nevals)


def _jump_at(f, x, scale):
    """True when ``f`` has a two-sided jump at ``x`` (not a mere kink)."""
    ss = scale * np.array([1.0, 0.25, 0.0625, 2e-4, 1e-6])
    gaps = np.array([abs(f(x + s) - f(x - s)) for s in ss])
    level = max(abs(f(x + scale)), abs(f(x - scale)), gaps.max(), 1e-300)
    return gaps[-1] > 1e-3 * level


def principal_value(
    f: Callable[[float], float],
    pole: float,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    *,
    cutoff_scale: float | None = None,
    breakpoints: tuple[float, ...] | None = None,
) -> QuadratureResult:
    """Cauchy principal value of the integral of f(w)/(w - pole) on [0, inf).

    A pole at or below zero is outside the integration range, and the
    integral reduces to an ordinary semi-infinite one.
    """
    cutoff_scale, points, support = _hints(f, cutoff_scale, breakpoints)
    upper, exact = _initial_upper(f, cutoff_scale, support[1], atol)
    if len(points) > 100:  # keep room for the pole approach zones below
        points = points[::len(points) // 80 + 1]
    points = tuple(points) + tuple(_scale_markers(upper, cutoff_scale))

    def outer(w):
        return f(w) / (w - pole)

    if pole <= 0.0 or pole >= upper:
        if pole == 0.0 and abs(f(1e-9 * upper)) > 1e-9 * max(abs(f(upper * 0.5)), atol):
            raise PoleOnSupportBoundary("pole sits on the lower integration limit")
        value, err, n, _ = _integrate_extending(
            outer, 0.0, upper, exact and pole < upper, rtol, atol, points, cutoff_scale)
        return QuadratureResult(value, err, n)

    scale = min(pole, upper - pole)
    if _jump_at(f, pole, PV_DELTA_FRACTION * scale):
        raise PoleOnSupportBoundary(f"integrand jumps at the pole (w = {pole!r})")
    dist = min(
        (abs(b - pole) for b in points if abs(b - pole) > 1e-9 * scale),
        default=np.inf,
    )
    delta = min(PV_DELTA_FRACTION * scale, 0.5 * dist)

    def paired(s):
        return (f(pole + s) - f(pole - s)) / s

    def approach_zones(d, lo_edge, hi_edge):
        # geometric splits so the 1/(w - pole) growth is tame per piece
        cuts = []
        width = d
        while pole - lo_edge > width or hi_edge - pole > width:
            if pole - width > lo_edge:
                cuts.append(pole - width)
            if pole + width < hi_edge:
                cuts.append(pole + width)
            width *= 8.0
        return cuts

    def total(d):
        zone_pts = tuple(points) + tuple(approach_zones(d, 0.0, upper))
        v1, e1, n1 = _quad(paired, 0.0, d, rtol, atol)
        v2, e2, n2 = _quad(outer, 0.0, pole - d, rtol, atol, zone_pts)
        v3, e3, n3, _ = _integrate_extending(
            outer, pole + d, upper, exact, rtol, atol, zone_pts, cutoff_scale)
        return v1 + v2 + v3, e1 + e2 + e3, n1 + n2 + n3

    coarse, _, _ = total(delta)
    value, err, nevals = total(0.5 * delta)
    # one Richardson step in the exclusion radius; the exact result is
    # delta-independent, so any drift is numerical error
    return QuadratureResult(value, err + abs(value - coarse), nevals)


Kind = Literal["absorptive", "dispersive"]


def lorentzian_convolution(
    density,
    center: float,
    half_width: float,
    kind: Kind = "absorptive",
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    *,
    upper_cut: float | None = None,
) -> QuadratureResult:
    """Overlap of a density with a Lorentzian line factor.

    absorptive:  integral of V(w) * hw / (hw^2 + (w - center)^2) dw
    dispersive:  integral of V(w) * (w - center) / (hw^2 + (w - center)^2) dw

    both over w in [0, inf) (optionally cut at ``upper_cut``).  Under
    w = center + half_width * tan(theta) the absorptive integrand becomes
    plain V(theta), so arbitrarily narrow lines cost nothing extra.
    """
    if half_width <= 0.0:
        raise ValueError("half_width must be positive")
    if kind not in ("absorptive", "dispersive"):
        raise ValueError(f"unknown kind {kind!r}")
    cutoff_scale, points, support = _hints(density, None, None)

    lo = max(0.0, support[0])
    hi, exact = _initial_upper(density, cutoff_scale, support[1], atol,
                               center=max(center, 0.0), half_width=half_width)
    if upper_cut is not None:
        hi, exact = min(hi, upper_cut), True
    if hi <= lo:
        return QuadratureResult(0.0, 0.0, 0)

    if kind == "absorptive":
        return _absorptive(density, center, half_width, rtol, atol,
                           lo, hi, exact, points, cutoff_scale)
    return _dispersive(density, center, half_width, rtol, atol,
                       lo, hi, exact, points, cutoff_scale)


def _absorptive(density, center, hw, rtol, atol, lo, hi, exact, points, cutoff_scale):
    def theta_of(w):
        return np.arctan((w - center) / hw)

    def g(theta):
        return density(center + hw * np.tan(theta))

    def g_omega(w):
        return density(w) * hw / (hw**2 + (w - center) ** 2)

    theta_pts = [theta_of(b) for b in points if lo < b < hi] + [0.0]
    value, err, nevals = _quad(g, theta_of(lo), theta_of(hi), rtol, atol, theta_pts)
    if not exact:
        for _ in range(_MAX_EXTENSIONS):
            tail = _tail_bound(g_omega, hi, cutoff_scale)
            if tail <= 0.5 * (atol + rtol * abs(value)):
                err += tail
                break
            piece, perr, pn = _quad(g, theta_of(hi), theta_of(4.0 * hi), rtol, atol)
            value += piece
            err += perr
            nevals += pn
            hi *= 4.0
        else:
            raise NonIntegrable("density tail too heavy for this line-factor integral")
    return QuadratureResult(value, err, nevals)


def _dispersive(density, center, hw, rtol, atol, lo, hi, exact, points, cutoff_scale):
    """Dispersive overlap by symmetric pairing: the kernel is odd about the
    centre, so on [center - R, center + R] only the antisymmetric part of
    the density contributes, which stays well conditioned for any width."""

    def g_omega(w):
        return density(w) * (w - center) / (hw**2 + (w - center) ** 2)

    far_pts = list(points) + _scale_markers(hi, cutoff_scale, abs(center) + hw)

    if center <= 0.0 or center >= hi:
        # line centre outside the range: integrand is smooth throughout
        value, err, nevals, _ = _integrate_extending(
            g_omega, lo, hi, exact or center >= hi, rtol, atol, far_pts, cutoff_scale)
        return QuadratureResult(value, err, nevals)

    radius = min(center, hi - center)

    def paired(s):
        gap = density(center + s) - density(center - s)
        return gap * s / (hw**2 + s**2)

    s_pts = [abs(b - center) for b in points if 0.0 < abs(b - center) < radius]
    s_pts += [hw] if hw < radius else []
    value, err, nevals = _quad(paired, 0.0, radius, rtol, atol, s_pts)
    if center - radius > 0.0:
        piece, perr, pn = _quad(g_omega, 0.0, center - radius, rtol, atol, far_pts)
        value += piece
        err += perr
        nevals += pn
    piece, perr, pn, _ = _integrate_extending(
        g_omega, center + radius, hi, exact, rtol, atol, far_pts, cutoff_scale)
    return QuadratureResult(value + piece, err + perr, nevals + pn)
