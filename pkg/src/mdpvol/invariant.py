"""Invariant measures of the fast factor process and quadrature against them.

For the mean-reverting square-root factor dY = kappa (theta - Y) dt
+ xi sqrt(Y) dZ the invariant measure is the Gamma law with shape
2 kappa theta / xi^2 and rate 2 kappa / xi^2, available in closed form.  For
the wider power-diffusion family g(y) = xi y^{q_g}, q_g in [1/2, 1), the
invariant density is proportional to the speed measure

    m(y) ~ (xi^2 y^{2 q_g})^{-1} exp( int_1^y 2 kappa (theta - z) / (xi^2 z^{2 q_g}) dz ),

whose inner exponent is evaluated numerically with the anchor point at 1 and
which is then normalized by quadrature.  The numeric construction at
q_g = 1/2 reproduces the closed-form Gamma density and serves as its oracle.

Quadrature uses composite Gauss-Legendre on geometrically spaced panels over
a truncated domain [y_lo, y_hi]; the truncation bounds are placed so that the
untruncated mass is below 1e-13 wherever floating-point range permits, and the
remaining boundary mass enters integrals through a leading-order correction
term.  The per-panel order is doubled until two successive values agree, so
every integral is returned together with an error estimate.

Measures are immutable after construction; ``integrate`` is pure and
thread-safe with a fixed summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple

import numpy as np
from scipy import interpolate, stats
from scipy.special import gammainc, gammaincc, gammaln

from .errors import DomainError, GrowthError, QuadratureError, UnsupportedModelError
from .models import ModelSpec
from .paths import DiscretePath
from .quadrature import (geometric_edges, integrate_logweight,
                         segment_cumulative, segment_integrals)

# Smallest usable left truncation point: keeps (shape-1) * log(y_lo) inside
# the exponent range of float64 for every shape in (0, 1).
_Y_FLOOR = 1e-290
_TAIL_MASS = 1e-13


class IntegralResult(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class InvariantMeasure:
    """A probability density on (0, infinity) with its quadrature rule.

    ``log_density`` is the log of the normalized density, vectorized over
    numpy arrays of positive points.  ``edges`` are the panel edges of the
    truncated quadrature domain; ``mass_below``/``mass_above`` estimate the
    mass outside it and enter integrals as boundary corrections.
    """

    kind: str                      # "gamma" or "speed"
    log_density: Callable[[np.ndarray], np.ndarray]
    y_lo: float
    y_hi: float
    edges: np.ndarray
    mass_below: float
    mass_above: float
    shape: float | None = None
    rate: float | None = None
    params: Mapping[str, float] = field(default_factory=dict)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        out = np.zeros_like(y)
        pos = y > 0
        if np.any(pos):
            out[pos] = np.exp(self.log_density(y[pos]))
        return out if out.ndim else float(out)


def gamma_invariant(kappa: float, theta: float, xi: float) -> InvariantMeasure:
    """Closed-form Gamma invariant measure of the square-root factor.

    Density m(y) = rate^shape / Gamma(shape) * y^{shape-1} exp(-rate y) with
    shape = 2 kappa theta / xi^2 and rate = 2 kappa / xi^2.
    """
    if kappa <= 0:
        raise DomainError(f"kappa: must be positive, got {kappa}")
    if theta <= 0:
        raise DomainError(f"theta: must be positive, got {theta}")
    if xi == 0:
        raise DomainError("xi: must be non-zero")
    shape = 2 * kappa * theta / xi ** 2
    rate = 2 * kappa / xi ** 2
    dist = stats.gamma(a=shape, scale=1.0 / rate)

    y_hi = float(dist.ppf(1 - 1e-12))
    # Left truncation: the point below which at most _TAIL_MASS sits, capped
    # by the coarse default max(1e-10, 1e-6 theta) and floored at the
    # representable limit; the floor only binds for extreme shapes, where the
    # remaining mass is restored by the boundary correction.
    q_lo = float(dist.ppf(_TAIL_MASS))
    y_lo = max(_Y_FLOOR, min(max(1e-10, 1e-6 * theta), q_lo))
    if not y_lo < y_hi:
        raise QuadratureError(f"degenerate truncation [{y_lo}, {y_hi}]")

    log_norm = shape * math.log(rate) - gammaln(shape)

    def log_density(y):
        y = np.asarray(y, dtype=float)
        return log_norm + (shape - 1) * np.log(y) - rate * y

    return InvariantMeasure(
        kind="gamma", log_density=log_density, y_lo=y_lo, y_hi=y_hi,
        edges=geometric_edges(y_lo, y_hi),
        mass_below=float(gammainc(shape, rate * y_lo)),
        mass_above=float(gammaincc(shape, rate * y_hi)),
        shape=shape, rate=rate,
        params={"kappa": kappa, "theta": theta, "xi": xi, "q_g": 0.5},
    )


def speed_measure(kappa: float, theta: float, xi: float, q_g: float,
                  *, n_knots: int = 4096) -> InvariantMeasure:
    """Invariant measure of dY = kappa (theta - Y) dt + xi Y^{q_g} dZ by speed measure.

    The unnormalized density is (xi^2 y^{2 q_g})^{-1} exp(I(y)) with inner
    exponent I(y) = int_1^y 2 kappa (theta - z) / (xi^2 z^{2 q_g}) dz evaluated
    by cumulative Gauss-Legendre segments anchored at 1; the normalizing
    constant comes from the same adaptive panel rule.  At q_g = 1/2 the result
    agrees with ``gamma_invariant`` and is its numeric oracle.
    """
    if not 0.5 <= q_g < 1:
        raise DomainError(f"q_g: must lie in [1/2, 1), got {q_g}")
    if kappa <= 0:
        raise DomainError(f"kappa: must be positive, got {kappa}")
    if theta <= 0:
        raise DomainError(f"theta: must be positive, got {theta}")
    if xi == 0:
        raise DomainError("xi: must be non-zero")

    def exponent_integrand(z):
        return 2 * kappa * (theta - z) / (xi ** 2 * z ** (2 * q_g))

    gamma_like = q_g == 0.5
    if gamma_like:
        shape = 2 * kappa * theta / xi ** 2
        rate = 2 * kappa / xi ** 2
        dist = stats.gamma(a=shape, scale=1.0 / rate)
        y_hi = float(dist.ppf(1 - 1e-12))
        y_lo = max(_Y_FLOOR, min(max(1e-10, 1e-6 * theta), float(dist.ppf(_TAIL_MASS))))
        mass_below = float(gammainc(shape, rate * y_lo))
        mass_above = float(gammaincc(shape, rate * y_hi))
    else:
        # Superexponential decay on both sides: expand until the log of the
        # unnormalized density falls 36 below its value at theta (relative
        # density about 2e-16, leaving untruncated mass far below 1e-13 while
        # keeping the density representable for ratio-based consumers).
        def raw_log(y):
            # one-off scalar evaluation by direct quadrature from the anchor 1
            grid = np.geomspace(min(y, 1.0), max(y, 1.0), 512)
            cum = segment_cumulative(exponent_integrand, grid)
            val = cum[-1] if y >= 1.0 else -cum[-1]
            return -math.log(xi ** 2) - 2 * q_g * math.log(y) + val

        ref = raw_log(theta)
        y_lo = theta
        while raw_log(y_lo) > ref - 36 and y_lo > _Y_FLOOR * 10:
            y_lo /= 2.0
        y_hi = max(2 * theta, 1.0)
        while raw_log(y_hi) > ref - 36 and y_hi < 1e12:
            y_hi *= 1.5
        mass_below = mass_above = None  # one-term Laplace estimates, set below

    # Exponent on a log-spaced knot grid (anchor 1 inserted), spline in log y.
    knots = np.geomspace(y_lo, y_hi, n_knots)
    if not (knots[0] <= 1.0 <= knots[-1]):
        knots = np.sort(np.unique(np.concatenate([knots, [1.0]])))
    cum = segment_cumulative(lambda z: exponent_integrand(z), knots)
    anchor = int(np.searchsorted(knots, 1.0))
    anchor = min(max(anchor, 0), len(knots) - 1)
    if abs(knots[anchor] - 1.0) > 1e-9:
        # anchor not on the grid: shift by the integral from 1 to the nearest knot
        shift = segment_cumulative(exponent_integrand, np.array([1.0, knots[anchor]]))[-1]
    else:
        shift = 0.0
    exponent = cum - cum[anchor] + shift
    spline = interpolate.CubicSpline(np.log(knots), exponent)

    def log_unnormalized(y):
        y = np.asarray(y, dtype=float)
        return -math.log(xi ** 2) - 2 * q_g * np.log(y) + spline(np.log(y))

    edges = geometric_edges(y_lo, y_hi)
    norm, _ = integrate_logweight(lambda y: np.ones_like(y), log_unnormalized, edges)
    if not (norm > 0 and math.isfinite(norm)):
        raise QuadratureError("speed-measure normalizing constant did not converge")
    log_norm = math.log(norm)

    def log_density(y):
        return log_unnormalized(y) - log_norm

    if mass_below is None:
        # one-term Laplace estimate m(y) / |d log m / dy| of the mass beyond
        # each truncation point, where the density decays superexponentially
        def tail_mass(point: float) -> float:
            h = 1e-6 * point
            slope = float(log_density(np.asarray([point + h]))[0]
                          - log_density(np.asarray([point - h]))[0]) / (2 * h)
            dens = math.exp(float(log_density(np.asarray([point]))[0]))
            return dens / max(abs(slope), 1e-300)

        mass_below = tail_mass(y_lo)
        mass_above = tail_mass(y_hi)

    return InvariantMeasure(
        kind="speed", log_density=log_density, y_lo=y_lo, y_hi=y_hi,
        edges=edges, mass_below=mass_below, mass_above=mass_above,
        shape=None, rate=None,
        params={"kappa": kappa, "theta": theta, "xi": xi, "q_g": q_g},
    )


def integrate(measure: InvariantMeasure, phi: Callable, *,
              atol: float = 1e-13, rtol: float = 1e-12,
              growth_budget: float = 1e-9) -> IntegralResult:
    """Quadrature value and error estimate of int phi dmu.

    phi must be evaluable on the quadrature nodes with at most polynomial
    growth; if |phi(y_hi)| * mass_above exceeds the growth budget the integral
    cannot be trusted and a GrowthError is raised.  Boundary mass outside the
    truncated domain enters through the leading-order corrections
    phi(y_lo) * mass_below and phi(y_hi) * mass_above.
    """
    phi_hi = float(np.atleast_1d(phi(np.asarray([measure.y_hi])))[0])
    phi_lo = float(np.atleast_1d(phi(np.asarray([measure.y_lo])))[0])
    if not (math.isfinite(phi_hi) and math.isfinite(phi_lo)):
        raise QuadratureError("integrand is not finite at the truncation bounds")
    tail_term = abs(phi_hi) * measure.mass_above
    if tail_term > growth_budget:
        raise GrowthError(
            f"integrand tail |phi(y_hi)| * mass_above = {tail_term:.3e} "
            f"exceeds the tolerance budget {growth_budget:.1e}")

    def fn(y):
        return np.asarray(phi(y), dtype=float)

    value, err = integrate_logweight(fn, measure.log_density, measure.edges,
                                     atol=atol, rtol=rtol)
    value += phi_lo * measure.mass_below + phi_hi * measure.mass_above
    return IntegralResult(value, err + tail_term)


def integrate_tabulated(measure: InvariantMeasure, grid: np.ndarray,
                        fn: Callable) -> IntegralResult:
    """Integral of fn dmu for fn that is only piecewise smooth across ``grid``.

    Linear interpolants of grid-backed solutions have kinks at the grid nodes;
    aligning the quadrature segments with the grid keeps per-segment
    Gauss-Legendre spectrally accurate.  A grid narrower than the measure's
    truncated domain is padded outward geometrically (fn is expected to
    extrapolate, as numpy interpolants do by holding boundary values);
    boundary masses enter as in ``integrate``.
    """
    parts = [np.asarray(grid, dtype=float)]
    if grid[0] > measure.y_lo * (1 + 1e-12):
        parts.insert(0, np.geomspace(measure.y_lo, grid[0], 65)[:-1])
    if grid[-1] < measure.y_hi * (1 - 1e-12):
        parts.append(np.geomspace(grid[-1], measure.y_hi, 65)[1:])
    full = np.concatenate(parts)

    def weighted(z):
        return np.asarray(fn(z), dtype=float) * np.exp(measure.log_density(z))

    coarse = float(np.sum(segment_integrals(weighted, full, order=8)))
    value = float(np.sum(segment_integrals(weighted, full, order=16)))
    err = abs(value - coarse)
    f_lo = float(np.atleast_1d(fn(np.asarray([full[0]])))[0])
    f_hi = float(np.atleast_1d(fn(np.asarray([full[-1]])))[0])
    value += f_lo * measure.mass_below + f_hi * measure.mass_above
    return IntegralResult(value, err)


def measure_mean(measure: InvariantMeasure) -> float:
    return integrate(measure, lambda y: y).value


def measure_variance(measure: InvariantMeasure) -> float:
    m1 = measure_mean(measure)
    m2 = integrate(measure, lambda y: y ** 2).value
    return m2 - m1 ** 2


def generator_apply(f: Callable, g: Callable, fn_prime: Callable,
                    fn_second: Callable) -> Callable:
    """The generator f h' + 1/2 g^2 h'' as a function of y, from h', h''."""

    def apply(y):
        return f(y) * fn_prime(y) + 0.5 * g(y) ** 2 * fn_second(y)

    return apply


def averaged_drift(model: ModelSpec, measure: InvariantMeasure,
                   gamma: float) -> Callable[[float], float]:
    """The averaged slow drift x -> gamma * c int sigma^2(x, y) mu(dy), c = x_drift_coeff.

    For the Heston model with gamma = 1 this is the constant -theta/2.
    """
    if gamma <= 0:
        raise DomainError(f"gamma: must be positive, got {gamma}")

    def lam_bar(x: float) -> float:
        res = integrate(measure, lambda y: model.sigma(x, y) ** 2)
        return model.x_drift_coeff * gamma * res.value

    return lam_bar


def averaged_state_path(model: ModelSpec, measure: InvariantMeasure,
                        gamma: float, horizon: float, n_steps: int) -> DiscretePath:
    """Classical fourth-order one-step integration of dX = lam_bar(X) dt from x0.

    Exact (to roundoff) whenever lam_bar does not depend on x.
    """
    if n_steps < 1:
        raise DomainError(f"n_steps: must be >= 1, got {n_steps}")
    lam = averaged_drift(model, measure, gamma)
    dt = horizon / n_steps
    xs = np.empty(n_steps + 1)
    xs[0] = model.x0
    for i in range(n_steps):
        x = xs[i]
        k1 = lam(x)
        k2 = lam(x + 0.5 * dt * k1)
        k3 = lam(x + 0.5 * dt * k2)
        k4 = lam(x + dt * k3)
        xs[i + 1] = x + dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
    return DiscretePath(np.linspace(0.0, horizon, n_steps + 1), xs)


def invariant_for_model(model: ModelSpec) -> InvariantMeasure:
    """The invariant measure of a model's fast factor, where available.

    Supported families: the square-root factor (closed-form Gamma) and the
    mean-reverting power-diffusion family (speed measure).  Models whose fast
    dynamics depend on the slow variable have no single invariant measure and
    are rejected.
    """
    if not model.y_only:
        raise UnsupportedModelError(
            "fast dynamics depend on the slow variable; no single invariant measure")
    if model.kind == "heston":
        p = model.params
        return gamma_invariant(p["kappa"], p["theta"], p["xi"])
    if model.kind == "power":
        p = model.params
        b = p.get("b", 0.0)
        a = p.get("a", 0.0)
        nu_g = p.get("nu_g")
        if b < 0 and a > 0 and nu_g is not None and 0.5 <= nu_g < 1:
            return speed_measure(-b, a / (-b), p["c_g"], nu_g)
        raise UnsupportedModelError(
            "power model is not of mean-reverting power-diffusion form")
    raise UnsupportedModelError(
        f"no invariant-measure construction for kind '{model.kind}'")
