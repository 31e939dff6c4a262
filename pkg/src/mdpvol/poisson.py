"""One-dimensional Poisson equations for the fast-factor generator.

Solves L u = H - Hbar with centering int u dmu = 0, where
L h = f h' + 1/2 g^2 h'' is the generator of the fast factor and
Hbar = int H dmu.  Two routes are provided:

- the square-root factor with centered right-hand sides admits constant
  derivatives in closed form (u' = -1/(2 kappa) for H = sigma^2 / 2, and
  u' = -1/kappa for H(y) = y);
- for the mean-reverting power-diffusion family the derivative follows from
  the stationarity identity (1/2 g^2 m)' = f m of the speed-measure density m:

      u'(y) = [ 1/2 xi^2 y^{2 q_g} m(y) ]^{-1} int_0^y (H(z) - Hbar) m(z) dz
            = -[ 1/2 xi^2 y^{2 q_g} m(y) ]^{-1} int_y^inf (H(z) - Hbar) m(z) dz,

  where the second form uses the centering of H - Hbar.  Both one-sided
  integrals are computed independently so their agreement is a genuine
  consistency check rather than an identity of the implementation; since the
  left form loses precision in the upper tail (its numerator cancels there)
  and the right form symmetrically in the lower tail, the reported derivative
  takes the left form below the mass median and the right form above it.

The solve grid is geometric on the measure's truncation interval: the
derivative is a ratio of exponentially small quantities in the tails, and
geometric spacing keeps its relative error uniform.  Near the origin, where
a Gamma density with shape below one is singular but integrable, the inner
integral starts from the truncation point with the analytic leading-order
correction (H(y_lo) - Hbar) * mass_below applied on [0, y_lo].  u itself is
recovered by cumulative trapezoid of u' plus a centering shift; direct double
integration is avoided.

Solutions are immutable and shareable; each solve is single-threaded.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, GrowthError
from .invariant import InvariantMeasure, integrate_tabulated
from .quadrature import segment_integrals

_GRID_POINTS = 2048


@dataclass(frozen=True)
class PoissonSolution:
    """Grid-backed solution of a centered Poisson equation.

    ``u`` and ``u_prime`` interpolate linearly between grid points and hold
    their boundary values outside the grid.  ``two_sided_gap`` is the largest
    disagreement between the left-integral and right-tail forms of u' over
    the middle half of the grid (0 for closed-form solutions).
    """

    grid: np.ndarray
    u_values: np.ndarray
    u_prime_values: np.ndarray
    closed_form: str | None
    centering_residual: float
    two_sided_gap: float = 0.0

    def u(self, y):
        return np.interp(np.asarray(y, dtype=float), self.grid, self.u_values)

    def u_prime(self, y):
        return np.interp(np.asarray(y, dtype=float), self.grid, self.u_prime_values)


def solve_phi_heston(kappa: float, theta: float) -> PoissonSolution:
    """Closed-form solution of L u = (y - theta)/2 for the square-root factor.

    u'(y) = -1/(2 kappa) identically; u(y) = -(y - theta) / (2 kappa) is
    already centered because the invariant mean of the factor is theta.
    """
    if kappa <= 0:
        raise DomainError(f"kappa: must be positive, got {kappa}")
    if theta <= 0:
        raise DomainError(f"theta: must be positive, got {theta}")
    grid = np.geomspace(max(1e-10, 1e-6 * theta), 60 * theta, _GRID_POINTS)
    u_prime = np.full_like(grid, -0.5 / kappa)
    u = -(grid - theta) / (2 * kappa)
    return PoissonSolution(grid=grid, u_values=u, u_prime_values=u_prime,
                           closed_form="heston_phi_prime",
                           centering_residual=0.0)


def solve_phi_cir(kappa: float, theta: float, drift_coeff: float = -0.5) -> PoissonSolution:
    """Closed-form solution of L u = -drift_coeff (y - theta), constant u'.

    With drift_coeff = -1/2 this is ``solve_phi_heston``; the share-measure
    dynamics use drift_coeff = +1/2, flipping the sign of u'.
    """
    if kappa <= 0:
        raise DomainError(f"kappa: must be positive, got {kappa}")
    sol = solve_phi_heston(kappa, theta)
    scale = drift_coeff / (-0.5)
    return PoissonSolution(
        grid=sol.grid, u_values=scale * sol.u_values,
        u_prime_values=scale * sol.u_prime_values,
        closed_form="heston_phi_prime" if drift_coeff == -0.5 else "cir_phi_prime_flipped",
        centering_residual=0.0)


def solve_poisson_cev(H: Callable, measure: InvariantMeasure, kappa: float,
                      theta: float, xi: float, q_g: float, *,
                      q_h: float = 1.0, n_grid: int = _GRID_POINTS) -> PoissonSolution:
    """Speed-measure solve of L u = H - Hbar for the power-diffusion factor.

    ``measure`` must be the invariant measure of (kappa, theta, xi, q_g);
    ``q_h`` is the declared polynomial growth bound of H, used for the growth
    guard on u'.  Raises GrowthError when |u'| at the top of the grid exceeds
    ten times the bound K (1 + y^{q_h - 1}) fitted on the grid interior.
    """
    p = measure.params
    for name, value in (("kappa", kappa), ("theta", theta), ("xi", xi), ("q_g", q_g)):
        declared = p.get(name)
        if declared is None or abs(declared - value) > 1e-12 * max(1.0, abs(value)):
            raise DomainError(
                f"{name}: measure was built with {declared}, got {value}")

    grid = np.geomspace(measure.y_lo, measure.y_hi, n_grid)

    def density(z):
        return np.exp(measure.log_density(z))

    def weighted_h(z):
        return np.asarray(H(z), dtype=float) * np.exp(measure.log_density(z))

    # Hbar is computed with the same segment rule as the cumulative integrals,
    # so the total of (H - Hbar) m over the truncated domain vanishes to
    # roundoff; the tail ratios of u' would otherwise be dominated by any
    # inconsistency between two quadrature rules.
    dens_seg = segment_integrals(density, grid)
    h_seg = segment_integrals(weighted_h, grid)
    h_lo, h_hi = float(H(measure.y_lo)), float(H(measure.y_hi))
    total_mass = float(np.sum(dens_seg)) + measure.mass_below + measure.mass_above
    h_bar = (float(np.sum(h_seg)) + h_lo * measure.mass_below
             + h_hi * measure.mass_above) / total_mass

    seg = h_seg - h_bar * dens_seg
    # left[j] = int_0^{grid[j]}, right[j] = int_{grid[j]}^inf; the two forms
    # agree only through the centering of H - Hbar, so their gap is a real
    # consistency check of Hbar and of the truncation handling.
    left = np.concatenate(([0.0], np.cumsum(seg)))
    left += (h_lo - h_bar) * measure.mass_below
    right = np.concatenate((np.cumsum(seg[::-1])[::-1], [0.0]))
    right += (h_hi - h_bar) * measure.mass_above

    half_g2_m = 0.5 * xi ** 2 * grid ** (2 * q_g) * np.exp(measure.log_density(grid))
    if np.any(half_g2_m <= 0):
        raise DomainError("measure density vanished on the solve grid")
    u_prime_left = left / half_g2_m
    u_prime_right = -right / half_g2_m

    quarter = n_grid // 4
    mid = slice(quarter, 3 * quarter)
    gap = float(np.max(np.abs(u_prime_left[mid] - u_prime_right[mid])))

    # The left integral suffers cancellation in the upper tail (its numerator
    # is the full centered integral, which vanishes) and the right-tail
    # integral suffers it symmetrically in the lower tail, so the reported
    # derivative switches representation at the mass median.
    median_idx = int(np.searchsorted(np.cumsum(dens_seg), 0.5 * total_mass))
    u_prime = np.concatenate((u_prime_left[: median_idx + 1],
                              u_prime_right[median_idx + 1:]))

    growth_ref = 1.0 + grid ** (q_h - 1.0)
    k_fit = float(np.max(np.abs(u_prime[: 3 * quarter]) / growth_ref[: 3 * quarter]))
    top = abs(u_prime[-1])
    if k_fit > 0 and top > 10.0 * k_fit * growth_ref[-1]:
        raise GrowthError(
            f"|u'(y_max)| = {top:.3e} exceeds 10 x fitted bound "
            f"{k_fit:.3e} * (1 + y_max^(q_h-1))")

    u_raw = np.concatenate(([0.0], np.cumsum(
        0.5 * (u_prime[1:] + u_prime[:-1]) * np.diff(grid))))
    shift = integrate_tabulated(measure, grid,
                                lambda y: np.interp(y, grid, u_raw)).value
    u_vals = u_raw - shift
    residual = abs(integrate_tabulated(measure, grid,
                                       lambda y: np.interp(y, grid, u_vals)).value)

    return PoissonSolution(grid=grid, u_values=u_vals, u_prime_values=u_prime,
                           closed_form=None, centering_residual=residual,
                           two_sided_gap=gap)


def generator_residual(f: Callable, g: Callable, solution: PoissonSolution,
                       rhs: Callable) -> float:
    """Sup-norm of f u' + 1/2 g^2 u'' - rhs over the interior of the solve grid.

    u'' comes from second-order central differences of the stored u' on the
    (generally non-uniform) grid; the outer 1/64 of nodes on each side are
    excluded, as one-sided stencils would be required there.
    """
    y = solution.grid
    up = solution.u_prime_values
    h_minus = y[1:-1] - y[:-2]
    h_plus = y[2:] - y[1:-1]
    u_second = (h_minus ** 2 * up[2:] + (h_plus ** 2 - h_minus ** 2) * up[1:-1]
                - h_plus ** 2 * up[:-2]) / (h_plus * h_minus * (h_plus + h_minus))
    yi = y[1:-1]
    resid = np.abs(np.asarray(f(yi), dtype=float) * up[1:-1]
                   + 0.5 * np.asarray(g(yi), dtype=float) ** 2 * u_second
                   - np.asarray(rhs(yi), dtype=float))
    margin = max(1, len(yi) // 64)
    return float(np.max(resid[margin:-margin]))
