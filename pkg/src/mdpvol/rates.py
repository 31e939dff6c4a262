"""Moderate-deviations rate functions and their variational minimizers.

All rate functionals here are quadratic actions over absolutely continuous
paths started at zero:

- small-time, two components:
  S(phi, psi) = (2 (1 - rho^2))^{-1} int [ (phi'/sigma0)^2
                - 2 rho phi' psi' / (sigma0 g0) + (psi'/g0)^2 ] dt;
- small-time, one component (its contraction onto the first coordinate):
  I(phi) = (2 sigma0^2)^{-1} int phi'^2 dt;
- the general nondegenerate quadratic form
  S(xi) = 1/2 int (xi' - alpha - Db xi)^T (a a^T)^{-1} (xi' - alpha - Db xi) dt;
- large-time: the contraction onto the endpoint of the action with constant
  drift alpha and variance q is J(x) = (x - alpha T)^2 / (2 q T).

Paths are discretized by forward differences on a uniform grid with a
rectangle/trapezoid sum of the Lagrangian over the intervals; this keeps every
Euler-Lagrange system tridiagonal and the grid-convergence order testable, and
it makes the contraction identities exact at the discrete level.  An infinite
rate is reported as the exact float('inf') sentinel, never as an overflow.

The large-time constants are

    alpha = zeta * c * int sigma^2 dmu         (c = x_drift_coeff, -1/2 here),
    q     = int [ sigma^2 + (Phi' g)^2 + 2 rho sigma g Phi' ] dmu,

with Phi the centered solution of L Phi = -c (sigma^2 - int sigma^2 dmu); for
the square-root factor q has the closed form
theta (1 + xi^2/(4 kappa^2) - rho xi / kappa), which is exposed alongside the
quadrature value.  For integrated functionals the variance constant is
Qbar = gamma^{-2} int |u_y g|^2 dmu with u the centered solution of
L u = H - Hbar.

All operations are pure; batch evaluation over parameter grids may run in
parallel provided reductions keep a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .errors import DomainError, SingularSystemError, UnsupportedModelError
from .invariant import (InvariantMeasure, gamma_invariant, integrate,
                        integrate_tabulated)
from .models import ModelSpec, make_heston, make_stein_stein
from .paths import DiscretePath, require_same_grid
from .poisson import PoissonSolution, solve_phi_cir

INFINITE_RATE = float("inf")


@dataclass(frozen=True)
class QuadraticRateSpec:
    """Data of the general quadratic action along a deterministic limit path.

    ``drift_jacobian`` and ``diffusion_gram`` map time to the Jacobian Db and
    the Gram matrix a a^T (scalars for one-dimensional paths, 2x2 arrays for
    two-dimensional ones); the Gram must stay symmetric positive definite
    along the path.  ``alpha_drift`` is the constant drift offset of the
    large-time regime and 0 otherwise.
    """

    drift_jacobian: Callable[[float], np.ndarray]
    diffusion_gram: Callable[[float], np.ndarray]
    alpha_drift: float = 0.0
    horizon: float = 1.0


@dataclass(frozen=True)
class LargeTimeParams:
    """Drift and variance constants (alpha, q) of the large-time quadratic rate.

    ``q_closed_form`` carries the square-root-factor closed form when the
    model admits one, for cross-checking against the quadrature value.
    """

    alpha: float
    q: float
    q_closed_form: float | None = None


class QbarResult(NamedTuple):
    value: float
    degenerate: bool


def _integrate_with_solution(measure: InvariantMeasure,
                             solution: PoissonSolution, integrand) -> float:
    """Integrate an expression involving a Poisson solution against the measure.

    Grid-backed solutions are piecewise linear, so the quadrature segments are
    aligned with the solve grid; closed-form solutions are smooth and use the
    measure's own panel rule.
    """
    if solution.closed_form is None:
        return integrate_tabulated(measure, solution.grid, integrand).value
    return integrate(measure, integrand).value


def _forward_diff(path: DiscretePath) -> np.ndarray:
    return np.diff(path.values, axis=0) / path.dt


def small_time_rate_2d(sigma0: float, g0: float, rho: float,
                       phi: DiscretePath, psi: DiscretePath) -> float:
    """Two-component small-time action of (phi, psi); inf unless both start at 0."""
    if sigma0 == 0:
        raise DomainError("sigma0: must be non-zero")
    if g0 == 0:
        raise DomainError("g0: must be non-zero")
    if not abs(rho) < 1:
        raise DomainError(f"rho: must lie in (-1, 1), got {rho}")
    require_same_grid(phi, psi)
    if not (phi.starts_at_zero() and psi.starts_at_zero()):
        return INFINITE_RATE
    dphi = _forward_diff(phi)
    dpsi = _forward_diff(psi)
    lagrangian = ((dphi / sigma0) ** 2
                  - 2 * rho * dphi * dpsi / (sigma0 * g0)
                  + (dpsi / g0) ** 2)
    return float(np.sum(lagrangian) * phi.dt / (2 * (1 - rho ** 2)))


def small_time_rate_1d(sigma0: float, phi: DiscretePath) -> float:
    """One-component small-time action (2 sigma0^2)^{-1} int phi'^2 dt.

    For a local-stochastic-volatility model the scalar input is the factorized
    spot level sigma_local(x0) * vol_mult(y0).
    """
    if sigma0 == 0:
        raise DomainError("sigma0: must be non-zero")
    if not phi.starts_at_zero():
        return INFINITE_RATE
    dphi = _forward_diff(phi)
    return float(np.sum(dphi ** 2) * phi.dt / (2 * sigma0 ** 2))


def general_quadratic_rate(spec: QuadraticRateSpec, xi_path: DiscretePath) -> float:
    """The nondegenerate quadratic action 1/2 int (xi' - alpha - Db xi)^T Gram^{-1} (...) dt.

    Coefficients are evaluated at interval midpoints and xi at interval
    averages; an eigenvalue of the Gram at or below 1e-12 raises
    SingularSystemError.
    """
    if not xi_path.starts_at_zero():
        return INFINITE_RATE
    dxi = _forward_diff(xi_path)
    mids = 0.5 * (xi_path.times[1:] + xi_path.times[:-1])
    vals = xi_path.values
    xi_mid = 0.5 * (vals[1:] + vals[:-1])
    total = 0.0
    for i, t in enumerate(mids):
        db = np.atleast_2d(np.asarray(spec.drift_jacobian(t), dtype=float))
        gram = np.atleast_2d(np.asarray(spec.diffusion_gram(t), dtype=float))
        eigs = np.linalg.eigvalsh(0.5 * (gram + gram.T))
        if np.min(eigs) <= 1e-12:
            raise SingularSystemError(
                f"diffusion Gram matrix has eigenvalue {np.min(eigs):.3e} <= 1e-12 at t={t:g}")
        x = np.atleast_1d(xi_mid[i])
        resid = np.atleast_1d(dxi[i]) - spec.alpha_drift - db @ x
        total += float(resid @ np.linalg.solve(gram, resid))
    return 0.5 * total * xi_path.dt


def large_time_params(model: ModelSpec, measure: InvariantMeasure,
                      poisson_phi: PoissonSolution, gamma: float,
                      zeta: float) -> LargeTimeParams:
    """Large-time MDP constants from the invariant measure and Poisson solution.

    alpha = zeta * x_drift_coeff * int sigma^2 dmu and
    q = int [sigma^2 + (Phi' g)^2 + 2 rho sigma g Phi'] dmu.  The q integrand
    needs only Phi'; centering of Phi does not enter.
    """
    if not model.y_only:
        raise UnsupportedModelError("large-time constants need y-only fast coefficients")
    if gamma <= 0:
        raise DomainError(f"gamma: must be positive, got {gamma}")
    x0 = model.x0

    def sigma2(y):
        return model.sigma(x0, y) ** 2

    sig2_bar = integrate(measure, sigma2).value
    alpha = zeta * model.x_drift_coeff * sig2_bar

    def q_integrand(y):
        s = model.sigma(x0, y)
        g = model.g(x0, y)
        phi_p = poisson_phi.u_prime(y)
        return s ** 2 + (phi_p * g) ** 2 + 2 * model.rho * s * g * phi_p

    q = _integrate_with_solution(measure, poisson_phi, q_integrand)

    q_closed = None
    if model.kind == "heston":
        p = model.params
        kappa, theta, xi = p["kappa"], p["theta"], p["xi"]
        sign = 1.0 if model.x_drift_coeff < 0 else -1.0
        q_closed = theta * (1 + xi ** 2 / (4 * kappa ** 2)
                            - sign * model.rho * xi / kappa)
    return LargeTimeParams(alpha=alpha, q=q, q_closed_form=q_closed)


def heston_large_time_params(model: ModelSpec, zeta: float = 0.0,
                             gamma: float = 1.0) -> LargeTimeParams:
    """Convenience pipeline: invariant measure + constant-derivative Phi + constants."""
    if model.kind != "heston":
        raise UnsupportedModelError("closed pipeline available for the square-root factor only")
    p = model.params
    measure = gamma_invariant(p["kappa"], p["theta"], p["xi"])
    phi = solve_phi_cir(p["kappa"], p["theta"], drift_coeff=model.x_drift_coeff)
    return large_time_params(model, measure, phi, gamma, zeta)


def qbar_integrated(model: ModelSpec, H: Callable, measure: InvariantMeasure,
                    poisson_u: PoissonSolution, gamma: float) -> QbarResult:
    """Variance constant Qbar = gamma^{-2} int |u_y(y) g(y)|^2 mu(dy).

    Returns the value together with a degeneracy flag raised when Qbar falls
    below 1e-14 (the quadratic rate is then meaningless for this H).
    """
    if not model.y_only:
        raise UnsupportedModelError("Qbar needs y-only fast coefficients")
    if gamma <= 0:
        raise DomainError(f"gamma: must be positive, got {gamma}")
    x0 = model.x0

    def integrand(y):
        return (poisson_u.u_prime(y) * model.g(x0, y)) ** 2

    value = _integrate_with_solution(measure, poisson_u, integrand) / gamma ** 2
    return QbarResult(value=value, degenerate=value < 1e-14)


def _solve_tridiagonal(lower, diag, upper, rhs):
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper
    ab[1, :] = diag
    ab[2, :-1] = lower
    try:
        return solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by q > 0
        raise SingularSystemError(str(exc)) from exc


def minimize_endpoint(q: float, alpha: float, x_target: float,
                      horizon: float, n_steps: int) -> tuple[float, DiscretePath]:
    """Endpoint-pinned minimizer of 1/2 int u^2 dt subject to phi' = alpha + sqrt(q) u.

    Solves the discrete Euler-Lagrange system (a tridiagonal Laplacian in the
    interior path values with phi_0 = 0 and phi_N = x_target) and returns the
    attained action together with the minimizing path.  For constant
    coefficients the minimum is (x_target - alpha T)^2 / (2 q T) and the path
    is the straight line, which the discretization reproduces exactly.
    """
    if q <= 0:
        raise DomainError(f"q: must be positive, got {q}")
    if n_steps < 2:
        raise DomainError(f"n_steps: must be >= 2, got {n_steps}")
    if horizon <= 0:
        raise DomainError(f"horizon: must be positive, got {horizon}")
    n_int = n_steps - 1
    lower = -np.ones(n_int - 1)
    diag = 2.0 * np.ones(n_int)
    upper = -np.ones(n_int - 1)
    rhs = np.zeros(n_int)
    rhs[-1] = x_target
    interior = _solve_tridiagonal(lower, diag, upper, rhs)
    values = np.concatenate(([0.0], interior, [x_target]))
    path = DiscretePath(np.linspace(0.0, horizon, n_steps + 1), values)
    d = _forward_diff(path)
    action = float(np.sum((d - alpha) ** 2) * path.dt / (2 * q))
    return action, path


def contract_two_to_one(sigma0: float, g0: float, rho: float,
                        phi: DiscretePath) -> tuple[float, DiscretePath]:
    """Minimize the two-component action over the second path, first one fixed.

    Solves the tridiagonal Euler-Lagrange system for psi (zero start, free
    end) and returns the minimum with its minimizer.  The discrete stationarity
    condition is psi' = rho (g0 / sigma0) phi' on every interval, so the
    minimum coincides with the one-component rate of phi.
    """
    if sigma0 == 0:
        raise DomainError("sigma0: must be non-zero")
    if g0 == 0:
        raise DomainError("g0: must be non-zero")
    if not abs(rho) < 1:
        raise DomainError(f"rho: must lie in (-1, 1), got {rho}")
    slope = rho * g0 / sigma0
    values = phi.values
    n = phi.n_steps
    # Unknowns psi_1..psi_n; rows 1..n-1 are the interior stationarity
    # equations, row n the natural boundary condition at the free end.
    diag = np.concatenate((2.0 * np.ones(n - 1), [1.0]))
    lower = -np.ones(n - 1)
    upper = -np.ones(n - 1)
    rhs = np.empty(n)
    rhs[: n - 1] = -slope * (values[2:] - 2 * values[1:-1] + values[:-2])
    rhs[-1] = slope * (values[-1] - values[-2])
    psi_vals = np.concatenate(([0.0], _solve_tridiagonal(lower, diag, upper, rhs)))
    psi = DiscretePath(phi.times, psi_vals)
    return small_time_rate_2d(sigma0, g0, rho, phi, psi), psi


def share_measure_model(model: ModelSpec) -> ModelSpec:
    """Dynamics under the measure with density e^{X_t}: drift of X flips sign,
    factor drift gains rho g sigma.

    For the square-root factor the tilted drift stays of mean-reverting
    square-root form with kappa_q = kappa - rho xi and
    theta_q = kappa theta / (kappa - rho xi), which requires
    kappa - rho xi > 0; otherwise the tilted factor is no longer
    mean-reverting and the change of measure is refused.
    """
    if not model.y_only:
        raise UnsupportedModelError("share-measure tilt needs y-only coefficients")
    rho = model.rho
    if model.kind == "heston":
        p = model.params
        kappa, theta, xi = p["kappa"], p["theta"], p["xi"]
        kappa_q = kappa - rho * xi
        if kappa_q <= 0:
            raise DomainError(
                f"kappa - rho xi = {kappa_q:g} must be positive for the tilted factor")
        theta_q = kappa * theta / kappa_q
        tilted = make_heston(kappa_q, theta_q, xi, rho, model.x0, model.y0,
                             moment_flag=model.finite_exp_moments)
        return replace(tilted, x_drift_coeff=0.5)
    if model.kind == "stein_stein":
        p = model.params
        a, b, c = p["a"], p["b"], p["c"]
        b_q = b + rho * c
        if b_q >= 0:
            raise DomainError(
                f"b + rho c = {b_q:g} must be negative for the tilted factor")
        tilted = make_stein_stein(a, b_q, c, rho, model.x0, model.y0,
                                  moment_flag=model.finite_exp_moments)
        return replace(tilted, x_drift_coeff=0.5)
    raise UnsupportedModelError(
        f"share-measure tilt not implemented for kind '{model.kind}'")


def share_large_time_params(model: ModelSpec, zeta: float = 0.0,
                            gamma: float = 1.0) -> LargeTimeParams:
    """Large-time constants of the share-measure dynamics (q^Q route)."""
    return heston_large_time_params(share_measure_model(model), zeta, gamma)


def endpoint_rate(q: float, x: float, alpha: float = 0.0,
                  horizon: float = 1.0) -> float:
    """Closed-form endpoint contraction (x - alpha T)^2 / (2 q T)."""
    if q <= 0:
        raise DomainError(f"q: must be positive, got {q}")
    return (x - alpha * horizon) ** 2 / (2 * q * horizon)
