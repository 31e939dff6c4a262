"""Catalog of two-factor stochastic volatility models.

Every model in the catalog is a pair (X, Y) driven by correlated Brownian
motions,

    dX_t = -1/2 sigma^2(X_t, Y_t) dt + sigma(X_t, Y_t) dW_t,
    dY_t = f(X_t, Y_t) dt + g(X_t, Y_t) dZ_t,       d<W, Z>_t = rho dt,

where X is a log-price and Y a volatility factor.  Presets cover the Heston
model (sigma = sqrt(y), f = kappa (theta - y), g = xi sqrt(y)), Stein-Stein
(sigma = y, f = a + b y, g = c), the power family (sigma = c_sigma y^nu_sigma,
g = c_g y^nu_g, f = a + b y), a constant-volatility reference model, and
local-stochastic-volatility models with a factorized sigma.

Coefficient handles are total functions: square-root-type models clamp the
factor argument at zero inside every coefficient (full-truncation convention),
which both keeps evaluation defined for transient negative factor values and
matches the Monte Carlo discretization scheme.

Growth exponents are declared metadata, not inferred from the handles:
``nu_sigma``/``nu_g`` describe exact power-law coefficients, while
``q_sigma``/``q_g``/``q_h`` are polynomial-growth bounds used by the
assumption checker.  Presets fill them in; custom models must declare them.

``ModelSpec`` values are immutable after construction and safe to share
across threads; all operations in this module are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]

KINDS = ("heston", "stein_stein", "lsv", "power", "constant_sigma", "custom")


@dataclass(frozen=True)
class GrowthExponents:
    """Declared growth metadata for a model's coefficients.

    ``nu_sigma`` and ``nu_g`` are exact power-law exponents (sigma ~ y^nu_sigma,
    g ~ y^nu_g) where the model has that form; ``q_sigma`` and ``q_g`` are
    polynomial-growth bounds |sigma| <= K (1 + |y|^q_sigma) etc.; ``q_h`` bounds
    the integrated functional H and is filled in per computation.
    """

    nu_sigma: float | None = None
    nu_g: float | None = None
    q_sigma: float | None = None
    q_g: float | None = None
    q_h: float | None = None


@dataclass(frozen=True)
class ModelSpec:
    """A concrete two-factor model: coefficient handles plus metadata.

    Attributes
    ----------
    sigma, f, g : callables (x, y) -> array
        Volatility level, factor drift, factor diffusion.  Vectorized over
        numpy arrays; square-root kinds clamp y at 0 internally.
    rho : float
        Correlation between the price and factor Brownian motions.
    x0, y0 : float
        Initial log-price and factor level.
    kind : str
        One of ``KINDS``.
    growth : GrowthExponents
        Declared growth metadata.
    params : mapping
        Named preset parameters (e.g. kappa/theta/xi for Heston), used by
        closed-form expressions downstream.
    x_drift_coeff : float
        The drift of X is ``x_drift_coeff * sigma^2``; -1/2 for the price
        measure, +1/2 after the share-measure change of drift.
    y_only : bool
        True when the fast coefficients f, g, sigma depend on y alone.
    clamp_y : bool
        True when coefficients clamp the factor argument at zero.
    finite_exp_moments : bool
        Declared flag: E[exp(p X_t)] is finite for every p >= 1 and all
        sufficiently small t.  Required by the small-time call asymptotics.
    sigma_local, vol_mult : callables, optional
        For the LSV kind, sigma(x, y) = sigma_local(x) * vol_mult(y) is kept
        factorized so the spot volatility sigma_local(x0) * vol_mult(y0) is
        available exactly.
    coeffs_fused : callable, optional
        (x, y) -> (sigma, f, g) in one call with shared intermediates;
        numerically identical to the three handles, used by the simulation
        hot loop.  Presets provide it.
    """

    sigma: Coefficient
    f: Coefficient
    g: Coefficient
    rho: float
    x0: float
    y0: float
    kind: str
    growth: GrowthExponents
    params: Mapping[str, float] = field(default_factory=dict)
    x_drift_coeff: float = -0.5
    y_only: bool = True
    clamp_y: bool = False
    finite_exp_moments: bool = True
    sigma_local: Callable[[np.ndarray], np.ndarray] | None = None
    vol_mult: Callable[[np.ndarray], np.ndarray] | None = None
    coeffs_fused: Callable | None = None

    def spot_sigma(self) -> float:
        """Volatility level at the initial state."""
        return float(self.sigma(self.x0, self.y0))


@dataclass(frozen=True)
class AssumptionCheck:
    assumption: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of the growth/ergodicity assumption checks for one model."""

    checks: tuple[AssumptionCheck, ...]

    def passed(self, assumption: str) -> bool:
        for check in self.checks:
            if check.assumption == assumption:
                return check.passed
        raise KeyError(assumption)

    def __iter__(self):
        return iter(self.checks)


def _require(condition: bool, name: str, message: str) -> None:
    if not condition:
        raise DomainError(f"{name}: {message}")


def make_heston(kappa: float, theta: float, xi: float, rho: float,
                x0: float, y0: float, *, moment_flag: bool = True) -> ModelSpec:
    """Heston model: sigma = sqrt(y), f = kappa (theta - y), g = xi sqrt(y).

    Requires kappa > 0, theta > 0, xi != 0, |rho| <= 1 and y0 > 0.  The factor
    argument is clamped at zero inside all three coefficients.
    """
    _require(kappa > 0, "kappa", f"must be positive, got {kappa}")
    _require(theta > 0, "theta", f"must be positive, got {theta}")
    _require(xi != 0, "xi", "must be non-zero")
    _require(abs(rho) <= 1, "rho", f"must lie in [-1, 1], got {rho}")
    _require(y0 > 0, "y0", f"must be positive, got {y0}")

    def sigma(x, y):
        return np.sqrt(np.maximum(y, 0.0))

    def f(x, y):
        return kappa * (theta - np.maximum(y, 0.0))

    def g(x, y):
        return xi * np.sqrt(np.maximum(y, 0.0))

    def fused(x, y):
        clamped = np.maximum(y, 0.0)
        root = np.sqrt(clamped)
        return root, kappa * (theta - clamped), xi * root

    return ModelSpec(
        sigma=sigma, f=f, g=g, rho=rho, x0=x0, y0=y0, kind="heston",
        growth=GrowthExponents(nu_sigma=0.5, nu_g=0.5, q_sigma=0.5, q_g=0.5),
        params={"kappa": kappa, "theta": theta, "xi": xi,
                "a": kappa * theta, "b": -kappa, "c_sigma": 1.0, "c_g": xi},
        clamp_y=True, finite_exp_moments=moment_flag, coeffs_fused=fused,
    )


def make_stein_stein(a: float, b: float, c: float, rho: float,
                     x0: float, y0: float, *, moment_flag: bool = True) -> ModelSpec:
    """Stein-Stein model: sigma = y, f = a + b y, g = c (constant)."""
    _require(c != 0, "c", "must be non-zero")
    _require(abs(rho) <= 1, "rho", f"must lie in [-1, 1], got {rho}")

    def sigma(x, y):
        return np.asarray(y, dtype=float) + 0.0

    def f(x, y):
        return a + b * np.asarray(y, dtype=float)

    def g(x, y):
        return np.full_like(np.asarray(y, dtype=float), float(c))

    return ModelSpec(
        sigma=sigma, f=f, g=g, rho=rho, x0=x0, y0=y0, kind="stein_stein",
        growth=GrowthExponents(nu_sigma=1.0, nu_g=0.0, q_sigma=1.0, q_g=0.0),
        params={"a": a, "b": b, "c": c, "c_sigma": 1.0, "c_g": c},
        finite_exp_moments=moment_flag,
    )


def make_power_family(a: float, b: float, c_g: float, c_sigma: float,
                      nu_g: float, nu_sigma: float, rho: float,
                      x0: float, y0: float, *, moment_flag: bool = True) -> ModelSpec:
    """Power-coefficient family: f = a + b y, g = c_g y^nu_g, sigma = c_sigma y^nu_sigma.

    The exponents must satisfy nu_sigma in (0, 1] and nu_g in [0, 1 - nu_sigma];
    outside that region the tail-scaling reduction does not apply and
    construction is refused.
    """
    _require(0 < nu_sigma <= 1, "nu_sigma", f"must lie in (0, 1], got {nu_sigma}")
    _require(0 <= nu_g <= 1 - nu_sigma, "nu_g",
             f"must lie in [0, 1 - nu_sigma] = [0, {1 - nu_sigma}], got {nu_g}")
    _require(c_sigma != 0, "c_sigma", "must be non-zero")
    _require(abs(rho) <= 1, "rho", f"must lie in [-1, 1], got {rho}")

    fractional = (nu_sigma != int(nu_sigma)) or (nu_g != int(nu_g))

    def _yc(y):
        y = np.asarray(y, dtype=float)
        return np.maximum(y, 0.0) if fractional else y

    def sigma(x, y):
        return c_sigma * _yc(y) ** nu_sigma

    def f(x, y):
        return a + b * np.asarray(y, dtype=float)

    def g(x, y):
        return c_g * _yc(y) ** nu_g

    return ModelSpec(
        sigma=sigma, f=f, g=g, rho=rho, x0=x0, y0=y0, kind="power",
        growth=GrowthExponents(nu_sigma=nu_sigma, nu_g=nu_g,
                               q_sigma=nu_sigma, q_g=nu_g),
        params={"a": a, "b": b, "c_g": c_g, "c_sigma": c_sigma,
                "nu_g": nu_g, "nu_sigma": nu_sigma},
        clamp_y=fractional, finite_exp_moments=moment_flag,
    )


def make_constant_sigma(sigma_level: float, x0: float = 0.0,
                        y0: float = 0.0) -> ModelSpec:
    """Reference model with constant volatility and a frozen factor.

    X_t is then exactly Gaussian with mean x0 - sigma^2 t / 2 and variance
    sigma^2 t, which makes this the closed-form oracle for the Monte Carlo
    engine.
    """
    _require(sigma_level != 0, "sigma_level", "must be non-zero")

    def sigma(x, y):
        return np.full_like(np.asarray(y, dtype=float), float(sigma_level))

    def zero(x, y):
        return np.zeros_like(np.asarray(y, dtype=float))

    return ModelSpec(
        sigma=sigma, f=zero, g=zero, rho=0.0, x0=x0, y0=y0,
        kind="constant_sigma",
        growth=GrowthExponents(nu_sigma=None, nu_g=None, q_sigma=0.0, q_g=0.0),
        params={"c_sigma": sigma_level},
    )


def make_lsv(sigma_local: Callable, vol_mult: Callable, f: Coefficient,
             g: Coefficient, rho: float, x0: float, y0: float,
             growth: GrowthExponents, *, moment_flag: bool = True) -> ModelSpec:
    """Local-stochastic-volatility model with sigma(x, y) = sigma_local(x) * vol_mult(y).

    The two factors of sigma are stored separately so the spot level
    sigma_local(x0) * vol_mult(y0) entering the small-time rate is exact.
    """
    _require(abs(rho) <= 1, "rho", f"must lie in [-1, 1], got {rho}")
    spot = float(sigma_local(x0)) * float(vol_mult(y0))
    _require(spot != 0, "sigma_local*vol_mult", "must be non-zero at (x0, y0)")

    def sigma(x, y):
        return np.asarray(sigma_local(x), dtype=float) * np.asarray(vol_mult(y), dtype=float)

    return ModelSpec(
        sigma=sigma, f=f, g=g, rho=rho, x0=x0, y0=y0, kind="lsv",
        growth=growth, params={}, y_only=False,
        finite_exp_moments=moment_flag,
        sigma_local=sigma_local, vol_mult=vol_mult,
    )


def eval_coeffs(model: ModelSpec, x, y) -> tuple:
    """Pointwise coefficient evaluation (sigma, f, g) at (x, y).

    Total by construction: square-root kinds clamp y at 0 inside the handles.
    """
    return model.sigma(x, y), model.f(x, y), model.g(x, y)


def with_functional_growth(model: ModelSpec, q_h: float) -> ModelSpec:
    """Copy of the model with the integrated-functional growth bound declared."""
    return replace(model, growth=replace(model.growth, q_h=q_h))


def _is_cir_form(model: ModelSpec) -> bool:
    """True when the fast dynamics are mean-reverting with g = xi y^{q_g}, q_g in [1/2, 1)."""
    if not model.y_only:
        return False
    if model.kind == "heston":
        return True
    if model.kind == "power":
        a = model.params.get("a", 0.0)
        b = model.params.get("b", 0.0)
        nu_g = model.params.get("nu_g")
        return b < 0 and a > 0 and nu_g is not None and 0.5 <= nu_g < 1
    return False


def check_assumptions(model: ModelSpec, q_h: float | None = None,
                      beta: float | None = None) -> AssumptionReport:
    """Evaluate the growth and ergodicity conditions on declared exponents.

    Checks performed (failures are report entries, never exceptions):

    - ``growth-sum``: q_sigma + q_g <= 1.
    - ``functional-growth-generic``: max(q_sigma + q_h, q_g + q_h) < 1, the
      branch for fully general fast dynamics.
    - ``functional-growth-cir``: the alternative available on mean-reverting
      power-diffusion factors, q_sigma < 1 and q_g + q_h < 2.
    - ``mean-reversion``: f = -kappa y + tau(y) with Lipschitz constant of
      tau strictly below kappa, evaluated where the drift is declared affine.
    - ``h-growth`` (only when ``beta`` is given): the normalizing family
      eps^{-beta} keeps sqrt(eps) h(eps)^{(q_g+q_h-1)/(1-q_g)} vanishing, i.e.
      1/2 - beta (q_g + q_h - 1) / (1 - q_g) > 0.

    ``q_h`` falls back to the value declared in ``model.growth``.
    """
    growth = model.growth
    q_sigma, q_g = growth.q_sigma, growth.q_g
    if q_h is None:
        q_h = growth.q_h
    checks = []

    if q_sigma is None or q_g is None:
        checks.append(AssumptionCheck(
            "growth-sum", False, "q_sigma/q_g not declared"))
    else:
        total = q_sigma + q_g
        checks.append(AssumptionCheck(
            "growth-sum", total <= 1,
            f"q_sigma + q_g = {total:g} (need <= 1)"))

    if q_h is None or q_sigma is None or q_g is None:
        checks.append(AssumptionCheck(
            "functional-growth-generic", False, "q_h not declared"))
        checks.append(AssumptionCheck(
            "functional-growth-cir", False, "q_h not declared"))
    else:
        worst = max(q_sigma + q_h, q_g + q_h)
        checks.append(AssumptionCheck(
            "functional-growth-generic", worst < 1,
            f"max(q_sigma + q_h, q_g + q_h) = {worst:g} (need < 1)"))
        cir = _is_cir_form(model)
        ok = cir and q_sigma < 1 and (q_g + q_h) < 2
        detail = (f"q_sigma = {q_sigma:g} (need < 1), q_g + q_h = {q_g + q_h:g} (need < 2)"
                  if cir else "fast dynamics are not of mean-reverting power-diffusion form")
        checks.append(AssumptionCheck("functional-growth-cir", ok, detail))

    b = model.params.get("b")
    if b is None:
        checks.append(AssumptionCheck(
            "mean-reversion", False, "drift not declared affine in y"))
    else:
        # f = a + b y means kappa = -b and tau = a, so L_tau = 0 < kappa iff b < 0.
        checks.append(AssumptionCheck(
            "mean-reversion", b < 0,
            f"f = a + b y with b = {b:g}: L_tau = 0 < kappa = {-b:g}" if b < 0
            else f"f = a + b y with b = {b:g} >= 0 is not mean-reverting"))

    if beta is not None:
        if q_h is None or q_g is None or q_g >= 1:
            checks.append(AssumptionCheck(
                "h-growth", False, "needs declared q_g < 1 and q_h"))
        else:
            exponent = 0.5 - beta * (q_g + q_h - 1) / (1 - q_g)
            checks.append(AssumptionCheck(
                "h-growth", exponent > 0,
                f"1/2 - beta (q_g + q_h - 1)/(1 - q_g) = {exponent:g} (need > 0)"))

    return AssumptionReport(tuple(checks))
