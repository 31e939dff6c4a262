"""Monte Carlo simulation of the two-factor system and normalized tail estimates.

Paths follow the full-truncation Euler scheme: at every step the coefficients
are evaluated with the factor argument clamped at zero (square-root kinds
clamp inside their handles), the factor itself may dip below zero between
steps, and the stored factor values are the clamped ones.  Correlated
increments are built from independent draws as W = rho Z + sqrt(1 - rho^2) Zp,
with Z driving the factor.

Reproducibility contract: paths are generated in fixed-size chunks, each chunk
drawing from a counter-based Philox stream keyed by (seed, chunk index), and
estimators are reduced in chunk order.  Serial and parallel execution of the
chunks therefore agree bitwise, and equal (model, config) inputs give
bitwise-identical batches.  Antithetic sampling flips both underlying normal
streams and doubles the stored batch.

Tail estimators report the hit probability with a normal-approximation 95%
confidence halfwidth and the normalized logarithm log(p) / h(t)^2 used by the
moderate-deviations comparisons; a batch with no hits reports p = 0 with a
-inf sentinel rather than a smoothed estimate, which would silently bias the
log-scale comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SimulationOverflowError
from .models import ModelSpec
from .scaling import ScaledCoefficients

_OVERFLOW_GUARD = 1e12
_CHUNK = 1 << 17
_CI_Z = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class SimConfig:
    """Batch size, grid, seed and variance-reduction switches for one run."""

    n_paths: int
    n_steps: int
    t_end: float
    seed: int = 0
    antithetic: bool = False
    scheme: str = "euler_full_truncation"

    def __post_init__(self):
        if self.n_paths < 1:
            raise DomainError(f"n_paths: must be >= 1, got {self.n_paths}")
        if self.n_steps < 1:
            raise DomainError(f"n_steps: must be >= 1, got {self.n_steps}")
        if self.t_end <= 0:
            raise DomainError(f"t_end: must be positive, got {self.t_end}")
        if self.scheme != "euler_full_truncation":
            raise DomainError(f"scheme: unknown scheme '{self.scheme}'")


@dataclass(frozen=True)
class PathBatch:
    """Terminal and pathwise summaries of one simulated batch (immutable)."""

    x_terminal: np.ndarray
    y_terminal: np.ndarray
    integrated_variance: np.ndarray
    x_running_max: np.ndarray

    @property
    def size(self) -> int:
        return len(self.x_terminal)


@dataclass(frozen=True)
class TailEstimate:
    """A tail probability with its MDP-normalized logarithm and analytic target."""

    p_hat: float
    ci_halfwidth: float
    normalized_log: float
    analytic_target: float
    threshold: float
    n_paths: int


@dataclass(frozen=True)
class CallEstimate:
    """A call-price estimate with its normalized logarithm and analytic target."""

    value: float
    ci_halfwidth: float
    normalized_log: float
    analytic_target: float
    strike_log: float
    n_paths: int


def _philox(seed: int, chunk_index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(chunk_index)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def simulate(model: ModelSpec, config: SimConfig,
             scaled: ScaledCoefficients | None = None) -> PathBatch:
    """Full-truncation Euler batch of the (optionally rescaled) system.

    ``scaled`` supplies the coefficient multipliers of the rescaled system;
    by default the original dynamics (all multipliers one) are simulated.
    Raises SimulationOverflowError and aborts if any |X| crosses 1e12.
    """
    mult = scaled if scaled is not None else ScaledCoefficients.identity(model)
    dt = config.t_end / config.n_steps
    sqrt_dt = math.sqrt(dt)
    rho = model.rho
    rho_perp = math.sqrt(max(0.0, 1.0 - rho ** 2))
    clamp = model.clamp_y
    coeffs = model.coeffs_fused
    # fold the rescaling multipliers and the time step into scalars
    a_x = mult.drift_x * model.x_drift_coeff * dt
    b_x = mult.diff_x * sqrt_dt
    a_y = mult.drift_y * dt
    b_y = mult.diff_y * sqrt_dt

    xs, ys, vs, ms = [], [], [], []
    n_chunks = (config.n_paths + _CHUNK - 1) // _CHUNK
    for chunk_index in range(n_chunks):
        n = min(_CHUNK, config.n_paths - chunk_index * _CHUNK)
        rng = _philox(config.seed, chunk_index)
        x = np.full(2 * n if config.antithetic else n, float(model.x0))
        y = np.full_like(x, float(model.y0))
        x_max = x.copy()
        y_stored = np.maximum(y, 0.0) if clamp else y.copy()
        # trapezoid of the stored factor: dt * (sum of samples - end averages)
        y_first = y_stored.copy()
        y_sum = np.zeros_like(x)
        for _ in range(config.n_steps):
            draws = rng.standard_normal((2, n))
            if config.antithetic:
                z = np.concatenate((draws[0], -draws[0]))
                zp = np.concatenate((draws[1], -draws[1]))
            else:
                z, zp = draws[0], draws[1]
            w = rho * z
            w += rho_perp * zp
            if coeffs is not None:
                s, f, g = coeffs(x, y)
            else:
                s = model.sigma(x, y)
                f = model.f(x, y)
                g = model.g(x, y)
            x += a_x * (s * s)
            x += b_x * (s * w)
            y += a_y * f
            y += b_y * (g * z)
            y_stored = np.maximum(y, 0.0) if clamp else y
            y_sum += y_stored
            np.maximum(x_max, x, out=x_max)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > _OVERFLOW_GUARD:
            raise SimulationOverflowError(
                f"|X| crossed {_OVERFLOW_GUARD:g} in chunk {chunk_index}; batch aborted")
        v = dt * (y_first + y_sum - 0.5 * (y_first + y_stored))
        xs.append(x)
        ys.append(y_stored.copy())
        vs.append(v)
        ms.append(x_max)

    return PathBatch(
        x_terminal=np.concatenate(xs),
        y_terminal=np.concatenate(ys),
        integrated_variance=np.concatenate(vs),
        x_running_max=np.concatenate(ms),
    )


def _tail_from_batch(values: np.ndarray, threshold: float, speed: float,
                     target: float) -> TailEstimate:
    n = len(values)
    hits = int(np.sum(values >= threshold))
    p_hat = hits / n
    ci = _CI_Z * math.sqrt(p_hat * (1 - p_hat) / n)
    normalized = math.log(p_hat) / speed if p_hat > 0 else -math.inf
    return TailEstimate(p_hat=p_hat, ci_halfwidth=ci, normalized_log=normalized,
                        analytic_target=target, threshold=threshold, n_paths=n)


def estimate_smalltime_tail(model: ModelSpec, t: float, k: float, beta: float,
                            config: SimConfig) -> TailEstimate:
    """Estimate P(X_t >= k sqrt(t) h(t)) with h(t) = t^{-beta}.

    The normalized log is log(p) / h(t)^2 and the analytic small-time target
    is -k^2 / (2 sigma^2(x0, y0)).
    """
    if not 0 < t < 1:
        raise DomainError(f"t: must lie in (0, 1), got {t}")
    if k < 0:
        raise DomainError(f"k: must be nonnegative, got {k}")
    if not 0 < beta < 0.5:
        raise DomainError(f"beta: must lie in (0, 1/2), got {beta}")
    h = t ** (-beta)
    threshold = model.x0 + k * math.sqrt(t) * h
    sigma0 = model.spot_sigma()
    if sigma0 == 0:
        raise DomainError("sigma(x0, y0): must be non-zero")
    target = -k ** 2 / (2 * sigma0 ** 2)
    batch = simulate(model, replace(config, t_end=t))
    return _tail_from_batch(batch.x_terminal, threshold, h ** 2, target)


def estimate_rv_tail(model: ModelSpec, t: float, x: float, beta: float,
                     config: SimConfig) -> TailEstimate:
    """Estimate P(V_t >= x t^{beta + 1/2} + theta t) for the square-root model.

    The normalized log is log(p) / t^{2 beta}; the analytic target is the
    integrated-variance rate -kappa^2 x^2 / (2 xi^2 theta).
    """
    if model.kind != "heston":
        raise DomainError("model: realised-variance tail needs the square-root model")
    if x <= 0:
        raise DomainError(f"x: must be positive, got {x}")
    if not 0 < beta < 0.5:
        raise DomainError(f"beta: must lie in (0, 1/2), got {beta}")
    if t <= 0:
        raise DomainError(f"t: must be positive, got {t}")
    p = model.params
    kappa, theta, xi = p["kappa"], p["theta"], p["xi"]
    threshold = x * t ** (beta + 0.5) + theta * t
    target = -kappa ** 2 * x ** 2 / (2 * xi ** 2 * theta)
    batch = simulate(model, replace(config, t_end=t))
    return _tail_from_batch(batch.integrated_variance, threshold, t ** (2 * beta), target)


def estimate_call_smalltime(model: ModelSpec, t: float, k: float, beta: float,
                            config: SimConfig) -> CallEstimate:
    """Estimate E(e^{X_t} - e^{k_t})_+ with k_t = k sqrt(t) h(t), k > 0.

    Requires the declared finite-exponential-moment flag on the model; the
    normalized log is log(estimate) / h(t)^2 with small-time target
    -k^2 / (2 sigma^2(x0, y0)).
    """
    if k <= 0:
        raise DomainError(f"k: the small-time call asymptotics require k > 0, got {k}")
    if not 0 < t < 1:
        raise DomainError(f"t: must lie in (0, 1), got {t}")
    if not 0 < beta < 0.5:
        raise DomainError(f"beta: must lie in (0, 1/2), got {beta}")
    if not model.finite_exp_moments:
        raise DomainError(
            "model: declared finite-exponential-moment flag is required "
            "for call-price asymptotics")
    h = t ** (-beta)
    k_t = k * math.sqrt(t) * h
    sigma0 = model.spot_sigma()
    if sigma0 == 0:
        raise DomainError("sigma(x0, y0): must be non-zero")
    target = -k ** 2 / (2 * sigma0 ** 2)
    batch = simulate(model, replace(config, t_end=t))
    log_strike = model.x0 + k_t
    payoff = np.maximum(np.exp(batch.x_terminal) - math.exp(log_strike), 0.0)
    value = float(np.mean(payoff))
    ci = _CI_Z * float(np.std(payoff)) / math.sqrt(len(payoff))
    normalized = math.log(value) / h ** 2 if value > 0 else -math.inf
    return CallEstimate(value=value, ci_halfwidth=ci, normalized_log=normalized,
                        analytic_target=target, strike_log=log_strike,
                        n_paths=len(payoff))


def exact_gaussian_tail(sigma_level: float, t: float, threshold: float,
                        x0: float = 0.0) -> float:
    """Exact P(X_t >= threshold) for the constant-volatility model.

    X_t is Gaussian with mean x0 - sigma^2 t / 2 and variance sigma^2 t; this
    is the closed-form oracle for coverage tests of the estimators.
    """
    from scipy.stats import norm

    mean = x0 - 0.5 * sigma_level ** 2 * t
    sd = abs(sigma_level) * math.sqrt(t)
    return float(norm.sf((threshold - mean) / sd))


def exact_gaussian_call(sigma_level: float, t: float, log_strike: float,
                        x0: float = 0.0) -> float:
    """Exact E(e^{X_t} - e^{log_strike})_+ for the constant-volatility model."""
    from scipy.stats import norm

    mean = x0 - 0.5 * sigma_level ** 2 * t
    sd = abs(sigma_level) * math.sqrt(t)
    d1 = (mean + sd ** 2 - log_strike) / sd
    d2 = (mean - log_strike) / sd
    return float(math.exp(mean + 0.5 * sd ** 2) * norm.cdf(d1)
                 - math.exp(log_strike) * norm.cdf(d2))
