"""Moderate- and large-deviations asymptotics for two-factor volatility models.

Library layout:

- ``models``: model catalog (Heston, Stein-Stein, power family, constant
  volatility, LSV) and assumption checks;
- ``scaling``: space-time rescaling and the limit constants;
- ``invariant``: invariant measures of the fast factor and quadrature;
- ``poisson``: Poisson equations for the fast-factor generator;
- ``rates``: quadratic rate functions and variational minimizers;
- ``ldp``: closed-form large-deviations objects, Fenchel-Legendre transform,
  curvature;
- ``mc``: full-truncation Euler simulation and normalized tail estimates;
- ``asymptotics``: option-price and tail exponents;
- ``config``/``cli``: experiment configuration and the command-line frontend;
- ``acceptance``: the executable acceptance-criteria suite.
"""

from .asymptotics import (AsymptoticQuote, largetime_call_exponent,
                          largetime_put_quote, quote_catalog, rv_option_quotes,
                          smalltime_call_exponent, tail_probability_exponent)
from .errors import (ConfigError, DomainError, GridMismatchError, GrowthError,
                     QuadratureError, SimulationOverflowError,
                     SingularSystemError, UnsupportedModelError)
from .invariant import (InvariantMeasure, averaged_drift, averaged_state_path,
                        gamma_invariant, integrate, invariant_for_model,
                        measure_mean, measure_variance, speed_measure)
from .ldp import (LdpHestonParams, RealizedVarLdp, curvature,
                  fenchel_legendre_numeric, heston_lambda, heston_lambda_star,
                  heston_u_star, rv_lambda_inf, rv_lambda_star, rv_mgf)
from .mc import (CallEstimate, PathBatch, SimConfig, TailEstimate,
                 estimate_call_smalltime, estimate_rv_tail,
                 estimate_smalltime_tail, exact_gaussian_call,
                 exact_gaussian_tail, simulate)
from .models import (AssumptionReport, GrowthExponents, ModelSpec,
                     check_assumptions, eval_coeffs, make_constant_sigma,
                     make_heston, make_lsv, make_power_family,
                     make_stein_stein, with_functional_growth)
from .paths import DiscretePath
from .poisson import (PoissonSolution, generator_residual, solve_phi_cir,
                      solve_phi_heston, solve_poisson_cev)
from .rates import (INFINITE_RATE, LargeTimeParams, QbarResult,
                    QuadraticRateSpec, contract_two_to_one, endpoint_rate,
                    general_quadratic_rate, heston_large_time_params,
                    large_time_params, minimize_endpoint, qbar_integrated,
                    share_large_time_params, share_measure_model,
                    small_time_rate_1d, small_time_rate_2d)
from .scaling import (ScaledCoefficients, ScalingRegime, h_eval,
                      mdp_growth_condition, rescaled_coefficients,
                      tail_exponent, zeta_from_family)

__version__ = "0.1.0"
