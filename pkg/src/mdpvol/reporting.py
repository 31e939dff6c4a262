"""Experiment runners and deterministic CSV/JSON emission.

Every runner consumes a validated ``ExperimentConfig`` and writes its outputs
under a target directory.  Output files are deterministic functions of the
configuration: float cells carry 17 significant digits, CSV headers are fixed
and documented, JSON keys are sorted, files are written atomically
(temp-then-rename), and no timestamps or wall times ever enter a file, so
rerunning a subcommand with an equal config reproduces the files bitwise.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import asymptotics as asy
from . import ldp as ldp_mod
from .config import ExperimentConfig, build_model, build_regime, subseed
from .errors import ConfigError
from .invariant import (gamma_invariant, integrate, measure_mean,
                        measure_variance, speed_measure)
from .mc import (SimConfig, estimate_call_smalltime, estimate_rv_tail,
                 estimate_smalltime_tail)
from .poisson import solve_poisson_cev
from .rates import (endpoint_rate, heston_large_time_params,
                    share_large_time_params)

CSV_HEADERS: Mapping[str, Sequence[str]] = {
    "invariant": ("kind", "shape", "rate", "mean", "variance"),
    "poisson": ("y", "u", "u_prime", "residual"),
    "rate": ("x", "J", "J_Q", "q", "q_Q", "alpha"),
    "ldp": ("x", "lambda_star", "mdp_quadratic", "difference"),
    "compare": ("x", "ldp_rate", "mdp_quadratic_shifted", "abs_diff"),
    "mc": ("p_hat", "ci", "normalized_log", "target", "gap"),
    "asymptotics": ("regime", "x_or_k", "exponent", "speed"),
}


def fmt(value) -> str:
    """Deterministic cell formatting: 17 significant digits for floats."""
    if isinstance(value, float):
        return f"{value + 0.0:.17g}"  # +0.0 folds -0.0 into 0.0
    return str(value)


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """CSV with LF line endings, UTF-8, a header row, and 17-digit floats."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(cell) for cell in row])
    _atomic_write(path, buffer.getvalue())


def write_json(path: str, payload) -> None:
    """JSON with sorted keys and a trailing newline."""
    _atomic_write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _out(outdir: str, config: ExperimentConfig, name: str) -> str:
    prefix = config.out_prefix or ""
    return os.path.join(outdir, f"{prefix}{name}")


def _measure_for(config: ExperimentConfig):
    m = config.model
    q_g = config.params.get("q_g", 0.5)
    if q_g == 0.5:
        return gamma_invariant(m["kappa"], m["theta"], m["xi"])
    return speed_measure(m["kappa"], m["theta"], m["xi"], q_g)


def run_invariant(config: ExperimentConfig, outdir: str) -> list[str]:
    measure = _measure_for(config)
    shape = "" if measure.shape is None else measure.shape
    rate = "" if measure.rate is None else measure.rate
    rows = [(measure.kind, shape, rate, measure_mean(measure),
             measure_variance(measure))]
    path = _out(outdir, config, "invariant.csv")
    write_csv(path, CSV_HEADERS["invariant"], rows)
    return [path]


def run_poisson(config: ExperimentConfig, outdir: str) -> list[str]:
    m = config.model
    kappa, theta, xi = m["kappa"], m["theta"], m["xi"]
    q_g = config.params.get("q_g", 0.5)
    functional = config.params.get("functional", "linear")
    measure = _measure_for(config)
    if functional == "linear":
        def H(y):
            return y
    elif functional == "half_centered_variance":
        def H(y):
            return 0.5 * y
    else:
        raise ConfigError([f"params.functional: unknown functional '{functional}'"])
    sol = solve_poisson_cev(H, measure, kappa, theta, xi, q_g, q_h=1.0)
    h_bar = integrate(measure, H).value

    y = sol.grid
    up = sol.u_prime_values
    h_minus = y[1:-1] - y[:-2]
    h_plus = y[2:] - y[1:-1]
    u_second = (h_minus ** 2 * up[2:] + (h_plus ** 2 - h_minus ** 2) * up[1:-1]
                - h_plus ** 2 * up[:-2]) / (h_plus * h_minus * (h_plus + h_minus))
    yi = y[1:-1]
    g2 = (xi * yi ** q_g) ** 2
    resid = np.abs(kappa * (theta - yi) * up[1:-1] + 0.5 * g2 * u_second
                   - (H(yi) - h_bar))
    rows = [(float(yi[j]), float(sol.u_values[j + 1]), float(up[j + 1]),
             float(resid[j])) for j in range(len(yi))]
    path = _out(outdir, config, "poisson.csv")
    write_csv(path, CSV_HEADERS["poisson"], rows)
    return [path]


def run_rate(config: ExperimentConfig, outdir: str) -> list[str]:
    model = build_model(config)
    regime = build_regime(config)
    zeta = regime.zeta_c
    lt = heston_large_time_params(model, zeta=zeta)
    lt_q = share_large_time_params(model, zeta=zeta)
    x_values = config.params.get("x_values", [config.params.get("x", 0.1)])
    rows = []
    for x in x_values:
        rows.append((float(x),
                     endpoint_rate(lt.q, x, lt.alpha),
                     endpoint_rate(lt_q.q, x, lt_q.alpha),
                     lt.q, lt_q.q, lt.alpha))
    path = _out(outdir, config, "rate.csv")
    write_csv(path, CSV_HEADERS["rate"], rows)
    return [path]


def _ldp_grid(config: ExperimentConfig):
    theta = config.model["theta"]
    center = -theta / 2
    x_min = config.params.get("x_min", center - 0.1)
    x_max = config.params.get("x_max", center + 0.1)
    n_points = int(config.params.get("n_points", 101))
    if n_points < 3:
        raise ConfigError(["params.n_points: need at least 3 grid points"])
    return np.linspace(x_min, x_max, n_points)


def _ldp_rows(config: ExperimentConfig):
    model = build_model(config)
    m = config.model
    variant = config.params.get("d_variant", "as_printed")
    params = ldp_mod.LdpHestonParams(m["kappa"], m["theta"], m["xi"], m["rho"],
                                     d_variant=variant)
    lt = heston_large_time_params(model, zeta=0.0)
    grid = _ldp_grid(config)
    lam = np.array([ldp_mod.heston_lambda_star(params, x) for x in grid])
    center = -m["theta"] / 2
    shift = float(np.min(lam))
    quad = (grid - center) ** 2 / (2 * lt.q) + shift
    diff = np.abs(lam - quad)
    rows = [(float(grid[i]), float(lam[i]), float(quad[i]), float(diff[i]))
            for i in range(len(grid))]
    return rows, params, lt


def run_ldp(config: ExperimentConfig, outdir: str) -> list[str]:
    rows, _, _ = _ldp_rows(config)
    path = _out(outdir, config, "ldp.csv")
    write_csv(path, CSV_HEADERS["ldp"], rows)
    return [path]


def run_compare(config: ExperimentConfig, outdir: str) -> list[str]:
    rows, params, lt = _ldp_rows(config)
    m = config.model
    center = -m["theta"] / 2
    residuals = {}
    for variant in ldp_mod.D_VARIANTS:
        p_v = ldp_mod.LdpHestonParams(m["kappa"], m["theta"], m["xi"], m["rho"],
                                      d_variant=variant)
        curv = ldp_mod.curvature(lambda x: ldp_mod.heston_lambda_star(p_v, x),
                                 center)
        residuals[variant] = abs(curv * lt.q - 1.0)
    passing = [v for v in ldp_mod.D_VARIANTS if residuals[v] <= 1e-3]
    summary = {
        "d_variant_used": params.d_variant,
        "q": lt.q,
        "curvature_identity_residual": {k: v for k, v in residuals.items()},
        "passing_variant": passing[0] if passing else None,
        "min_lambda_star": min(row[1] for row in rows),
    }
    csv_path = _out(outdir, config, "compare.csv")
    json_path = _out(outdir, config, "compare_summary.json")
    write_csv(csv_path, CSV_HEADERS["compare"], rows)
    write_json(json_path, summary)
    return [csv_path, json_path]


def run_mc(config: ExperimentConfig, outdir: str) -> list[str]:
    model = build_model(config)
    regime = build_regime(config)
    p = config.params
    target_kind = p.get("target", "smalltime_tail")
    t = p.get("t", 0.01)
    sim = SimConfig(
        n_paths=int(p.get("paths", 100_000)),
        n_steps=int(p.get("steps", 100)),
        t_end=t,
        seed=subseed(config.seed, "mc"),
        antithetic=bool(p.get("antithetic", False)),
    )
    if target_kind == "smalltime_tail":
        est = estimate_smalltime_tail(model, t, p.get("k", 0.2), regime.beta, sim)
        row = (est.p_hat, est.ci_halfwidth, est.normalized_log,
               est.analytic_target, est.normalized_log - est.analytic_target)
    elif target_kind == "rv_tail":
        est = estimate_rv_tail(model, t, p.get("x", 0.05), regime.beta, sim)
        row = (est.p_hat, est.ci_halfwidth, est.normalized_log,
               est.analytic_target, est.normalized_log - est.analytic_target)
    elif target_kind == "call":
        est = estimate_call_smalltime(model, t, p.get("k", 0.2), regime.beta, sim)
        row = (est.value, est.ci_halfwidth, est.normalized_log,
               est.analytic_target, est.normalized_log - est.analytic_target)
    else:
        raise ConfigError([f"params.target: unknown target '{target_kind}'"])
    path = _out(outdir, config, "mc.csv")
    write_csv(path, CSV_HEADERS["mc"], [row])
    return [path]


def run_asymptotics(config: ExperimentConfig, outdir: str) -> list[str]:
    model = build_model(config)
    regime = build_regime(config)
    p = config.params
    k = p.get("k", 0.2)
    x = p.get("x", 0.1)
    t = p.get("t", 100.0)
    x_rv = p.get("x", 0.05)
    lt = heston_large_time_params(model, zeta=regime.zeta_c)
    lt_q = share_large_time_params(model, zeta=regime.zeta_c)
    quotes = asy.quote_catalog(model, lt, lt_q.q, k, x, x_rv, regime.beta, t)
    strikes = {
        "small_time_call": k,
        "large_time_put_leading": -abs(x),
        "large_time_put_correction": -abs(x),
        "large_time_call": abs(x),
        "rv_option_ldp": x_rv,
        "rv_option_mdp": x_rv,
        "tail_probability": abs(x) + abs(model.x0) + 0.2,
    }
    rows = [(q.regime, strikes[q.regime], q.exponent_value, q.speed)
            for q in quotes]
    path = _out(outdir, config, "asymptotics.csv")
    write_csv(path, CSV_HEADERS["asymptotics"], rows)
    return [path]


RUNNERS = {
    "invariant": run_invariant,
    "poisson": run_poisson,
    "rate": run_rate,
    "ldp": run_ldp,
    "compare": run_compare,
    "mc": run_mc,
    "asymptotics": run_asymptotics,
}
