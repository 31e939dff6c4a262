"""Command-line frontend.

    mdpvol <subcommand> [--config FILE] [--out DIR] [mc overrides]

Subcommands: invariant, poisson, rate, ldp, mc, asymptotics, compare,
acceptance.  Without --config the documented defaults run (the reference
parameter set).  Exit codes: 0 success, 1 configuration/validation error,
2 numeric failure, 3 acceptance failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from .config import EXPERIMENTS, parse_config, validate_config
from .errors import (ConfigError, DomainError, GridMismatchError,
                     QuadratureError, SimulationOverflowError,
                     SingularSystemError, UnsupportedModelError)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_ACCEPTANCE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdpvol",
        description="Moderate/large-deviations asymptotics for two-factor "
                    "volatility models")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        if name == "mc":
            p.add_argument("--model", choices=("heston", "stein_stein",
                                               "constant_sigma", "power"))
            p.add_argument("--t", type=float)
            p.add_argument("--k", type=float)
            p.add_argument("--x", type=float)
            p.add_argument("--beta", type=float)
            p.add_argument("--paths", type=int)
            p.add_argument("--steps", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--antithetic", action="store_true", default=None)
        if name == "acceptance":
            p.add_argument("--seed", type=int)
            p.add_argument("--criterion", type=int, action="append",
                           help="run only the given criterion id (repeatable)")
    return parser


def _load_config(args) -> "ExperimentConfig":
    if args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            text = handle.read()
        config = parse_config(text)
    else:
        config = validate_config({})
    doc = {
        "experiment": args.experiment,
        "seed": config.seed,
        "model": dict(config.model),
        "regime": dict(config.regime),
        "params": dict(config.params),
    }
    if config.out_prefix is not None:
        doc["out_prefix"] = config.out_prefix
    if args.experiment == "mc":
        if args.model is not None:
            doc["model"]["kind"] = args.model
        if args.beta is not None:
            doc["regime"]["beta"] = args.beta
        if args.seed is not None:
            doc["seed"] = args.seed
        for key in ("t", "k", "x", "paths", "steps", "antithetic"):
            value = getattr(args, key)
            if value is not None:
                doc["params"][key] = value
    if args.experiment == "acceptance" and getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    return validate_config(doc)


def _run_acceptance(config, outdir: str, only=None) -> int:
    import os

    from .acceptance import run_all
    from .reporting import write_json

    t0 = time.monotonic()
    results, payload = run_all(config.seed, only=only)
    elapsed = time.monotonic() - t0
    path = os.path.join(outdir, f"{config.out_prefix or ''}acceptance.json")
    write_json(path, payload)
    for result in results:
        print(result.line())
        if result.notes:
            print(f"         note: {result.notes}")
    n = len(results)
    print(f"{payload['n_passed']}/{n} criteria passed in {elapsed:.1f} s")
    print(f"wrote {path}")
    return EXIT_OK if payload["all_passed"] else EXIT_ACCEPTANCE


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.experiment == "acceptance":
            only = tuple(args.criterion) if getattr(args, "criterion", None) else None
            return _run_acceptance(config, args.out, only=only)
        from .reporting import RUNNERS

        written = RUNNERS[args.experiment](config, args.out)
        for path in written:
            print(f"wrote {path}")
        return EXIT_OK
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"config error: {violation}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, UnsupportedModelError, GridMismatchError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, SingularSystemError, SimulationOverflowError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
