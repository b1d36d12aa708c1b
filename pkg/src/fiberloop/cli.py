"""Command-line front end.

Exit codes: 0 success, 2 config error, 3 resource cap, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load
from .errors import ConfigError, DecompositionError, ResourceCapError, ZeroNormError, ZeroProbabilityError
from .studies import (
    convergence_study,
    fmt,
    oracle_comparison,
    run_studies,
    write_convergence,
)

log = logging.getLogger("fiberloop")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4

ORACLE_TOLERANCE = 1e-8

SINGLE_STUDY = {
    "entropy": "entropy_profile",
    "correlations": "correlations",
    "schmidt": "schmidt",
    "sample": "samples",
    "graph": "graph_report",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fiberloop", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fiberloop {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "simulate": "run every study listed in the config",
        "entropy": "entanglement entropy profile",
        "correlations": "two-point correlations and decay fit",
        "schmidt": "Schmidt spectrum at one cut",
        "sample": "draw photon-counting samples",
        "oracle-check": "compare the MPS against the dense oracle",
        "graph": "tensor-network graph and treewidth report",
        "converge": "grow d and chi until observables settle",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, type=Path, metavar="PATH")
        sp.add_argument("--out", type=Path, default=Path("out"), metavar="DIR")
        sp.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def _with_seed(cfg: RunConfig, seed: int | None) -> RunConfig:
    if seed is None:
        return cfg
    if seed < 0:
        raise ConfigError("--seed: must be a nonnegative integer")
    return dataclasses.replace(cfg, seed=seed)


def _dispatch(args) -> int:
    cfg = _with_seed(load(args.config), args.seed)
    if args.threads < 1:
        raise ConfigError("--threads: must be >= 1")
    out: Path = args.out
    if args.command == "simulate":
        paths = run_studies(cfg, out, threads=args.threads)
    elif args.command in SINGLE_STUDY:
        paths = run_studies(cfg, out, studies=(SINGLE_STUDY[args.command],), threads=args.threads)
    elif args.command == "converge":
        report = convergence_study(cfg)
        paths = write_convergence(cfg, report, out)
        log.info("convergence: %s (%s)", "converged" if report.converged else "unconverged", report.stop_reason)
    elif args.command == "oracle-check":
        errors = oracle_comparison(cfg)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "oracle_check.json"
        body = {
            "fiberloop": __version__,
            "config": cfg.to_dict(),
            "tolerance": ORACLE_TOLERANCE,
            "errors": {k: fmt(v) for k, v in errors.items()},
        }
        path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        paths = [path]
        checked = {k: v for k, v in errors.items() if k != "truncation_error"}
        worst = max(checked.values())
        print(f"oracle-check max deviation {worst:.3e} (tolerance {ORACLE_TOLERANCE:.0e})")
        if worst > ORACLE_TOLERANCE:
            return EXIT_NUMERICAL
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ConfigError(f"unknown command {args.command}")
    for path in paths:
        print(path)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DecompositionError, ZeroNormError, ZeroProbabilityError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
