"""Command line entry point: ``ncdoa {spectrum,sweep,trial}``.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

import numpy as np

from .errors import ConfigError, DomainError
from .harness import (
    ALGORITHMS,
    SweepConfig,
    emit_results,
    estimate,
    load_config,
    load_scenario,
    normalize_algorithm,
    run_sweep,
    trial_covariances,
    utc_now,
    write_spectrum_csv,
)
from .spectrum import SearchGrid

EXIT_CONFIG = 2
EXIT_IO = 3


def _algo(name):
    try:
        return normalize_algorithm(name)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _scenario_args(p, seed_default=0):
    p.add_argument("--scenario", required=True, help="built-in name (fig1, fig2) or JSON file")
    p.add_argument("--algo", required=True, type=_algo,
                   help="one of music, nc-music, hrnc")
    p.add_argument("--snr", type=float, default=None, help="SNR in dB (default: scenario value)")
    p.add_argument("--seed", type=int, default=seed_default)
    p.add_argument("--snapshots", type=int, default=None)
    p.add_argument("--grid-step", type=float, default=0.05, help="search grid step in degrees")
    p.add_argument("--exact", action="store_true", help="use analytic covariances")


def _scenario_from(args):
    sc = load_scenario(args.scenario)
    changes = {"seed": args.seed}
    if args.snr is not None:
        changes["snr_db"] = args.snr
    if args.snapshots is not None:
        changes["num_snapshots"] = args.snapshots
    try:
        return replace(sc, **changes)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _run_one(args):
    sc = _scenario_from(args)
    try:
        grid = SearchGrid.uniform(sc.geometry, args.grid_step)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    return sc, estimate(args.algo, trial_covariances(sc, args.exact), sc, grid)


def cmd_spectrum(args) -> int:
    sc, outcome = _run_one(args)
    os.makedirs(args.out, exist_ok=True)
    write_spectrum_csv(os.path.join(args.out, "spectrum.csv"), outcome.curves.values())
    summary = {
        "algorithm": args.algo,
        "true_doas": sc.doas.tolist(),
        "estimates": None if outcome.estimates is None else outcome.estimates.tolist(),
        "errors": None if outcome.errors is None else outcome.errors.tolist(),
        "failure": outcome.failure,
    }
    with open(os.path.join(args.out, "estimates.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(json.dumps(summary))
    return 0


def cmd_trial(args) -> int:
    sc, outcome = _run_one(args)
    if not outcome.ok:
        print(f"failed: {outcome.failure}")
        return 0
    for src, est, err in zip(sc.sources, outcome.estimates, outcome.errors):
        print(f"{src.signal_class:5s} {src.doa:9.4f} {est:9.4f} {err:+.6f}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.trials is not None:
        overrides["num_trials"] = args.trials
    if args.master_seed is not None:
        overrides["master_seed"] = args.master_seed
    if args.grid_step is not None:
        overrides["grid_step_deg"] = args.grid_step
    if args.emit_spectra:
        overrides["emit_spectra"] = True
    if overrides:
        cfg = SweepConfig.from_dict({**cfg.to_dict(), **overrides})
    started = utc_now()
    result = run_sweep(cfg, workers=args.workers)
    for path in emit_results(result, args.out, started):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncdoa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="write the pseudo-spectra of one run")
    _scenario_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("trial", help="print per-source errors of one run")
    _scenario_args(p)
    p.set_defaults(func=cmd_trial)

    p = sub.add_parser("sweep", help="Monte Carlo SNR sweep from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--master-seed", type=int, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--emit-spectra", action="store_true")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
