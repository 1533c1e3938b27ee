"""Command-line entry point: ``ber``, ``complexity`` and ``channel`` subcommands.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from .channel import build_mimo_matrix
from .sim import (
    ConfigError,
    SolverDidNotConverge,
    SimConfig,
    draw_channel,
    load_config,
    rows_to_csv,
    run_ber_sweep,
    run_complexity_sweep,
    trial_seed,
)
from .solvers import NonPositiveCurvatureError
from .sparse import dense_to_csv, sparsify

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimo-afdm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("ber", "BER versus SNR sweep"),
        ("complexity", "precoding FLOPs versus number of users"),
        ("channel", "dump the DAFT-domain channel of the first trial as row,col,re,im CSV"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="sectioned key = value config file (UTF-8)")
        p.add_argument("--out", help="output CSV path (default: stdout)")
        p.add_argument("--seed", type=_u64, help="override the master seed")
        p.add_argument("--threshold-db", type=float, help="eSNR sparsification threshold in dB")
        p.add_argument("--jobs", type=int, help="worker threads; results do not depend on it")
        if name == "channel":
            p.add_argument("--sparse", action="store_true", help="dump only the entries kept by the sparsifier")
            p.add_argument("--waveform", choices=("AFDM", "OFDM"), help="waveform (default: first configured)")
    return parser


def _channel_csv(cfg: SimConfig, sparse: bool, waveform: str | None) -> str:
    ch_ss = trial_seed(cfg.master_seed, 0, 0).spawn(4)[0]
    spec = draw_channel(cfg, np.random.default_rng(ch_ss))
    H = build_mimo_matrix(spec, cfg.afdm_params(waveform or cfg.waveforms[0]))
    if not sparse:
        return dense_to_csv(H)
    sigma2 = 10.0 ** (-cfg.snr_grid_db[0] / 10.0)
    return sparsify(H, cfg.threshold_db, sigma2).to_csv()


def cli_main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else SimConfig()
        overrides = {}
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if args.threshold_db is not None:
            overrides["threshold_db"] = args.threshold_db
        if args.jobs is not None:
            overrides["jobs"] = args.jobs
        cfg = replace(cfg, **overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "ber":
            text = rows_to_csv(run_ber_sweep(cfg))
        elif args.command == "complexity":
            text = rows_to_csv(run_complexity_sweep(cfg))
        else:
            text = _channel_csv(cfg, args.sparse, args.waveform)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (np.linalg.LinAlgError, NonPositiveCurvatureError, SolverDidNotConverge, FloatingPointError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(cli_main())
