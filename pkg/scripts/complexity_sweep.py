"""Analytic and measured precoding FLOPs against the number of users.

    python3 scripts/complexity_sweep.py configs/complexity.cfg --measure
"""

import argparse
from pathlib import Path

from mimo_afdm.metrics import METHODS, REFERENCE_FLOPS_N2
from mimo_afdm.sim import analytic_params, load_config, rows_to_csv, run_complexity_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("--out", type=Path)
    ap.add_argument("--measure", action="store_true", help="also run the configured precoders with FLOP counting")
    args = ap.parse_args()

    cfg = load_config(args.config)
    rows = run_complexity_sweep(cfg, measure=args.measure)
    fp = analytic_params(cfg, cfg.complexity.users[0])
    print(f"N={fp.N} N_ts={fp.N_ts} T_s={fp.T_s} T_p={fp.T_p} nnz={fp.nnz}")

    table = {(r.K, r.method): r.mean_flops for r in rows}
    cols = sorted({m for _, m in table}, key=lambda m: (m.endswith("measured"), m))
    print("K".rjust(3) + "".join(c.rjust(22) for c in cols))
    for K in cfg.complexity.users:
        print(f"{K:>3}" + "".join(f"{table.get((K, c), float('nan')):>22.4g}" for c in cols))
    print("reference (units of N^2):", ", ".join(f"{m} {REFERENCE_FLOPS_N2[m]}" for m in METHODS))
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(rows_to_csv(rows), encoding="utf-8", newline="")


if __name__ == "__main__":
    main()
