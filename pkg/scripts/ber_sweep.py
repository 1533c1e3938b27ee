"""BER versus SNR for every configured waveform and precoder.

    python3 scripts/ber_sweep.py configs/mobility_ber.cfg --out results/mobility_ber.csv
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from mimo_afdm.sim import load_config, rows_to_csv, run_ber_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", type=Path)
    ap.add_argument("--out", type=Path)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    cfg = replace(load_config(args.config), jobs=args.jobs)
    t0 = time.perf_counter()
    rows = run_ber_sweep(cfg)
    print(f"{len(rows)} rows in {time.perf_counter() - t0:.1f} s", file=sys.stderr)

    print(f"{'method':<10}{'waveform':<9}{'SNR':>6}{'BER':>12}{'iters':>8}")
    for r in rows:
        print(f"{r.method:<10}{r.waveform:<9}{r.snr_db:>6g}{r.ber:>12.3e}{r.mean_iters:>8.1f}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(rows_to_csv(rows), encoding="utf-8", newline="")


if __name__ == "__main__":
    main()
