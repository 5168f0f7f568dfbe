"""BER of the Alamouti code over a 2 x nr channel for all four receivers.

Writes one CSV per receiver into --out and prints a side-by-side table.
Every receiver sees the same trials (same seed, fixed trial count).

    python scripts/alamouti_ber.py --sqrt-m 4 --snr 0:30:5 --trials 100000
"""

import argparse
from pathlib import Path

from ifstbc.analysis import diversity_slope
from ifstbc.sweep import SimConfig, ber_csv, parse_snr, run_ber_sweep

RECEIVERS = ("ml", "if", "mmse", "zf")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nr", type=int, default=1)
    ap.add_argument("--sqrt-m", type=int, default=4)
    ap.add_argument("--snr", type=parse_snr, default=(0.0, 30.0, 5.0))
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/alamouti"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    curves = {}
    for rx in RECEIVERS:
        cfg = SimConfig(design="alamouti", nr=args.nr, sqrtM=args.sqrt_m, receiver=rx, snr_db=args.snr,
                        max_trials=args.trials, target_errors=10**12, seed=args.seed)
        curves[rx] = run_ber_sweep(cfg)
        (args.out / f"{rx}.csv").write_text(ber_csv(curves[rx]))

    print("snr_db " + " ".join(f"{rx:>10}" for rx in RECEIVERS))
    for i, rec in enumerate(curves["ml"]):
        print(f"{rec.snr_db:6g} " + " ".join(f"{curves[rx][i].ber:10.3e}" for rx in RECEIVERS))
    for rx in RECEIVERS:
        tail = [(r.snr_db, r.ber) for r in curves[rx] if r.ber > 0][-3:]
        if len(tail) >= 2:
            print(f"{rx}: slope over the last {len(tail)} nonzero points = {diversity_slope(tail):.2f}")


if __name__ == "__main__":
    main()
