"""Receive diversity of uncoded V-BLAST under IF decoding.

Runs the IF BER sweep for nt x nr V-BLAST and prints it next to the
analytic bound (1/(1+cP))^nr and the fitted slope.

    python scripts/vblast_diversity.py --nt 2 --nr 2 --snr 10:25:5
"""

import argparse

from ifstbc.analysis import diversity_slope, vblast_bound
from ifstbc.sweep import SimConfig, parse_snr, run_ber_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nt", type=int, default=2)
    ap.add_argument("--nr", type=int, default=2)
    ap.add_argument("--sqrt-m", type=int, default=2)
    ap.add_argument("--snr", type=parse_snr, default=(10.0, 25.0, 5.0))
    ap.add_argument("--target-errors", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cfg = SimConfig(design="vblast", nt=args.nt, nr=args.nr, sqrtM=args.sqrt_m, snr_db=args.snr,
                    max_trials=50_000_000, target_errors=args.target_errors, seed=args.seed)
    recs = run_ber_sweep(cfg)
    print(f"{'snr_db':>6} {'trials':>10} {'ber':>10} {'bound':>10}")
    for r in recs:
        print(f"{r.snr_db:6g} {r.trials:10d} {r.ber:10.3e} {vblast_bound(10 ** (r.snr_db / 10), args.nt, args.nr):10.3e}")
    print(f"diversity slope {diversity_slope([(r.snr_db, r.ber) for r in recs]):.2f} (receive diversity {args.nr})")


if __name__ == "__main__":
    main()
