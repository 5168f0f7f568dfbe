"""Per-layer Step-1 error against exp(-P / (4 nt |b_m|^2)) on fixed channels.

Uses the high-SNR (zero-forcing type) filter, for which the layer noise is
exactly Gaussian with variance nt |b_m|^2 / (2P).

    python scripts/chernoff_check.py --channels 5 --snr 20 --trials 200000
"""

import argparse
import math

import numpy as np

from ifstbc.channel import sample_channel
from ifstbc.receiver import if_equations, round_half_away
from ifstbc.stbc import Constellation, builtin_design


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--design", default="alamouti")
    ap.add_argument("--nr", type=int, default=2)
    ap.add_argument("--sqrt-m", type=int, default=4)
    ap.add_argument("--snr", type=float, default=25.0)
    ap.add_argument("--channels", type=int, default=5)
    ap.add_argument("--trials", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    d, c = builtin_design(args.design), Constellation(args.sqrt_m)
    P = 10 ** (args.snr / 10)
    rng = np.random.default_rng(args.seed)
    for k in range(args.channels):
        ch = sample_channel(args.nr, d.nt, d, c, seed=args.seed * 1000 + k)
        eq = if_equations(ch.heff, c, math.inf, d.nt)
        s = rng.integers(0, c.sqrtM, (args.trials, d.n_real))
        z = math.sqrt(0.5) * rng.standard_normal((args.trials, ch.heff.shape[0]))
        y = (s - c.offset) @ ch.heff.T + math.sqrt(d.nt / P) * z
        layer = round_half_away(y @ eq.b.T + c.offset * eq.a.sum(axis=1))
        empirical = np.mean(layer != s @ eq.a.T, axis=0)
        bound = np.exp(-P / (4 * d.nt * np.sum(eq.b**2, axis=1)))
        for m in range(d.n_real):
            flag = "ok" if empirical[m] <= bound[m] else "VIOLATED"
            print(f"channel {k} layer {m}: empirical {empirical[m]:.3e}  bound {bound[m]:.3e}  {flag}")


if __name__ == "__main__":
    main()
