"""Compare the two ridge constants for the IF filter.

For random channels and integer rows a, perturbs b = a F around each closed
form and counts perturbations that lower the layer noise power
|b H - a|^2 Ebar + nt/(2P) |b|^2. A count of zero means the form is a local
minimiser of that expression.
"""

import argparse

import numpy as np

from ifstbc.receiver import if_compute_B, layer_noise_power
from ifstbc.stbc import Constellation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--channels", type=int, default=100)
    ap.add_argument("--perturbations", type=int, default=100)
    ap.add_argument("--snr", type=float, default=15.0)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    c, nt, P = Constellation(4), 2, 10 ** (args.snr / 10)
    for form in ("exact", "double"):
        improved_channels = 0
        for _ in range(args.channels):
            heff = rng.standard_normal((4, 4))
            a = rng.integers(-2, 3, 4)
            while not a.any():
                a = rng.integers(-2, 3, 4)
            b = if_compute_B(heff, a[None], c, P, nt, form)[0]
            base = layer_noise_power(a, b, heff, c, P, nt)
            step = 1e-2 * np.linalg.norm(b)
            better = sum(
                layer_noise_power(a, b + step * rng.standard_normal(b.shape), heff, c, P, nt) < base - 1e-12
                for _ in range(args.perturbations)
            )
            improved_channels += better > 0
        print(f"{form:>5}: {improved_channels}/{args.channels} channels where a random perturbation beats the closed form")


if __name__ == "__main__":
    main()
