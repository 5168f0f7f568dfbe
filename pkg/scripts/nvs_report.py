"""NVS report for the built-in designs and any design files given on the command line.

    python scripts/nvs_report.py --coeff-bound 3 my_design.txt
"""

import argparse

from ifstbc.stbc import builtin_design, load_design
from ifstbc.sweep import run_nvs_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="*")
    ap.add_argument("--coeff-bound", type=int, default=3)
    args = ap.parse_args()

    designs = [builtin_design(n) for n in ("alamouti", "vblast1", "vblast2", "vblast3")]
    designs += [load_design(f) for f in args.files]
    for d in designs:
        print(run_nvs_report(d, args.coeff_bound).text())
        print()


if __name__ == "__main__":
    main()
