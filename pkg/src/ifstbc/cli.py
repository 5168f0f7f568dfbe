"""Command-line front end: ``simulate``, ``bound`` and ``nvs``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .sweep import (
    BOUND_KINDS,
    ConfigError,
    SimConfig,
    ber_csv,
    bound_csv,
    parse_snr,
    run_ber_sweep,
    run_bound_eval,
    run_nvs_report,
)

# argparse dest -> SimConfig field
_FLAG_FIELDS = {
    "design": "design",
    "nr": "nr",
    "nt": "nt",
    "sqrt_m": "sqrtM",
    "receiver": "receiver",
    "snr": "snr_db",
    "trials": "max_trials",
    "target_errors": "target_errors",
    "seed": "seed",
    "workers": "workers",
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON config file; flags override its values")
    p.add_argument("--design", help="alamouti | vblast | vblastN | file:PATH")
    p.add_argument("--design-file", type=Path, help="design file; same as --design file:PATH")
    p.add_argument("--nt", type=int, help="transmit antennas for 'vblast' (default 2)")
    p.add_argument("--nr", type=int, help="receive antennas")
    p.add_argument("--sqrt-m", type=int, help="ring size sqrt(M), a power of two")
    p.add_argument("--snr", type=parse_snr, help="SNR grid in dB as START:STOP:STEP")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", type=Path, help="output CSV (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ifstbc", description="Integer-forcing STBC laboratory")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Monte-Carlo BER sweep")
    _add_common(sim)
    sim.add_argument("--receiver", choices=["if", "zf", "mmse", "ml"])
    sim.add_argument("--trials", type=int, help="maximum trials per SNR point")
    sim.add_argument("--target-errors", type=int, help="stop a point after this many bit errors")
    sim.add_argument("--workers", type=int)
    sim.add_argument("--no-timing", action="store_true", help="write wall_seconds as 0 for byte-reproducible CSV")

    bnd = sub.add_parser("bound", help="evaluate an analytic error bound over the SNR grid")
    _add_common(bnd)
    bnd.add_argument("--kind", choices=BOUND_KINDS, default="theorem1")
    bnd.add_argument("--sigma-min-sq", type=float, help="sigma_min(C_inf)^2; searched if omitted")
    bnd.add_argument("--eps1-sq", type=float, help="squared minimum distance for the lemma1 curve")
    bnd.add_argument("--coeff-bound", type=int, default=3)

    nvs = sub.add_parser("nvs", help="bounded search for the minimum singular value")
    nvs.add_argument("--config", type=Path)
    nvs.add_argument("--design", help="alamouti | vblast | vblastN | file:PATH")
    nvs.add_argument("--design-file", type=Path)
    nvs.add_argument("--nt", type=int)
    nvs.add_argument("--coeff-bound", type=int, default=3)
    return parser


def config_from_args(args: argparse.Namespace) -> SimConfig:
    cfg = SimConfig.from_file(args.config) if getattr(args, "config", None) else SimConfig()
    for dest, name in _FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is not None:
            setattr(cfg, name, value)
    if getattr(args, "design_file", None) is not None:
        cfg.design = f"file:{args.design_file}"
    return cfg


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        if args.command == "simulate":
            records = run_ber_sweep(cfg)
            _emit(ber_csv(records, timing=not args.no_timing), args.out)
            if any(r.flagged for r in records):
                print("warning: some SNR points ran zero trials", file=sys.stderr)
        elif args.command == "bound":
            curve = run_bound_eval(cfg, args.kind, args.sigma_min_sq, args.eps1_sq, args.coeff_bound)
            _emit(bound_csv(curve), args.out)
        else:
            report = run_nvs_report(cfg.load_design(), args.coeff_bound)
            print(report.text())
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
