"""Monte-Carlo BER sweeps, bound curves and NVS reports.

Trials are grouped into fixed-size chunks. Chunk ``j`` of SNR point ``i``
draws from ``SeedSequence([seed, i, j])``, so every trial's randomness is a
function of its index alone and the result does not depend on how many
worker processes share the chunks.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analysis
from .batch import RECEIVERS, TrialSetup, run_trials
from .channel import db_to_linear
from .stbc import Constellation, LinearDesign, builtin_design, load_design, nvs_search

log = logging.getLogger(__name__)

CHUNK_SIZE = 4096
BER_HEADER = ["snr_db", "trials", "bit_errors", "ber", "wall_seconds"]
BOUND_HEADER = ["snr_db", "value", "label"]
BOUND_KINDS = ("lemma1", "theorem1", "theorem1-asymptotic", "vblast")


class ConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    design: str = "alamouti"
    nr: int = 1
    sqrtM: int = 2
    receiver: str = "if"
    snr_db: tuple[float, float, float] = (0.0, 30.0, 5.0)
    max_trials: int = 1_000_000
    target_errors: int = 200
    seed: int = 0
    workers: int = 1
    nt: int = 2
    chunk_size: int = CHUNK_SIZE

    def load_design(self) -> LinearDesign:
        if self.design.startswith("file:"):
            return load_design(self.design[len("file:"):])
        try:
            return builtin_design(self.design, self.nt)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def snr_grid(self) -> list[float]:
        start, stop, step = self.snr_db
        if step <= 0:
            raise ConfigError("SNR step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(max(count, 0))]

    def validate(self) -> LinearDesign:
        d = self.load_design()
        if self.nr < 1:
            raise ConfigError("nr must be >= 1")
        if self.sqrtM < 2 or self.sqrtM & (self.sqrtM - 1):
            raise ConfigError(f"sqrtM must be a power of two (got {self.sqrtM})")
        if self.receiver not in RECEIVERS:
            raise ConfigError(f"receiver must be one of {RECEIVERS}")
        if d.n_real > 2 * self.nr * d.T:
            raise ConfigError(
                f"2K <= 2 nr T violated: 2K={d.n_real}, 2 nr T={2 * self.nr * d.T} (under-determined system)"
            )
        if self.max_trials < 0 or self.target_errors < 1 or self.workers < 1 or self.chunk_size < 1:
            raise ConfigError("trials must be >= 0, target_errors, workers and chunk_size >= 1")
        return d

    @classmethod
    def from_mapping(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        aliases = {"sqrt_m": "sqrtM", "snr": "snr_db", "trials": "max_trials"}
        kwargs = {}
        for key, value in data.items():
            key = key.replace("-", "_")
            key = aliases.get(key, key)
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            if key == "snr_db" and isinstance(value, str):
                value = parse_snr(value)
            kwargs[key] = tuple(value) if key == "snr_db" else value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "SimConfig":
        return cls.from_mapping(json.loads(Path(path).read_text()))


def parse_snr(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) == 1:
        v = float(parts[0])
        return (v, v, 1.0)
    if len(parts) != 3:
        raise ConfigError(f"SNR range must be START:STOP:STEP, got {text!r}")
    return tuple(float(p) for p in parts)


@dataclass
class BerRecord:
    snr_db: float
    trials: int
    bit_errors: int
    ber: float
    wall_seconds: float = 0.0
    flagged: bool = field(default=False, repr=False)


def _chunk_errors(args) -> np.ndarray:
    setup, P, n, entropy = args
    return run_trials(setup, P, n, np.random.default_rng(np.random.SeedSequence(entropy)))


def run_point(setup: TrialSetup, cfg: SimConfig, snr_index: int, snr_db: float, pool=None) -> BerRecord:
    """Run one SNR point until ``target_errors`` bit errors or ``max_trials``."""
    t0 = time.perf_counter()
    P = db_to_linear(snr_db)
    bits = setup.design.n_real * setup.constellation.bits_per_symbol
    if cfg.max_trials == 0:
        log.warning("max_trials=0 at %s dB: no trials run", snr_db)
        return BerRecord(snr_db, 0, 0, float("nan"), time.perf_counter() - t0, flagged=True)
    n_chunks = -(-cfg.max_trials // cfg.chunk_size)
    trials = errors = 0
    width = cfg.workers if pool is not None else 1
    j = 0
    while j < n_chunks:
        jobs = []
        for jj in range(j, min(j + width, n_chunks)):
            n = min(cfg.chunk_size, cfg.max_trials - jj * cfg.chunk_size)
            jobs.append((setup, P, n, [cfg.seed, snr_index, jj]))
        results = list(pool.map(_chunk_errors, jobs)) if pool is not None else [_chunk_errors(jobs[0])]
        j += len(jobs)
        done = False
        for per_trial in results:
            cum = errors + np.cumsum(per_trial)
            hit = np.flatnonzero(cum >= cfg.target_errors)
            if hit.size:
                trials += int(hit[0]) + 1
                errors = int(cum[hit[0]])
                done = True
                break
            trials += per_trial.size
            errors = int(cum[-1]) if per_trial.size else errors
        if done:
            break
    ber = errors / (trials * bits)
    return BerRecord(snr_db, trials, errors, ber, time.perf_counter() - t0)


def run_ber_sweep(cfg: SimConfig, progress=None) -> list[BerRecord]:
    d = cfg.validate()
    setup = TrialSetup(d, Constellation(cfg.sqrtM), cfg.nr, cfg.receiver)
    records = []
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for i, snr in enumerate(cfg.snr_grid()):
            rec = run_point(setup, cfg, i, snr, pool)
            records.append(rec)
            log.info("%s %s dB: %d trials, %d bit errors, ber=%.3e", cfg.receiver, snr, rec.trials, rec.bit_errors, rec.ber)
            if progress is not None:
                progress(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def ber_csv(records: list[BerRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BER_HEADER)
    for r in records:
        w.writerow([f"{r.snr_db:g}", r.trials, r.bit_errors, f"{r.ber:.6e}", f"{r.wall_seconds if timing else 0.0:.3f}"])
    return buf.getvalue()


def read_ber_csv(text: str) -> list[BerRecord]:
    rows = csv.DictReader(io.StringIO(text))
    return [
        BerRecord(float(r["snr_db"]), int(r["trials"]), int(r["bit_errors"]), float(r["ber"]), float(r["wall_seconds"]))
        for r in rows
    ]


# --------------------------------------------------------------------------
# bounds


def run_bound_eval(
    cfg: SimConfig,
    kind: str,
    sigma_min_sq: float | None = None,
    eps1_sq: float | None = None,
    coeff_bound: int = 3,
) -> analysis.BoundCurve:
    d = cfg.validate()
    grid = cfg.snr_grid()
    K, nt, nr = d.K, d.nt, cfg.nr
    if kind == "vblast":
        return analysis.bound_curve(grid, lambda P: analysis.vblast_bound(P, nt, nr), f"vblast nt={nt} nr={nr}")
    if kind == "lemma1":
        if eps1_sq is None:
            raise ConfigError("lemma1 bound needs --eps1-sq")
        return analysis.bound_curve(grid, lambda P: analysis.lemma1_bound(P, K, nt, eps1_sq), f"lemma1 eps1^2={eps1_sq:g}")
    if kind in ("theorem1", "theorem1-asymptotic"):
        if sigma_min_sq is None:
            sigma, _ = nvs_search(d, coeff_bound, "full")
            sigma_min_sq = sigma**2
        if kind == "theorem1":
            fn = lambda P: analysis.theorem1_avg_bound(P, K, nt, nr, sigma_min_sq)  # noqa: E731
        else:
            cp = analysis.theorem1_constant_cprime(K, nt, nr, sigma_min_sq)
            fn = lambda P: cp / P ** (nt * nr)  # noqa: E731
        return analysis.bound_curve(grid, fn, f"{kind} {d.name} nr={nr} sigma^2={sigma_min_sq:g}")
    raise ConfigError(f"unknown bound kind {kind!r}; choose from {BOUND_KINDS}")


def bound_csv(curve: analysis.BoundCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BOUND_HEADER)
    for snr, v in zip(curve.snr_db, curve.values):
        w.writerow([f"{snr:g}", f"{v:.6e}", curve.label])
    return buf.getvalue()


# --------------------------------------------------------------------------
# NVS report


@dataclass
class NvsReport:
    design: str
    coeff_bound: int
    sigma_full: float
    argmin_full: list[int]
    sigma_nonzero: float
    argmin_nonzero: list[int]

    @property
    def verdict(self) -> str:
        return "PASS" if self.sigma_full > 1e-9 else "FAIL"

    def text(self) -> str:
        return "\n".join(
            [
                f"design: {self.design}",
                f"search box: integer coefficients in [-{self.coeff_bound}, {self.coeff_bound}]",
                f"sigma_min (full):    {self.sigma_full:.12g} at s={self.argmin_full}",
                f"sigma_min (nonzero): {self.sigma_nonzero:.12g} at s={self.argmin_nonzero}",
                f"NVS verdict: {self.verdict}",
                "note: the box minimum only bounds the infimum over all integer "
                "coefficients from above; FAIL is conclusive only when a codeword "
                "with sigma_min exactly 0 was found.",
            ]
        )

    def as_dict(self) -> dict:
        return {**asdict(self), "verdict": self.verdict}


def run_nvs_report(design: LinearDesign, coeff_bound: int = 3) -> NvsReport:
    full, s_full = nvs_search(design, coeff_bound, "full")
    nonzero, s_nz = nvs_search(design, coeff_bound, "nonzero")
    if full < 1e-9:
        full = 0.0
    return NvsReport(design.name, coeff_bound, full, s_full.tolist(), nonzero, s_nz.tolist())
