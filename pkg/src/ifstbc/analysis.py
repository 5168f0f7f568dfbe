"""Error-probability bounds for IF decoding and diversity-order estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numerics import GramLattice, enumerate_short_vectors, reduced_radius, shortest_vector
from .receiver import dual_gram, greedy_independent

DUAL_CANDIDATES = 500


class NvsViolated(ValueError):
    pass


class InsufficientErrors(ValueError):
    pass


@dataclass
class BoundCurve:
    snr_db: list[float]
    values: list[float]
    label: str
    raw: list[float] = field(default_factory=list, repr=False)


def lemma1_constant(K: int, nt: int) -> Fraction:
    """``c = 1 / (4 nt (2K^3 + 3K^2))`` as an exact fraction."""
    return Fraction(1, 4 * nt * (2 * K**3 + 3 * K**2))


def vblast_constant(nt: int) -> Fraction:
    return lemma1_constant(nt, nt)


def chernoff_layer_bound(P: float, nt: int, b_row_norm2: float) -> float:
    if b_row_norm2 == 0:
        return 0.0
    return math.exp(-P / (4.0 * nt * b_row_norm2))


def lemma1_bound(P: float, K: int, nt: int, eps1_sq: float) -> float:
    return math.exp(-float(lemma1_constant(K, nt)) * P * eps1_sq)


def theorem1_avg_bound(P: float, K: int, nt: int, nr: int, sigma_min_sq: float) -> float:
    """Union over the ``2K`` layers of the channel-averaged layer bound."""
    if sigma_min_sq <= 0:
        raise NvsViolated("sigma_min(C_inf) = 0: the design is not NVS-certifiable")
    c = float(lemma1_constant(K, nt))
    return 2 * K * (1.0 / (1.0 + c * P * sigma_min_sq)) ** (nt * nr)


def theorem1_constant_cprime(K: int, nt: int, nr: int, sigma_min_sq: float) -> float:
    """High-SNR form ``c' / P^(nt nr)`` with ``c' = 2K / (c sigma^2)^(nt nr)``."""
    if sigma_min_sq <= 0:
        raise NvsViolated("sigma_min(C_inf) = 0: the design is not NVS-certifiable")
    return 2 * K / (float(lemma1_constant(K, nt)) * sigma_min_sq) ** (nt * nr)


def vblast_bound(P: float, nt: int, nr: int) -> float:
    return (1.0 / (1.0 + float(vblast_constant(nt)) * P)) ** nr


def lattice_min_dist_sq(heff) -> float:
    """Squared length of the shortest nonzero vector of ``{d heff^T}``."""
    heff = np.asarray(heff, dtype=float)
    w = heff.T @ heff
    return shortest_vector(GramLattice(0.5 * (w + w.T)))[1]


def successive_minima(lat: GramLattice, count: int = DUAL_CANDIDATES) -> tuple[np.ndarray, np.ndarray]:
    """Successive minima (squared) and a realising set of independent vectors.

    Enumerates up to ``count`` shortest vectors inside the radius of the
    longest LLL-reduced basis vector and keeps real-independent ones greedily.
    """
    _, radius = reduced_radius(lat)
    cands = enumerate_short_vectors(lat, radius, max_count=None)
    rows = greedy_independent([v for v, _ in cands[:count]], lat.dim, ring_invertible=False)
    if len(rows) < lat.dim:
        rows = greedy_independent([v for v, _ in cands], lat.dim, ring_invertible=False)
    rows = np.array(rows, dtype=np.int64)
    norms = np.array([lat.norm2(r) for r in rows])
    return norms, rows


def dual_successive_minima(heff, count: int = DUAL_CANDIDATES) -> tuple[np.ndarray, np.ndarray]:
    return successive_minima(dual_gram(heff), count)


def transference_factor(K: int) -> int:
    return 2 * K**3 + 3 * K**2


def clip_probability(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def bound_curve(snr_db, fn, label: str) -> BoundCurve:
    raw = [fn(10.0 ** (db / 10.0)) for db in snr_db]
    return BoundCurve(list(snr_db), [clip_probability(v) for v in raw], label, raw)


def diversity_slope(points) -> float:
    """Least-squares slope of ``log10(ber)`` against ``log10(P)``, negated."""
    points = list(points)
    if len(points) < 2:
        raise ValueError("need at least two (snr_db, ber) points")
    snr = np.array([p[0] for p in points], dtype=float)
    ber = np.array([p[1] for p in points], dtype=float)
    if np.any(~np.isfinite(ber)) or np.any(ber <= 0):
        raise InsufficientErrors("every point needs a positive BER; run more trials")
    x = snr / 10.0
    slope = np.polyfit(x, np.log10(ber), 1)[0]
    return float(-slope)
