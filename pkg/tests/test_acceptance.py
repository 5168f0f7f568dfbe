"""Acceptance criteria. Each test records one PASS/FAIL line, shown in the
terminal summary of any pytest run that includes this module."""

import itertools
import math
from fractions import Fraction

import numpy as np

from conftest import brute_force_vectors, random_gram, record_criterion
from ifstbc.analysis import (
    diversity_slope,
    dual_successive_minima,
    lattice_min_dist_sq,
    lemma1_constant,
    transference_factor,
    vblast_constant,
)
from ifstbc.channel import ReceivedVector, sample_channel
from ifstbc.numerics import GramLattice, enumerate_short_vectors
from ifstbc.receiver import (
    if_decode,
    if_equations,
    if_select_A,
    int_det,
    invert_mod_2k,
    mmse_decode,
    round_half_away,
    solve_mod,
)
from ifstbc.stbc import Constellation, make_alamouti, make_vblast, nvs_sigma_min
from ifstbc.sweep import SimConfig, run_ber_sweep


def _slope(records):
    return diversity_slope([(r.snr_db, r.ber) for r in records])


def _snr_at(records, target):
    """SNR where the piecewise log-linear BER curve crosses ``target``."""
    pts = [(r.snr_db, math.log10(r.ber)) for r in records if r.ber > 0]
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if y0 >= math.log10(target) >= y1:
            return x0 + (math.log10(target) - y0) * (x1 - x0) / (y1 - y0)
    return math.nan


# ---------------------------------------------------------------- 1


def test_c1_alamouti_if_full_diversity():
    cfg = SimConfig(
        design="alamouti", nr=1, sqrtM=2, receiver="if", snr_db=(20.0, 30.0, 5.0),
        max_trials=30_000_000, target_errors=200, seed=1,
    )
    recs = run_ber_sweep(cfg)
    slope = _slope(recs)
    ok = 1.7 <= slope <= 2.3 and all(r.bit_errors >= 200 for r in recs)
    pts = ", ".join(f"{r.snr_db:g} dB ber={r.ber:.3e}" for r in recs)
    assert record_criterion(1, ok, f"Alamouti 2x1 IF diversity slope {slope:.3f} in [1.7, 2.3] ({pts})")


# ---------------------------------------------------------------- 2


def test_c2_ml_dominates_if():
    common = dict(design="alamouti", nr=1, sqrtM=4, snr_db=(15.0, 30.0, 5.0), max_trials=200_000,
                  target_errors=10**12, seed=2)
    ml = run_ber_sweep(SimConfig(receiver="ml", **common))
    ifr = run_ber_sweep(SimConfig(receiver="if", **common))
    ordered = all(a.ber <= b.ber for a, b in zip(ml, ifr))
    gap = _snr_at(ifr, 1e-3) - _snr_at(ml, 1e-3)
    ok = ordered and 0 <= gap <= 3.0
    pts = ", ".join(f"{a.snr_db:g} dB ML {a.ber:.2e} / IF {b.ber:.2e}" for a, b in zip(ml, ifr))
    assert record_criterion(2, ok, f"ML <= IF at every point, IF-ML gap at 1e-3 = {gap:.2f} dB ({pts})")


# ---------------------------------------------------------------- 3


def test_c3_vblast_receive_diversity():
    cfg = SimConfig(
        design="vblast", nt=2, nr=2, sqrtM=2, receiver="if", snr_db=(15.0, 25.0, 5.0),
        max_trials=30_000_000, target_errors=200, seed=3,
    )
    recs = run_ber_sweep(cfg)
    slope = _slope(recs)
    pts = ", ".join(f"{r.snr_db:g} dB ber={r.ber:.3e}" for r in recs)
    assert record_criterion(3, 1.6 <= slope <= 2.6, f"V-BLAST 2x2 IF diversity slope {slope:.3f} in [1.6, 2.6] ({pts})")


# ---------------------------------------------------------------- 4


def test_c4_chernoff_layer_bound():
    d, c = make_alamouti(), Constellation(4)
    nr, nt = 2, d.nt
    P = 10 ** 2.5
    trials, chunk = 1_000_000, 200_000
    rng = np.random.default_rng(4)
    worst = 0.0
    violations = 0
    for k in range(20):
        ch = sample_channel(nr, nt, d, c, seed=400 + k)
        eq = if_equations(ch.heff, c, math.inf, nt)
        bound = np.exp(-P / (4 * nt * np.sum(eq.b**2, axis=1)))
        errors = np.zeros(d.n_real, dtype=np.int64)
        for _ in range(trials // chunk):
            s = rng.integers(0, c.sqrtM, (chunk, d.n_real))
            z = math.sqrt(0.5) * rng.standard_normal((chunk, ch.heff.shape[0]))
            y = (s - c.offset) @ ch.heff.T + math.sqrt(nt / P) * z
            layer = round_half_away(y @ eq.b.T + c.offset * eq.a.sum(axis=1))
            errors += np.sum(layer != s @ eq.a.T, axis=0)
        empirical = errors / trials
        violations += int(np.sum(empirical > bound))
        worst = max(worst, float(np.max(empirical / np.maximum(bound, 1e-300))))
    assert record_criterion(
        4, violations == 0,
        f"Step-1 layer error <= exp(-P/(4 nt |b|^2)) on 20 channels x 4 layers at 25 dB, 1e6 trials: "
        f"{violations} violations, worst empirical/bound {worst:.3f}",
    )


# ---------------------------------------------------------------- 5


def test_c5_successive_minima_chain():
    d, c = make_alamouti(), Constellation(2)
    K = d.K
    v12 = v13 = 0
    for k in range(100):
        ch = sample_channel(1, d.nt, d, c, seed=500 + k)
        heff = ch.heff
        eps1 = lattice_min_dist_sq(heff)
        dual_norms, _ = dual_successive_minima(heff)
        last = float(dual_norms[-1])
        v13 += last > transference_factor(K) / eps1 * (1 + 1e-9)
        eq = if_equations(heff, c, math.inf, d.nt)
        b_norms = np.sum(eq.b**2, axis=1)
        v12 += int(np.sum(b_norms > last * (1 + 1e-9)))
    assert record_criterion(
        5, v12 == 0 and v13 == 0,
        f"dual 2K-th minimum <= (2K^3+3K^2)/eps1^2 and |a_m H^-1|^2 <= that minimum on 100 channels: "
        f"{v13} + {v12} violations",
    )


# ---------------------------------------------------------------- 6


def test_c6_nvs_exactness():
    ala = nvs_sigma_min(make_alamouti(), 3, "full")
    vb = {nt: nvs_sigma_min(make_vblast(nt), 3, "nonzero") for nt in (1, 2, 3)}
    ok = abs(ala - 1.0) <= 1e-9 and all(abs(v - 1.0) <= 1e-9 for v in vb.values())
    assert record_criterion(6, ok, f"NVS Alamouti {ala:.12f}, vblast nonzero {vb}")


# ---------------------------------------------------------------- 7


def _exact_minimax(gram, bound):
    n = gram.shape[0]
    box = [np.array(v) for v in itertools.product(range(-bound, bound + 1), repeat=n) if any(v)]
    box = [v for v in box if v[np.flatnonzero(v)[0]] > 0]
    norms = np.array([v @ gram @ v for v in box])
    order = np.argsort(norms, kind="stable")
    for k in range(n - 1, len(order)):
        for rest in itertools.combinations(order[:k], n - 1):
            if int_det(np.array([box[i] for i in rest] + [box[order[k]]])) % 2:
                return float(norms[order[k]])
    return math.inf


def test_c7a_selection_vs_brute_force():
    rng = np.random.default_rng(71)
    bad = 0
    for _ in range(50):
        g = random_gram(rng, 4) + 0.05 * np.eye(4)
        a = if_select_A(GramLattice(g), 4)
        ours = max(float(r @ g @ r) for r in a)
        bad += int_det(a) % 2 == 0 or ours > _exact_minimax(g, 2) * (1 + 1e-9)
    assert record_criterion("7a", bad == 0, f"if_select_A minimax <= odd-det brute force over +-2 box, {bad}/50 failures")


def test_c7b_enumeration_vs_brute_force():
    rng = np.random.default_rng(72)
    bad = 0
    for i in range(100):
        n = 2 + i % 3
        g = random_gram(rng, n) + 0.1 * np.eye(n)
        radius = float(np.sort(np.diag(g))[min(1, n - 1)])
        bound = int(math.floor(math.sqrt(radius / np.linalg.eigvalsh(g).min()))) + 1
        got = {tuple(int(x) for x in v): q for v, q in enumerate_short_vectors(GramLattice(g), radius)}
        want = brute_force_vectors(g, radius, bound)
        bad += got.keys() != want.keys() or any(abs(got[k] - want[k]) > 1e-9 * abs(want[k]) for k in got)
    assert record_criterion("7b", bad == 0, f"enumerate_short_vectors equals box brute force, {bad}/100 mismatches")


def test_c7c_step3_exhaustive():
    rng = np.random.default_rng(73)
    bad = checked = 0
    for m in (2, 4):
        ring = np.array(list(itertools.product(range(m), repeat=4)))
        for _ in range(10):
            while True:
                a = rng.integers(-3, 4, (4, 4))
                if int_det(a) % 2:
                    break
            a_inv = invert_mod_2k(a, m)
            images = np.mod(ring @ a.T, m)
            for r in ring:
                # every preimage of r under s -> A s mod m, by exhaustive search
                pre = ring[np.all(images == r, axis=1)]
                got = solve_mod(a_inv, r, m)
                bad += len(pre) != 1 or not np.array_equal(pre[0], got)
                checked += 1
    assert record_criterion("7c", bad == 0, f"Step-3 solver equals exhaustive search over Z_m^4 (m=2,4), {bad}/{checked} mismatches")


def test_c7d_if_identity_equals_mmse():
    d, c = make_alamouti(), Constellation(4)
    rng = np.random.default_rng(74)
    P = 10.0
    layer_bad = decision_bad = 0
    for k in range(1000):
        ch = sample_channel(1, d.nt, d, c, seed=7400 + k)
        s = rng.integers(0, c.sqrtM, d.n_real)
        y = ch.heff @ (s - c.offset) + math.sqrt(d.nt / P) * math.sqrt(0.5) * rng.standard_normal(ch.heff.shape[0])
        rx = ReceivedVector(y, P, math.sqrt(d.nt / P))
        eq = if_equations(ch.heff, c, P, d.nt, a=np.eye(4, dtype=np.int64))
        ifr = if_decode(rx, eq, c)
        mm = mmse_decode(rx, ch.heff, c, P, d.nt)
        layer_bad += not np.array_equal(ifr.layer_integers, mm.layer_integers)
        in_range = (mm.layer_integers >= 0) & (mm.layer_integers < c.sqrtM)
        decision_bad += not np.array_equal(ifr.s_hat[in_range], mm.s_hat[in_range])
    assert record_criterion(
        "7d", layer_bad == 0 and decision_bad == 0,
        f"IF with A=I vs MMSE slicing on 1000 trials: {layer_bad} layer mismatches, "
        f"{decision_bad} in-range decision mismatches",
    )


# ---------------------------------------------------------------- 8


def test_c8_constants():
    ok = lemma1_constant(2, 2) == Fraction(1, 224) and vblast_constant(2) == Fraction(1, 224)
    assert record_criterion(8, ok, f"c(K=2, nt=2) = {lemma1_constant(2, 2)}, V-BLAST c(nt=2) = {vblast_constant(2)}")
