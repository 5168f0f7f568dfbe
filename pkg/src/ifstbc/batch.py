"""Vectorised Monte-Carlo trial kernels.

The scalar decoders in :mod:`ifstbc.receiver` are the reference. These
kernels process a whole stack of independent trials with numpy and must agree
with them decision-for-decision. IF selection runs through the compiled
kernel in :mod:`ifstbc._kernels`; any trial it cannot handle falls back to the
scalar enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import effective_channel, noise_scale
from ._kernels import select_A_stack
from .numerics import GramLattice, NotPositiveDefinite
from .receiver import (
    SelectionFailure,
    codebook,
    if_select_A,
    regularization,
)
from .stbc import Constellation, LinearDesign

RECEIVERS = ("if", "zf", "mmse", "ml")


@dataclass
class TrialSetup:
    design: LinearDesign
    constellation: Constellation
    nr: int
    receiver: str
    fallbacks: int = field(default=0, init=False)

    def __post_init__(self):
        if self.receiver not in RECEIVERS:
            raise ValueError(f"unknown receiver {self.receiver!r}")
        m = self.constellation.sqrtM
        inv = np.zeros(m, dtype=np.int64)
        for r in range(1, m, 2):
            inv[r] = pow(r, -1, m)
        self.inv_table = inv
        self.popcount = np.array([bin(v).count("1") for v in range(m)], dtype=np.int64)
        self.words = codebook(self.design, self.constellation) if self.receiver == "ml" else None


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def filters(heff: np.ndarray, c: Constellation, P: float, nt: int) -> tuple[np.ndarray, np.ndarray]:
    """Stacked ``F`` and the IF Gram forms for ``heff`` of shape ``(N, rows, 2K)``."""
    n = heff.shape[-1]
    ht = np.swapaxes(heff, -1, -2)
    lam = regularization(c, P, nt)
    w = ht @ heff + lam * np.eye(n)
    f = np.linalg.solve(w, ht)
    e = f @ heff - np.eye(n)
    g = c.Ebar * e @ np.swapaxes(e, -1, -2)
    if not math.isinf(P):
        g = g + nt / (2.0 * P) * f @ np.swapaxes(f, -1, -2)
    return f, 0.5 * (g + np.swapaxes(g, -1, -2))


def select_A_batch(setup: TrialSetup, g: np.ndarray) -> np.ndarray:
    """Ring-invertible greedy selection for a stack of Gram matrices."""
    out, status = select_A_stack(g)
    n = g.shape[-1]
    for i in np.flatnonzero(status):
        setup.fallbacks += 1
        try:
            out[i] = if_select_A(GramLattice(g[i]), setup.constellation.sqrtM)
        except (SelectionFailure, NotPositiveDefinite, ValueError):
            out[i] = np.eye(n, dtype=np.int64)
    return out


def inverse_mod_batch(setup: TrialSetup, a: np.ndarray) -> np.ndarray:
    m = setup.constellation.sqrtM
    af = a.astype(float)
    det = np.rint(np.linalg.det(af)).astype(np.int64)
    adj = np.rint(det[:, None, None] * np.linalg.inv(af)).astype(np.int64)
    dinv = setup.inv_table[np.mod(det, m)]
    return np.mod(adj * dinv[:, None, None], m)


def decode_batch(setup: TrialSetup, heff: np.ndarray, y: np.ndarray, P: float) -> np.ndarray:
    """Decisions ``s_hat`` of shape ``(N, 2K)`` for received ``y`` ``(N, rows)``."""
    c = setup.constellation
    nt = setup.design.nt
    m = c.sqrtM
    ht = np.swapaxes(heff, -1, -2)
    if setup.receiver == "ml":
        shifted = (setup.words - c.offset).astype(float)
        pred = np.einsum("nrk,ck->ncr", heff, shifted)
        metric = np.sum((y[:, None, :] - pred) ** 2, axis=2)
        return setup.words[np.argmin(metric, axis=1)]
    if setup.receiver == "zf":
        f = np.linalg.solve(ht @ heff, ht)
        u = np.einsum("nkr,nr->nk", f, y) + c.offset
        return np.clip(_round_half_away(u), 0, m - 1)
    f, g = filters(heff, c, P, nt)
    u = np.einsum("nkr,nr->nk", f, y) + c.offset
    if setup.receiver == "mmse":
        return np.clip(_round_half_away(u), 0, m - 1)
    a = select_A_batch(setup, g)
    layer = _round_half_away(np.einsum("nij,nj->ni", a.astype(float), u))
    r = np.mod(layer, m)
    a_inv = inverse_mod_batch(setup, a)
    return np.mod(np.einsum("nij,nj->ni", a_inv, r), m)


def run_trials(setup: TrialSetup, P: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Simulate ``n`` independent codewords; returns bit errors per trial.

    Each trial draws a fresh channel (quasi-static over one codeword), uniform
    ring symbols and complex noise, in that order.
    """
    d, c = setup.design, setup.constellation
    h = math.sqrt(0.5) * (rng.standard_normal((n, setup.nr, d.nt)) + 1j * rng.standard_normal((n, setup.nr, d.nt)))
    s = rng.integers(0, c.sqrtM, size=(n, d.n_real))
    heff = effective_channel(h, d, c)
    z = math.sqrt(0.5) * rng.standard_normal((n, heff.shape[1]))
    y = np.einsum("nrk,nk->nr", heff, s - c.offset) + noise_scale(P, d.nt) * z
    s_hat = decode_batch(setup, heff, y, P)
    return setup.popcount[np.bitwise_xor(s, s_hat)].sum(axis=1)
