"""Quasi-static Rayleigh channel and the real vectorised receive model.

Conventions: a complex ``n x T`` matrix is vectorised by row-stacking
``[Re; Im]`` (see :func:`ifstbc.stbc.vec_rows`). The scaled model is
``y = heff (s - offset) + sqrt(nt / P) z`` where ``z`` is the real expansion
of unit-variance complex noise, i.e. variance 1/2 per real component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import real_expand, sample_gaussian_matrix
from .stbc import Constellation, LinearDesign, build_code_matrix, check_symbols, normalization_factor, unvec_rows

RANK_TOL = 1e-10
MAX_RESAMPLES = 10


class RankFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ChannelRealization:
    h: np.ndarray
    hprime: np.ndarray
    heff: np.ndarray
    T: int

    @property
    def nr(self) -> int:
        return self.h.shape[0]

    @property
    def nt(self) -> int:
        return self.h.shape[1]


@dataclass(frozen=True)
class ReceivedVector:
    y: np.ndarray
    snr: float
    noise_scale: float


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def noise_scale(P: float, nt: int) -> float:
    if P <= 0:
        raise ValueError("SNR must be positive")
    return 0.0 if math.isinf(P) else math.sqrt(nt / P)


def effective_channel(h, d: LinearDesign, c: Constellation) -> np.ndarray:
    """``(H' kron I_T) R gamma`` for one channel or a stack ``(N, nr, nt)``."""
    hp = real_expand(h)
    r = build_code_matrix(d) * normalization_factor(d, c)
    r3 = r.reshape(2 * d.nt, d.T, d.n_real)
    out = np.einsum("...ij,jtk->...itk", hp, r3)
    return out.reshape(*hp.shape[:-2], hp.shape[-2] * d.T, d.n_real)


def is_full_column_rank(heff, tol: float = RANK_TOL) -> bool:
    sv = np.linalg.svd(heff, compute_uv=False)
    return sv.size > 0 and heff.shape[0] >= heff.shape[1] and sv[-1] > tol * sv[0]


def sample_channel(nr: int, nt: int, design: LinearDesign, constellation: Constellation, seed=None) -> ChannelRealization:
    """Draw ``H`` with i.i.d. N_c(0, 1) entries and derive the real models.

    Rank-deficient effective channels are redrawn; more than
    ``MAX_RESAMPLES`` consecutive failures raise :class:`RankFailure`.
    """
    if nr < 1 or nt < 1:
        raise ValueError("nr and nt must be >= 1")
    if design.nt != nt:
        raise ValueError(f"design has nt={design.nt}, channel asked for nt={nt}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RESAMPLES + 1):
        h = sample_gaussian_matrix(nr, nt, rng)
        heff = effective_channel(h, design, constellation)
        if is_full_column_rank(heff):
            return ChannelRealization(h=h, hprime=real_expand(h), heff=heff, T=design.T)
    raise RankFailure(
        f"effective channel rank-deficient {MAX_RESAMPLES + 1} times in a row "
        f"(2K={design.n_real}, 2 nr T={2 * nr * design.T})"
    )


def transmit(ch: ChannelRealization, s, c: Constellation, P: float, seed=None) -> ReceivedVector:
    s = check_symbols(s, c)
    scale = noise_scale(P, ch.nt)
    y = ch.heff @ (s - c.offset)
    if scale:
        rng = np.random.default_rng(seed)
        y = y + scale * math.sqrt(0.5) * rng.standard_normal(y.shape)
    return ReceivedVector(y=y, snr=P, noise_scale=scale)


def received_matrix(rx: ReceivedVector, nr: int, T: int) -> np.ndarray:
    """Undo the vectorisation and scaling: ``Y = sqrt(P/nt) H X + Z``."""
    if rx.noise_scale == 0:
        raise ValueError("noiseless observation has no finite unscaled form")
    return unvec_rows(rx.y, nr, T) / rx.noise_scale
