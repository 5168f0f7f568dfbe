"""IF, ZF, MMSE and exhaustive ML decoders for the real vectorised model.

All linear receivers act on ``y = heff (s - offset) + sqrt(nt/P) z`` and
compensate the constellation shift before slicing, so rounding always lands
on the integer lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ReceivedVector
from .numerics import (
    BudgetExceeded,
    GramLattice,
    enumerate_short_vectors,
    reduced_radius,
    spd_solve,
)
from .stbc import Constellation, LinearDesign, iter_codebook, normalization_factor

SELECT_MAX_COUNT = 200
ML_BUDGET = 10**6


class SelectionFailure(RuntimeError):
    pass


class NotInvertibleModM(ArithmeticError):
    pass


class MlBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class IfEquations:
    a: np.ndarray
    b: np.ndarray
    noise_powers: np.ndarray
    a_inv: np.ndarray | None = None


@dataclass(frozen=True)
class DecodeResult:
    s_hat: np.ndarray
    layer_integers: np.ndarray
    ok: bool = True


def round_half_away(x):
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


# --------------------------------------------------------------------------
# filters and the IF Gram form


def regularization(c: Constellation, P: float, nt: int, closed_form: str = "exact") -> float:
    """Ridge term of the IF/MMSE filter.

    ``"exact"`` is ``nt / (2 P Ebar)``, the minimiser of the per-layer noise
    power under variance-1/2 real noise. ``"double"`` is ``nt / (P Ebar)``,
    twice that.
    """
    if closed_form not in ("exact", "double"):
        raise ValueError(f"unknown closed_form {closed_form!r}")
    if math.isinf(P):
        return 0.0
    lam = nt / (P * c.Ebar)
    return lam / 2.0 if closed_form == "exact" else lam


def filter_matrix(heff, c: Constellation, P: float, nt: int, closed_form: str = "exact") -> np.ndarray:
    """``F = heff^T (lam I + heff heff^T)^{-1}``, evaluated in the equivalent
    ``(lam I + heff^T heff)^{-1} heff^T`` form (pseudo-inverse at ``P = inf``)."""
    heff = np.asarray(heff, dtype=float)
    lam = regularization(c, P, nt, closed_form)
    w = heff.T @ heff + lam * np.eye(heff.shape[1])
    return spd_solve(w, heff.T)


def layer_noise_power(a_row, b_row, heff, c: Constellation, P: float, nt: int) -> float:
    """Effective noise power ``||b H - a||^2 Ebar + nt/(2P) ||b||^2`` of one layer."""
    a_row = np.asarray(a_row, dtype=float)
    b_row = np.asarray(b_row, dtype=float)
    quant = float(np.sum((b_row @ heff - a_row) ** 2)) * c.Ebar
    noise = 0.0 if math.isinf(P) else nt / (2.0 * P) * float(b_row @ b_row)
    return quant + noise


def if_gram(heff, c: Constellation, P: float, nt: int, closed_form: str = "exact") -> GramLattice:
    """Gram form ``G`` with ``a G a^T`` equal to the layer noise power of ``a``
    under the filter ``b = a F``."""
    heff = np.asarray(heff, dtype=float)
    f = filter_matrix(heff, c, P, nt, closed_form)
    e = f @ heff - np.eye(heff.shape[1])
    g = c.Ebar * e @ e.T
    if not math.isinf(P):
        g = g + nt / (2.0 * P) * f @ f.T
    return GramLattice(0.5 * (g + g.T))


def dual_gram(heff) -> GramLattice:
    """Gram matrix ``(heff^T heff)^{-1}`` of the dual lattice."""
    heff = np.asarray(heff, dtype=float)
    w = heff.T @ heff
    inv = spd_solve(w, np.eye(w.shape[0]))
    return GramLattice(0.5 * (inv + inv.T))


def if_compute_B(heff, a, c: Constellation, P: float, nt: int, closed_form: str = "exact") -> np.ndarray:
    return np.asarray(a, dtype=float) @ filter_matrix(heff, c, P, nt, closed_form)


# --------------------------------------------------------------------------
# selection of the integer matrix


def _gf2_mask(v) -> int:
    mask = 0
    for i, x in enumerate(v):
        if int(x) & 1:
            mask |= 1 << i
    return mask


def _gf2_insert(basis: dict[int, int], mask: int) -> bool:
    """Insert into an XOR basis keyed by leading bit; False if dependent."""
    while mask:
        top = mask.bit_length() - 1
        if top not in basis:
            basis[top] = mask
            return True
        mask ^= basis[top]
    return False


def greedy_independent(candidates, n: int, ring_invertible: bool = True) -> list[np.ndarray]:
    """Pick rows in the given order, keeping each one that stays independent.

    With ``ring_invertible`` independence is over GF(2), which is the same as
    an odd determinant and hence invertibility modulo any power of two; both
    variants are matroids, so the greedy pick minimises every sorted norm.
    """
    picked: list[np.ndarray] = []
    gf2: dict[int, int] = {}
    for v in candidates:
        v = np.asarray(v)
        if ring_invertible:
            if not _gf2_insert(gf2, _gf2_mask(v)):
                continue
        else:
            trial = np.array(picked + [v], dtype=float)
            if np.linalg.matrix_rank(trial) < len(picked) + 1:
                continue
        picked.append(v)
        if len(picked) == n:
            break
    return picked


def if_select_A(
    g: GramLattice,
    sqrtM: int | None = None,
    ring_invertible: bool = True,
    max_count: int = SELECT_MAX_COUNT,
) -> np.ndarray:
    """Integer matrix whose rows are short vectors of ``g``.

    Candidates are enumerated inside the radius of the longest LLL-reduced
    basis vector (that basis is unimodular, so a valid choice always exists
    there) and picked greedily in ascending norm. ``sqrtM`` only documents the
    ring; any power of two gives the same invertibility condition.
    """
    n = g.dim
    _, radius = reduced_radius(g)
    try:
        cands = enumerate_short_vectors(g, radius, max_count=None)
    except BudgetExceeded as exc:
        raise SelectionFailure(str(exc)) from exc
    vectors = [v for v, _ in cands]
    rows = greedy_independent(vectors[:max_count], n, ring_invertible)
    if len(rows) < n:
        rows = greedy_independent(vectors, n, ring_invertible)
    if len(rows) < n:
        raise SelectionFailure("no full-rank candidate set found")
    return np.array(rows, dtype=np.int64)


# --------------------------------------------------------------------------
# modular linear algebra


def int_det(a) -> int:
    """Exact integer determinant (fraction-free Bareiss elimination)."""
    m = [[int(x) for x in row] for row in np.asarray(a)]
    n = len(m)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if m[i][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def int_adjugate(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=object)
    adj = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
            adj[j, i] = (-1) ** (i + j) * int_det(minor)
    return adj


def invert_mod_2k(a, sqrtM: int) -> np.ndarray:
    """Inverse of ``a`` over ``Z_sqrtM`` for ``sqrtM`` a power of two."""
    a = np.asarray(a, dtype=np.int64)
    det = int_det(a)
    if det % 2 == 0:
        raise NotInvertibleModM(f"determinant {det} is even")
    det_inv = pow(det % sqrtM, -1, sqrtM) if sqrtM > 1 else 0
    adj = int_adjugate(a)
    return np.array([[(int(x) * det_inv) % sqrtM for x in row] for row in adj], dtype=np.int64)


def solve_mod(a_inv, r, sqrtM: int) -> np.ndarray:
    return np.mod(np.asarray(a_inv, dtype=np.int64) @ np.asarray(r, dtype=np.int64), sqrtM)


# --------------------------------------------------------------------------
# decoders


def if_equations(
    heff,
    c: Constellation,
    P: float,
    nt: int,
    a=None,
    closed_form: str = "exact",
    ring_invertible: bool = True,
) -> IfEquations:
    """Choose ``A`` (unless given), compute ``B`` and the per-layer noise.

    At ``P = inf`` the IF Gram form collapses to zero, so selection uses the
    dual Gram ``(heff^T heff)^{-1}``, which gives the same ordering there.
    """
    heff = np.asarray(heff, dtype=float)
    if a is None:
        g = dual_gram(heff) if math.isinf(P) else if_gram(heff, c, P, nt, closed_form)
        a = if_select_A(g, c.sqrtM, ring_invertible=ring_invertible)
    a = np.asarray(a, dtype=np.int64)
    b = if_compute_B(heff, a, c, P, nt, closed_form)
    noise = np.array([layer_noise_power(a[m], b[m], heff, c, P, nt) for m in range(a.shape[0])])
    a_inv = invert_mod_2k(a, c.sqrtM) if ring_invertible else None
    return IfEquations(a=a, b=b, noise_powers=noise, a_inv=a_inv)


def if_decode(y: ReceivedVector, eq: IfEquations, c: Constellation) -> DecodeResult:
    """Round, reduce modulo ``sqrtM``, then solve ``A s = r`` over the ring."""
    yv = y.y if isinstance(y, ReceivedVector) else np.asarray(y, dtype=float)
    a_inv = eq.a_inv if eq.a_inv is not None else invert_mod_2k(eq.a, c.sqrtM)
    y_tilde = eq.b @ yv + eq.a @ np.full(eq.a.shape[1], c.offset)
    layer = round_half_away(y_tilde)
    r = np.mod(layer, c.sqrtM)
    return DecodeResult(s_hat=solve_mod(a_inv, r, c.sqrtM), layer_integers=layer, ok=True)


def _slice(yv, b, c: Constellation) -> DecodeResult:
    layer = round_half_away(b @ yv + c.offset)
    s_hat = np.clip(layer, 0, c.sqrtM - 1)
    return DecodeResult(s_hat=s_hat, layer_integers=layer, ok=bool(np.array_equal(s_hat, layer)))


def zf_decode(y: ReceivedVector, heff, c: Constellation) -> DecodeResult:
    yv = y.y if isinstance(y, ReceivedVector) else np.asarray(y, dtype=float)
    heff = np.asarray(heff, dtype=float)
    b = spd_solve(heff.T @ heff, heff.T)
    return _slice(yv, b, c)


def mmse_decode(y: ReceivedVector, heff, c: Constellation, P: float, nt: int, closed_form: str = "exact") -> DecodeResult:
    yv = y.y if isinstance(y, ReceivedVector) else np.asarray(y, dtype=float)
    b = if_compute_B(heff, np.eye(np.shape(heff)[1]), c, P, nt, closed_form)
    return _slice(yv, b, c)


def codebook(d: LinearDesign, c: Constellation) -> np.ndarray:
    size = c.sqrtM**d.n_real
    if size > ML_BUDGET:
        raise MlBudgetExceeded(f"codebook has {size} words, budget is {ML_BUDGET}")
    return np.array(list(iter_codebook(d, c)), dtype=np.int64).reshape(size, d.n_real)


def ml_decode(y_complex, h, d: LinearDesign, c: Constellation, P: float) -> DecodeResult:
    """Exhaustive search of ``||Y - sqrt(P/nt) H X(s)||_F`` over the codebook;
    ties go to the lexicographically first ``s``."""
    words = codebook(d, c)
    gamma = normalization_factor(d, c)
    x = gamma * d.codeword(words - c.offset)
    hx = np.einsum("ij,cjt->cit", np.asarray(h, dtype=complex), x)
    resid = np.asarray(y_complex, dtype=complex)[None] - math.sqrt(P / d.nt) * hx
    metric = np.sum(np.abs(resid) ** 2, axis=(1, 2))
    best = words[int(np.argmin(metric))]
    return DecodeResult(s_hat=best.copy(), layer_integers=best.copy(), ok=True)
