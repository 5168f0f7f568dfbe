"""Small dense numerical kernels shared by the rest of the package.

Everything here works on plain numpy arrays in double precision. Matrices are
small (dimension <= 64, usually <= 8), so the algorithms favour robustness and
exactness of the integer bookkeeping over raw speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-12
LLL_DELTA = 0.99
ENUM_NODE_BUDGET = 10**7


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


class RankDeficient(np.linalg.LinAlgError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class NonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class GramLattice:
    """A lattice given only through its Gram matrix (row-vector convention)."""

    gram: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"Gram matrix must be square, got shape {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValueError("Gram matrix has non-finite entries")
        scale = max(float(np.abs(g).max()), 1e-300)
        if np.abs(g - g.T).max() > 1e-10 * scale:
            raise ValueError("Gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        if np.linalg.eigvalsh(g).min() < -1e-10 * max(np.trace(g), 1e-300):
            raise ValueError("Gram matrix is not positive semidefinite")
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    def norm2(self, d) -> float:
        d = np.asarray(d, dtype=float)
        return float(d @ self.gram @ d)


# --------------------------------------------------------------------------
# real/complex plumbing


def real_expand(h) -> np.ndarray:
    """Map a complex ``nr x nt`` matrix to the real ``2nr x 2nt`` block form
    ``[[Re, -Im], [Im, Re]]``. Works on stacks of matrices too."""
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def kron_identity_apply(hprime, T: int, x) -> np.ndarray:
    """Compute ``(hprime kron I_T) @ x`` without forming the Kronecker product.

    ``x`` is the row-stacked vectorisation of a ``(cols, T)`` matrix.
    """
    hprime = np.asarray(hprime, dtype=float)
    x = np.asarray(x, dtype=float)
    rows, cols = hprime.shape
    if x.shape != (cols * T,):
        raise ValueError(f"expected vector of length {cols * T}, got shape {x.shape}")
    return (hprime @ x.reshape(cols, T)).reshape(-1)


# --------------------------------------------------------------------------
# singular values


def _jacobi_column_norms(m: np.ndarray) -> np.ndarray:
    """One-sided Jacobi on a stack of real matrices ``(N, rows, cols)``.

    Rotates column pairs until they are mutually orthogonal; the final column
    norms are the singular values (unsorted, zeros when cols > rows).
    """
    m = np.array(m, dtype=float, copy=True)
    n_cols = m.shape[-1]
    fro2 = np.einsum("nij,nij->n", m, m)
    # pairs whose inner product is negligible against the whole matrix count
    # as orthogonal (null columns of rank-deficient input)
    floor = np.finfo(float).tiny + 1e-30 * fro2
    for _ in range(JACOBI_MAX_SWEEPS):
        rotated = False
        for p in range(n_cols - 1):
            for q in range(p + 1, n_cols):
                cp, cq = m[:, :, p], m[:, :, q]
                alpha = np.einsum("ni,ni->n", cp, cp)
                beta = np.einsum("ni,ni->n", cq, cq)
                gamma = np.einsum("ni,ni->n", cp, cq)
                active = (np.abs(gamma) > JACOBI_TOL * np.sqrt(alpha * beta)) & (np.abs(gamma) > floor)
                if not active.any():
                    continue
                rotated = True
                g = np.where(active, gamma, 1.0)
                zeta = (beta - alpha) / (2.0 * g)
                t = np.sign(zeta) / (np.abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                t = np.where(zeta == 0.0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c[:, None] * cp - s[:, None] * cq
                new_q = s[:, None] * cp + c[:, None] * cq
                m[:, :, p] = new_p
                m[:, :, q] = new_q
        if not rotated:
            return np.sqrt(np.einsum("nij,nij->nj", m, m))
    raise NonConvergence(f"Jacobi SVD did not converge in {JACOBI_MAX_SWEEPS} sweeps")


def singular_values_batch(x) -> np.ndarray:
    """Singular values of a stack of complex ``(N, nt, T)`` matrices.

    Returns an ``(N, nt)`` array sorted in descending order; when ``T < nt``
    the trailing ``nt - T`` values are zero.
    """
    x = np.asarray(x, dtype=complex)
    if x.ndim != 3 or x.shape[1] < 1 or x.shape[2] < 1:
        raise ValueError(f"expected a (N, nt, T) stack, got shape {x.shape}")
    N, nt, T = x.shape
    # put the short side in the columns; each singular value of X appears
    # twice in the real expansion
    m = np.swapaxes(real_expand(x), -1, -2) if T >= nt else real_expand(x)
    sv = np.sort(_jacobi_column_norms(m), axis=-1)[:, ::-1][:, ::2]
    if sv.shape[1] < nt:
        sv = np.concatenate([sv, np.zeros((N, nt - sv.shape[1]))], axis=1)
    return sv


def singular_values(x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {x.shape}")
    return singular_values_batch(x[None])[0]


# --------------------------------------------------------------------------
# linear solves


def spd_solve(m, rhs) -> np.ndarray:
    """Solve ``m @ X = rhs`` for symmetric positive definite ``m``."""
    m = np.asarray(m, dtype=float)
    try:
        factor = scipy.linalg.cho_factor(m, lower=True, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    return scipy.linalg.cho_solve(factor, np.asarray(rhs, dtype=float))


# --------------------------------------------------------------------------
# lattice reduction and enumeration


def _gram_schmidt(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = b.shape[0]
    bstar = np.zeros_like(b)
    mu = np.zeros((n, n))
    for i in range(n):
        v = b[i].copy()
        for j in range(i):
            denom = bstar[j] @ bstar[j]
            mu[i, j] = (b[i] @ bstar[j]) / denom
            v -= mu[i, j] * bstar[j]
        bstar[i] = v
    return bstar, mu


def lll_reduce(basis, delta: float = LLL_DELTA) -> tuple[np.ndarray, np.ndarray]:
    """LLL-reduce the rows of ``basis``.

    Returns ``(reduced, U)`` with ``reduced == U @ basis`` and ``U`` unimodular.
    """
    b = np.array(basis, dtype=float, copy=True)
    if b.ndim != 2 or b.shape[0] > b.shape[1]:
        raise ValueError(f"basis must be n x m with n <= m, got shape {b.shape}")
    n = b.shape[0]
    u = np.eye(n, dtype=np.int64)
    scale = max(float(np.abs(b).max()), 1e-300)
    if np.linalg.matrix_rank(b, tol=1e-12 * scale * max(b.shape)) < n:
        raise RankDeficient("basis rows are linearly dependent")

    bstar, mu = _gram_schmidt(b)
    norms = np.einsum("ij,ij->i", bstar, bstar)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                b[k] -= q * b[j]
                u[k] -= q * u[j]
                mu[k, :j] -= q * mu[j, :j]
                mu[k, j] -= q
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            u[[k, k - 1]] = u[[k - 1, k]]
            bstar, mu = _gram_schmidt(b)
            norms = np.einsum("ij,ij->i", bstar, bstar)
            if norms.min() <= 1e-24 * scale * scale:
                raise RankDeficient("basis became numerically singular during reduction")
            k = max(k - 1, 1)
    return b, u


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        return -v
    return v


def _gram_basis(gram: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Gram matrix is not positive definite") from exc


def enumerate_short_vectors(
    lat: GramLattice,
    radius2: float,
    max_count: int | None = None,
    node_budget: int = ENUM_NODE_BUDGET,
) -> list[tuple[np.ndarray, float]]:
    """All nonzero integer ``d`` with ``d G d^T <= radius2``, one per sign pair.

    Vectors are returned as ``(coeffs, norm2)`` in ascending norm, ties broken
    by descending lexicographic order of the sign-canonical coefficients
    (first nonzero entry positive). The search runs in an LLL-reduced basis
    with Schnorr-Euchner zig-zag ordering.
    """
    if radius2 <= 0:
        raise ValueError("radius2 must be positive")
    gram = lat.gram
    n = lat.dim
    basis = _gram_basis(gram)
    _, u = lll_reduce(basis)
    g_red = u @ gram @ u.T
    g_red = 0.5 * (g_red + g_red.T)

    # q(x) = sum_i diag[i] * (x_i + sum_{j>i} mu[i, j] x_j)^2
    r_up = _gram_basis(g_red).T
    diag = np.diag(r_up) ** 2
    mu = r_up / np.diag(r_up)[:, None]

    slack = radius2 * (1.0 + 1e-10) + 1e-300
    x = np.zeros(n, dtype=np.int64)
    found: dict[tuple[int, ...], None] = {}
    nodes = 0

    def descend(k: int, partial: float) -> None:
        nonlocal nodes
        center = -float(mu[k, k + 1 :] @ x[k + 1 :])
        rem = slack - partial
        if rem < 0:
            return
        half = math.sqrt(rem / diag[k])
        lo, hi = math.ceil(center - half), math.floor(center + half)
        if lo > hi:
            return
        # zig-zag outward from the nearest integer to the center
        start = min(max(round(center), lo), hi)
        order = [start]
        step = 1
        while len(order) < hi - lo + 1:
            for cand in (start + step, start - step) if center >= start else (start - step, start + step):
                if lo <= cand <= hi:
                    order.append(cand)
            step += 1
        for xi in order:
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded(f"enumeration exceeded {node_budget} nodes")
            x[k] = xi
            p = partial + diag[k] * (xi - center) ** 2
            if k == 0:
                if x.any():
                    d = _canonical_sign(x @ u)
                    found[tuple(int(v) for v in d)] = None
            else:
                descend(k - 1, p)
        x[k] = 0

    descend(n - 1, 0.0)

    out = []
    for key in found:
        d = np.array(key, dtype=np.int64)
        nrm = float(d @ gram @ d)
        if nrm <= radius2 * (1.0 + 1e-10):
            out.append((d, nrm))
    out.sort(key=lambda item: (item[1], tuple(-item[0])))
    if max_count is not None:
        out = out[:max_count]
    return out


def reduced_radius(lat: GramLattice) -> tuple[float, float]:
    """Squared norms of the first and the longest LLL-reduced basis vectors."""
    red, _ = lll_reduce(_gram_basis(lat.gram))
    norms = np.einsum("ij,ij->i", red, red)
    return float(norms[0]), float(norms.max())


def shortest_vector(lat: GramLattice) -> tuple[np.ndarray, float]:
    """Shortest nonzero lattice vector, searched inside the radius of the
    first LLL-reduced basis vector."""
    first, _ = reduced_radius(lat)
    return enumerate_short_vectors(lat, first, max_count=1)[0]


# --------------------------------------------------------------------------
# sampling


def sample_gaussian_matrix(rows: int, cols: int, seed=None, variance_per_real_dim: float = 0.5) -> np.ndarray:
    """i.i.d. circularly-symmetric complex Gaussian entries.

    ``seed`` may be an int, a ``SeedSequence`` or an existing ``Generator``;
    a Generator is consumed in place.
    """
    if variance_per_real_dim <= 0:
        raise ValueError("variance must be positive")
    rng = np.random.default_rng(seed)
    sd = math.sqrt(variance_per_real_dim)
    return sd * (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
