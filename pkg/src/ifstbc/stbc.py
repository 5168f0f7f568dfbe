"""Linear dispersion designs, ring constellations and the NVS analyser."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .numerics import singular_values_batch

NVS_DEFAULT_BOUND = 3
_NVS_CHUNK = 20000


class DegenerateDesign(ValueError):
    pass


class SymbolRangeError(ValueError):
    pass


@dataclass(frozen=True)
class LinearDesign:
    """``X(s) = sum_k D_k s_k`` over ``2K`` real variables.

    ``weights`` has shape ``(2K, nt, T)``.
    """

    weights: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex)
        if w.ndim != 3:
            raise ValueError(f"weights must have shape (2K, nt, T), got {w.shape}")
        if w.shape[0] == 0 or w.shape[0] % 2:
            raise ValueError(f"need an even, positive number of weight matrices, got {w.shape[0]}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weight matrices have non-finite entries")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def nt(self) -> int:
        return self.weights.shape[1]

    @property
    def T(self) -> int:
        return self.weights.shape[2]

    @property
    def K(self) -> int:
        return self.weights.shape[0] // 2

    @property
    def n_real(self) -> int:
        return self.weights.shape[0]

    def codeword(self, s) -> np.ndarray:
        """Unshifted, unnormalised ``sum_k D_k s_k`` (also works on a stack of ``s``)."""
        return np.tensordot(np.asarray(s, dtype=float), self.weights, axes=([-1], [0]))


@dataclass(frozen=True)
class Constellation:
    """The ring ``Z_sqrtM`` shifted by ``(sqrtM - 1) / 2`` to zero mean."""

    sqrtM: int

    def __post_init__(self):
        m = int(self.sqrtM)
        if m < 2 or m & (m - 1):
            raise ValueError(f"sqrtM must be a power of two >= 2, got {self.sqrtM}")

    @property
    def offset(self) -> float:
        return (self.sqrtM - 1) / 2.0

    @property
    def Ebar(self) -> float:
        return (self.sqrtM**2 - 1) / 12.0

    @property
    def bits_per_symbol(self) -> int:
        return self.sqrtM.bit_length() - 1


@dataclass(frozen=True)
class Codeword:
    x: np.ndarray
    s: np.ndarray


def make_alamouti() -> LinearDesign:
    """``[[x1, x2], [-x2*, x1*]]`` with ``x1 = s1 + i s2``, ``x2 = s3 + i s4``."""
    w = np.zeros((4, 2, 2), dtype=complex)
    w[0] = [[1, 0], [0, 1]]
    w[1] = [[1j, 0], [0, -1j]]
    w[2] = [[0, 1], [-1, 0]]
    w[3] = [[0, 1j], [1j, 0]]
    return LinearDesign(w, name="alamouti")


def make_vblast(nt: int) -> LinearDesign:
    if nt < 1:
        raise ValueError("nt must be >= 1")
    w = np.zeros((2 * nt, nt, 1), dtype=complex)
    for j in range(nt):
        w[2 * j, j, 0] = 1
        w[2 * j + 1, j, 0] = 1j
    return LinearDesign(w, name=f"vblast{nt}")


def vec_rows(x) -> np.ndarray:
    """Row-stack ``[Re(X); Im(X)]`` into a real vector (works on stacks)."""
    x = np.asarray(x, dtype=complex)
    stacked = np.concatenate([x.real, x.imag], axis=-2)
    return stacked.reshape(*stacked.shape[:-2], -1)


def unvec_rows(v, rows: int, T: int) -> np.ndarray:
    """Inverse of :func:`vec_rows` for a ``rows x T`` complex matrix."""
    v = np.asarray(v, dtype=float).reshape(*np.shape(v)[:-1], 2 * rows, T)
    return v[..., :rows, :] + 1j * v[..., rows:, :]


def build_code_matrix(d: LinearDesign) -> np.ndarray:
    """The real ``2 nt T x 2K`` matrix whose column k is ``vec_rows(D_k)``."""
    return vec_rows(d.weights).T.copy()


def normalization_factor(d: LinearDesign, c: Constellation) -> float:
    """Scale ``gamma`` giving unit average energy per codeword entry.

    Symbols are independent and zero-mean after the shift, so the codebook
    average of ``|X_it|^2`` is ``Ebar * sum_k ||D_k||_F^2 / (nt T)`` exactly.
    """
    energy = c.Ebar * float(np.sum(np.abs(d.weights) ** 2)) / (d.nt * d.T)
    if energy <= 0:
        raise DegenerateDesign("design has all-zero weight matrices")
    return 1.0 / math.sqrt(energy)


def check_symbols(s, c: Constellation) -> np.ndarray:
    s = np.asarray(s)
    if not np.issubdtype(s.dtype, np.integer):
        if not np.all(np.equal(np.mod(s, 1), 0)):
            raise SymbolRangeError("ring symbols must be integers")
        s = s.astype(np.int64)
    if s.size and (s.min() < 0 or s.max() >= c.sqrtM):
        raise SymbolRangeError(f"ring symbols must lie in 0..{c.sqrtM - 1}")
    return s


def encode(d: LinearDesign, c: Constellation, s, gamma: float = 1.0) -> Codeword:
    s = check_symbols(s, c)
    if s.shape != (d.n_real,):
        raise ValueError(f"expected {d.n_real} symbols, got shape {s.shape}")
    x = gamma * d.codeword(s - c.offset)
    return Codeword(x=x, s=s)


def iter_codebook(d: LinearDesign, c: Constellation):
    """All ring symbol vectors in lexicographic order."""
    return itertools.product(range(c.sqrtM), repeat=d.n_real)


# --------------------------------------------------------------------------
# NVS analysis


def nvs_search(d: LinearDesign, coeff_bound: int = NVS_DEFAULT_BOUND, mode: str = "full") -> tuple[float, np.ndarray]:
    """Minimum singular value over nonzero integer coefficients in a box.

    ``mode="full"`` minimises ``sigma_nt(X(s))``; ``mode="nonzero"`` minimises
    the smallest strictly positive singular value. The box result is an upper
    bound on the infimum over the infinite code. Returns the value and the
    first minimising coefficient vector (sign-canonical, lexicographic scan).
    """
    if coeff_bound < 1:
        raise ValueError("coeff_bound must be >= 1")
    if mode not in ("full", "nonzero"):
        raise ValueError(f"unknown mode {mode!r}")
    n = d.n_real
    side = 2 * coeff_bound + 1
    total = side**n
    best = math.inf
    best_s = None
    # linear index -> coefficients; the upper half of the box is the sign mirror
    for start in range(total // 2 + 1, total, _NVS_CHUNK):
        idx = np.arange(start, min(start + _NVS_CHUNK, total))
        digits = (idx[:, None] // side ** np.arange(n - 1, -1, -1)) % side - coeff_bound
        sv = singular_values_batch(d.codeword(digits))
        if mode == "full":
            vals = sv[:, -1]
        else:
            fro = np.sqrt(np.sum(sv**2, axis=1))
            vals = np.where(sv > 1e-9 * fro[:, None], sv, np.inf).min(axis=1)
        i = int(np.argmin(vals))
        if vals[i] < best:
            best = float(vals[i])
            best_s = digits[i].astype(np.int64)
    return best, best_s


def nvs_sigma_min(d: LinearDesign, coeff_bound: int = NVS_DEFAULT_BOUND, mode: str = "full") -> float:
    return nvs_search(d, coeff_bound, mode)[0]


# --------------------------------------------------------------------------
# design files


def load_design(path) -> LinearDesign:
    """Read a design file.

    Format: whitespace-separated tokens, ``#`` starts a comment. First
    ``nt T K``, then ``2K`` matrices of ``nt x T`` entries in row-major
    order, each entry written ``re,im``.
    """
    path = Path(path)
    tokens = []
    for line in path.read_text().splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if len(tokens) < 3:
        raise ValueError(f"{path}: missing 'nt T K' header")
    nt, T, K = (int(t) for t in tokens[:3])
    entries = tokens[3:]
    expected = 2 * K * nt * T
    if len(entries) != expected:
        raise ValueError(f"{path}: expected {expected} 're,im' entries, found {len(entries)}")
    vals = []
    for tok in entries:
        re, im = tok.split(",")
        vals.append(complex(float(re), float(im)))
    w = np.array(vals, dtype=complex).reshape(2 * K, nt, T)
    return LinearDesign(w, name=path.stem)


def dump_design(d: LinearDesign) -> str:
    lines = [f"{d.nt} {d.T} {d.K}"]
    for k, w in enumerate(d.weights):
        lines.append(f"# D_{k + 1}")
        for row in w:
            lines.append(" ".join(f"{z.real:.17g},{z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def builtin_design(name: str, nt: int | None = None) -> LinearDesign:
    if name == "alamouti":
        return make_alamouti()
    if name.startswith("vblast"):
        n = name[len("vblast"):]
        return make_vblast(int(n) if n else (nt or 2))
    raise ValueError(f"unknown design {name!r}")
