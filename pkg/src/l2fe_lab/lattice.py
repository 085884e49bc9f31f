"""Lattice primitives: an E8 block decoder and Babai decoding of q-ary lattices.

Conventions
-----------
* Bases are ``m x m`` integer matrices whose **columns** generate the lattice.
* ``Lambda_q(A) = {A s mod q : s in Z_q^l} + q Z^m``.
* Babai rounding is half-away-from-zero so coefficient ties do not depend on
  the platform's rounding mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_embedding
from .errors import InvalidDimension, InvalidInput, NotInLattice, RankDeficient

# --------------------------------------------------------------------------
# E8


@dataclass(frozen=True)
class E8Point:
    """Point of E8 held as doubled integer coordinates (exact for half-integers)."""

    doubled: tuple[int, ...]

    @property
    def coords(self) -> np.ndarray:
        return np.asarray(self.doubled, dtype=np.float64) / 2.0

    def is_valid(self) -> bool:
        return is_e8_doubled(self.doubled)

    def __add__(self, other: "E8Point") -> "E8Point":
        return E8Point(tuple(a + b for a, b in zip(self.doubled, other.doubled)))


def is_e8_doubled(d) -> bool:
    d = [int(v) for v in d]
    if len(d) != 8:
        return False
    parity = {v % 2 for v in d}
    # integral or half-integral coordinates with an even sum  <=>  sum(2x) = 0 mod 4
    return len(parity) == 1 and sum(d) % 4 == 0


def _round_half_down(z: np.ndarray) -> np.ndarray:
    return np.ceil(z - 0.5)


def _decode_d8_rows(z: np.ndarray):
    """Nearest D8 point per row: round, then fix odd parity at the worst coordinate.

    Also returns a mask of rows where the nearest point is not unique.
    """
    f = _round_half_down(z)
    err = np.abs(z - f)
    odd = (f.sum(axis=1) % 2) != 0
    emax = err.max(axis=1)
    tie = np.where(odd, (err == emax[:, None]).sum(axis=1) > 1, emax == 0.5)
    if np.any(odd):
        rows = np.nonzero(odd)[0]
        k = np.argmax(err[rows], axis=1)
        zk = z[rows, k]
        fk = f[rows, k]
        f[rows, k] = np.where(zk > fk, fk + 1.0, fk - 1.0)
    return f, tie


_OFFSETS = np.array(np.meshgrid(*[[-1.0, 0.0, 1.0]] * 8, indexing="ij")).reshape(8, -1).T


def _nearest_e8_local(v: np.ndarray) -> np.ndarray:
    """Tie resolution by local exhaustive search: integer coset first, then lexicographic minimum."""
    best = None
    for shift in (0.0, 0.5):
        cand = np.rint(v - shift)[None, :] + _OFFSETS + shift
        cand = cand[np.mod(np.rint(cand.sum(axis=1) - 8 * shift), 2) == 0]
        d = np.sum((v - cand) ** 2, axis=1)
        dmin = d.min()
        if best is not None and best[0] <= dmin:
            continue
        ties = cand[d == dmin]
        order = np.lexsort(ties.T[::-1])
        best = (dmin, ties[order[0]])
    return best[1]


def decode_e8_rows(v: np.ndarray) -> np.ndarray:
    """Vectorised nearest-E8 decoding of a ``(k, 8)`` array.

    E8 = D8 u (D8 + 1/2); each row is decoded in both cosets and the closer
    candidate is kept.  Exact ties (measure zero, but reachable with
    dyadic inputs) go to the integer coset, then to the lexicographically
    smallest point.
    """
    a, tie_a = _decode_d8_rows(v)
    b, tie_b = _decode_d8_rows(v - 0.5)
    b += 0.5
    da = np.sum((v - a) ** 2, axis=1)
    db = np.sum((v - b) ** 2, axis=1)
    out = np.where((da <= db)[:, None], a, b)
    tie = np.where(da <= db, tie_a, tie_b)
    for i in np.nonzero(tie)[0]:
        out[i] = _nearest_e8_local(v[i])
    return out


def decode_e8_block(v) -> E8Point:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (8,):
        raise InvalidDimension(f"E8 block needs 8 coordinates, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise InvalidInput("E8 block contains non-finite values")
    p = decode_e8_rows(v[None, :])[0]
    return E8Point(tuple(int(t) for t in np.rint(2.0 * p)))


def decode_e8(v) -> np.ndarray:
    """Decode each consecutive 8-coordinate block to its nearest E8 point."""
    v = as_embedding(v)
    if v.shape[0] % 8:
        raise InvalidDimension(f"dimension {v.shape[0]} is not a multiple of 8")
    return decode_e8_rows(v.reshape(-1, 8)).reshape(-1)


# --------------------------------------------------------------------------
# modular arithmetic


def _matmul_mod(M: np.ndarray, v: np.ndarray, q: int) -> np.ndarray:
    inner = M.shape[-1]
    if (q - 1) ** 2 * inner < 2**62:
        return np.mod(M.astype(np.int64) @ v.astype(np.int64), q)
    return np.mod(M.astype(object) @ v.astype(object), q).astype(np.int64)


def _pivot_elimination(A: np.ndarray, q: int):
    """Column elimination mod ``q`` that selects ``l`` pivot rows of ``A``.

    Returns ``(pivot_rows, E, M)`` with ``A[pivot_rows] @ E = I`` and
    ``M = A @ E (mod q)``, so the non-pivot rows of ``M`` are ``A_bot A_top^{-1}``.
    """
    m, l = A.shape
    M = np.mod(A.astype(np.int64), q)
    E = np.eye(l, dtype=np.int64)
    used = np.zeros(m, dtype=bool)
    pivots = []
    for j in range(l):
        cand = np.nonzero((M[:, j] != 0) & ~used)[0]
        if cand.size == 0:
            raise RankDeficient(f"matrix has rank < {l} modulo {q}")
        p = int(cand[0])
        used[p] = True
        pivots.append(p)
        inv = pow(int(M[p, j]), -1, q)
        M[:, j] = (M[:, j] * inv) % q
        E[:, j] = (E[:, j] * inv) % q
        others = np.nonzero(M[p])[0]
        others = others[others != j]
        if others.size:
            f = M[p, others]
            M[:, others] = (M[:, others] - np.outer(M[:, j], f)) % q
            E[:, others] = (E[:, others] - np.outer(E[:, j], f)) % q
    return pivots, E, M


def matrix_rank_mod(A: np.ndarray, q: int) -> int:
    """Rank of ``A`` over ``Z_q`` (``q`` prime)."""
    M = np.mod(np.array(A, dtype=np.int64), q)
    rows, cols = M.shape
    r = 0
    for c in range(cols):
        piv = np.nonzero(M[r:, c])[0]
        if piv.size == 0:
            continue
        p = r + int(piv[0])
        M[[r, p]] = M[[p, r]]
        M[r] = (M[r] * pow(int(M[r, c]), -1, q)) % q
        others = np.nonzero(M[:, c])[0]
        others = others[others != r]
        if others.size:
            M[others] = (M[others] - np.outer(M[others, c], M[r])) % q
        r += 1
        if r == rows:
            break
    return r


# --------------------------------------------------------------------------
# q-ary basis


@dataclass(frozen=True, eq=False)
class QaryLatticeBasis:
    """Basis of ``Lambda_q(A)`` plus the pivot data for coefficient recovery.

    ``basis`` is expressed in the original coordinates.  Before any
    reduction, permuting its rows by ``permutation`` yields
    ``[[I_l, 0], [H, q I_{m-l}]]`` with ``H = A_bot A_top^{-1} mod q``.
    """

    basis: np.ndarray
    source_matrix: np.ndarray
    modulus: int
    pivot_rows: tuple[int, ...]
    permutation: tuple[int, ...]
    top_inverse: np.ndarray
    reduced: bool = False

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def rank(self) -> int:
        return len(self.pivot_rows)


def build_qary_basis(A, q: int, *, reduce: bool = False) -> QaryLatticeBasis:
    A = np.mod(np.asarray(A, dtype=np.int64), q)
    if A.ndim != 2:
        raise InvalidDimension("A must be a matrix")
    m, l = A.shape
    if not m > l:
        raise InvalidDimension(f"need m > l, got m={m}, l={l}")
    pivots, E, M = _pivot_elimination(A, q)
    rest = [i for i in range(m) if i not in set(pivots)]
    perm = pivots + rest
    H = M[rest]  # (m-l) x l
    Bp = np.zeros((m, m), dtype=np.int64)
    Bp[:l, :l] = np.eye(l, dtype=np.int64)
    Bp[l:, :l] = H
    Bp[l:, l:] = q * np.eye(m - l, dtype=np.int64)
    B = np.empty_like(Bp)
    B[perm, :] = Bp
    if reduce:
        B = lll_reduce(B)
    A.setflags(write=False)
    B.setflags(write=False)
    E.setflags(write=False)
    return QaryLatticeBasis(
        basis=B,
        source_matrix=A,
        modulus=q,
        pivot_rows=tuple(pivots),
        permutation=tuple(perm),
        top_inverse=E,
        reduced=reduce,
    )


def recover_coefficients(basis: QaryLatticeBasis, lattice_point) -> np.ndarray:
    """``s`` in ``Z_q^l`` with ``A s = lattice_point (mod q)``."""
    q = basis.modulus
    p = np.mod(np.asarray(lattice_point, dtype=np.int64), q)
    s = _matmul_mod(basis.top_inverse, p[list(basis.pivot_rows)], q)
    if np.any(_matmul_mod(basis.source_matrix, s, q) != p):
        raise NotInLattice("point is not congruent to A s mod q for any s")
    return s


def coefficients_from_top(basis: QaryLatticeBasis, lattice_point) -> np.ndarray:
    """Best-effort ``s`` from the pivot rows alone; never raises."""
    q = basis.modulus
    p = np.mod(np.asarray(lattice_point, dtype=np.int64), q)
    return _matmul_mod(basis.top_inverse, p[list(basis.pivot_rows)], q)


# --------------------------------------------------------------------------
# Gram-Schmidt and Babai


@dataclass(frozen=True, eq=False)
class GramSchmidtData:
    orthogonal_vectors: np.ndarray  # column i is b*_i
    mu: np.ndarray  # b_i = sum_j mu[i, j] b*_j, unit diagonal
    norms_sq: np.ndarray


RANK_TOL = 1e-9


def gram_schmidt(B) -> GramSchmidtData:
    """Unnormalised Gram-Schmidt of the columns of ``B``.

    Computed through a Householder QR factorisation, which yields the same
    ``b*_i`` and ``mu`` as the classical recursion with better rounding.
    """
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise InvalidDimension("Gram-Schmidt needs a square basis")
    Q, R = np.linalg.qr(B)
    d = np.diag(R).copy()
    scale = np.linalg.norm(B, axis=0).max() if B.size else 0.0
    if scale == 0 or np.any(np.abs(d) <= RANK_TOL * scale):
        raise RankDeficient("basis is rank deficient")
    Bstar = Q * d[None, :]
    mu = (R / d[:, None]).T
    for arr in (Bstar, mu):
        arr.setflags(write=False)
    norms = d * d
    norms.setflags(write=False)
    return GramSchmidtData(orthogonal_vectors=Bstar, mu=mu, norms_sq=norms)


def round_half_away(x):
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def babai_nearest_plane(basis, gs: GramSchmidtData, target):
    """Nearest-plane decoding; returns ``(lattice_point, coefficients)``.

    ``basis`` may be a :class:`QaryLatticeBasis` or a raw square matrix.
    The result is exact whenever ``|<e, b*_i>| < ||b*_i||^2 / 2`` for every
    ``i``, where ``e`` is the offset of ``target`` from a lattice point.
    """
    Bi = basis.basis if isinstance(basis, QaryLatticeBasis) else np.asarray(basis)
    B = Bi.astype(np.float64)
    m = B.shape[0]
    t = np.asarray(target, dtype=np.float64)
    if t.shape != (m,):
        raise InvalidDimension(f"target has shape {t.shape}, basis is {m}-dimensional")
    bstar = gs.orthogonal_vectors
    res = t.copy()
    coeffs = np.zeros(m, dtype=np.int64)
    for i in range(m - 1, -1, -1):
        c = round_half_away(np.dot(res, bstar[:, i]) / gs.norms_sq[i])
        if c:
            res -= c * B[:, i]
            coeffs[i] = int(c)
    point = Bi.astype(np.int64) @ coeffs
    return point, coeffs


def bnp_error_bound(gs: GramSchmidtData) -> float:
    """Radius ``min_i ||b*_i|| / 2``: any error of smaller norm decodes exactly."""
    return float(np.sqrt(gs.norms_sq.min()) / 2.0)


def in_success_region(gs: GramSchmidtData, error) -> bool:
    e = np.asarray(error, dtype=np.float64)
    proj = e @ gs.orthogonal_vectors
    return bool(np.all(np.abs(proj) < 0.5 * gs.norms_sq))


# --------------------------------------------------------------------------
# optional reduction


def lll_reduce(B, delta: float = 0.99) -> np.ndarray:
    """Textbook LLL on the columns of an integer basis.

    Intended for small dimensions (tens of columns); the Gram-Schmidt data is
    refreshed after each swap.
    """
    B = np.array(B, dtype=np.int64)
    n = B.shape[1]
    gs = gram_schmidt(B)
    mu = gs.mu.copy()
    norms = gs.norms_sq.copy()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            r = round_half_away(mu[k, j])
            if r:
                B[:, k] -= int(r) * B[:, j]
                mu[k, : j + 1] -= r * mu[j, : j + 1]
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            gs = gram_schmidt(B)
            mu = gs.mu.copy()
            norms = gs.norms_sq.copy()
            k = max(k - 1, 1)
    return B
