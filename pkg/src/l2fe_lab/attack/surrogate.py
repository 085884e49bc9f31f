"""Breach attack, first stage: turn a leaked record into a surrogate vector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..errors import DegenerateMatrix, InvalidInput, UnsupportedScheme
from ..schemes import FacialFeRecord, L2feRecord, MrpRecord, ProtectedRecord
from ..schemes.l2fe import centered_lift

COND_LIMIT = 1e12
SVD_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Surrogate:
    vector: np.ndarray
    source_scheme: str
    user_id: str

    def __post_init__(self):
        if not np.all(np.isfinite(self.vector)):
            raise InvalidInput("surrogate has non-finite entries")


def pseudo_inverse(R) -> np.ndarray:
    """Moore-Penrose inverse of a wide matrix.

    Uses ``R^T (R R^T)^{-1}`` when ``R R^T`` is well conditioned and falls
    back to a truncated SVD otherwise.
    """
    R = np.asarray(R, dtype=np.float64)
    if R.ndim != 2:
        raise InvalidInput("pseudo_inverse expects a matrix")
    if not np.any(R):
        raise DegenerateMatrix("all-zero matrix has no useful pseudo-inverse")
    n, m = R.shape
    if n <= m:
        G = R @ R.T
        if np.linalg.cond(G) <= COND_LIMIT:
            # R^T G^{-1} = (G^{-1} R)^T with G symmetric positive definite
            return linalg.cho_solve(linalg.cho_factor(G), R).T
    U, s, Vt = np.linalg.svd(R, full_matrices=False)
    keep = s > SVD_RTOL * s.max()
    return (Vt[keep].T / s[keep]) @ U[:, keep].T


def mrp_surrogate(payload: MrpRecord) -> np.ndarray:
    if payload.projected is None:
        raise InvalidInput("MRP surrogate needs the stored projection y")
    # record stores y = R x / sqrt(n); undo the scaling so R^+ y lands on x's scale
    n = payload.projection.shape[0]
    return pseudo_inverse(payload.projection) @ (payload.projected * np.sqrt(n))


def l2fe_features(payload: L2feRecord) -> np.ndarray:
    q = payload.modulus
    c = centered_lift(payload.masked, q) / q
    return np.concatenate([c, payload.matrix.reshape(-1) / q])


def surrogate_vector(payload) -> np.ndarray:
    if isinstance(payload, MrpRecord):
        return mrp_surrogate(payload)
    if isinstance(payload, FacialFeRecord):
        return np.array(payload.sketch, dtype=np.float64)
    if isinstance(payload, L2feRecord):
        return l2fe_features(payload)
    raise UnsupportedScheme(f"no surrogate rule for {type(payload).__name__}")


def pipe_surrogate(record: ProtectedRecord) -> Surrogate:
    return Surrogate(surrogate_vector(record.payload), record.scheme, record.user_id)
