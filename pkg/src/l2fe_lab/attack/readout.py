"""Ridge linear readout from surrogate vectors back to embeddings.

A desk-scale stand-in for a learned inversion model: the attacker fits
``W`` on public (surrogate, embedding) pairs and applies it to breached
surrogates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg

from ..errors import DimensionMismatch, InsufficientData, SingularSystem
from .surrogate import Surrogate


@dataclass(frozen=True, eq=False)
class ReadoutModel:
    weights: np.ndarray  # (surrogate_dim, embedding_dim); predict as s @ weights
    ridge: float
    x_mean: np.ndarray | None = None
    y_mean: np.ndarray | None = None

    def predict(self, surrogates) -> np.ndarray:
        S = np.atleast_2d(np.asarray(surrogates, dtype=np.float64))
        if S.shape[1] != self.weights.shape[0]:
            raise DimensionMismatch(f"readout expects {self.weights.shape[0]} features, got {S.shape[1]}")
        if self.x_mean is not None:
            S = S - self.x_mean
        out = S @ self.weights
        if self.y_mean is not None:
            out = out + self.y_mean
        return out[0] if np.ndim(surrogates) == 1 else out

    @property
    def matrix(self) -> np.ndarray:
        """``W`` in the column convention ``x ~ W x*``."""
        return self.weights.T


def fit_ridge(X: np.ndarray, Y: np.ndarray, ridge: float, center: bool = False) -> ReadoutModel:
    """Minimise ``||X W - Y||_F^2 + ridge ||W||_F^2`` via the normal equations.

    The primal system ``(X^T X + ridge I)`` is used when features do not
    outnumber samples; otherwise the equivalent dual form
    ``X^T (X X^T + ridge I)^{-1} Y`` keeps the solve at ``N x N``.
    With ``center`` both sides are mean-centred first (an unpenalised
    intercept).
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise DimensionMismatch("X and Y must be 2-D with matching row counts")
    n, d = X.shape
    if n < 2:
        raise InsufficientData("need at least two training pairs")
    x_mean = y_mean = None
    if center:
        x_mean, y_mean = X.mean(axis=0), Y.mean(axis=0)
        X, Y = X - x_mean, Y - y_mean
    dual = d > n and ridge > 0
    G = X @ X.T if dual else X.T @ X
    G = G + ridge * np.eye(G.shape[0])
    rhs = Y if dual else X.T @ Y
    try:
        factor = linalg.cho_factor(G)
    except linalg.LinAlgError:
        raise SingularSystem("normal matrix is singular; increase the ridge") from None
    diag = np.abs(np.diag(factor[0]))
    if diag.min() <= 1e-12 * diag.max():
        raise SingularSystem("normal matrix is numerically singular; increase the ridge")
    sol = linalg.cho_solve(factor, rhs)
    W = X.T @ sol if dual else sol
    return ReadoutModel(weights=W, ridge=ridge, x_mean=x_mean, y_mean=y_mean)


def linear_readout_fit(pairs: Sequence[tuple[Surrogate, np.ndarray]], ridge: float, center: bool = False) -> ReadoutModel:
    if len(pairs) < 2:
        raise InsufficientData("need at least two training pairs")
    X = np.stack([np.asarray(s.vector if isinstance(s, Surrogate) else s, dtype=np.float64) for s, _ in pairs])
    Y = np.stack([np.asarray(x, dtype=np.float64) for _, x in pairs])
    return fit_ridge(X, Y, ridge, center)
