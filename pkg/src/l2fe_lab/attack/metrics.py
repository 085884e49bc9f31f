from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ..core import LabeledEmbedding, first_per_user
from ..errors import DimensionMismatch, InsufficientData, InvalidParameter, ZeroNorm

FACENET_THRESHOLD = 1.103


@dataclass
class AttackReport:
    asr: float
    flags: list[bool]
    user_ids: list[str] = field(default_factory=list)
    leakage_cosine_mean: float | None = None
    baseline_asr_mean: float | None = None
    baseline_asr_sd: float | None = None
    threshold: float | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _unit_rows(V) -> np.ndarray:
    V = np.atleast_2d(np.asarray(V, dtype=np.float64))
    n = np.linalg.norm(V, axis=1, keepdims=True)
    if np.any(n == 0):
        raise ZeroNorm("cannot normalise a zero embedding")
    return V / n


def cosine_rows(a, b) -> np.ndarray:
    return np.einsum("ij,ij->i", _unit_rows(a), _unit_rows(b))


def attack_asr(reconstructed: Sequence, originals: Sequence, t: float, user_ids=None) -> AttackReport:
    """Fraction of reconstructions within normalised ``l2`` distance ``t`` of the original."""
    if len(reconstructed) != len(originals):
        raise DimensionMismatch("reconstructed and originals differ in length")
    if len(originals) == 0:
        return AttackReport(asr=0.0, flags=[], user_ids=[], threshold=t)
    R = _unit_rows(reconstructed)
    O = _unit_rows(originals)
    if R.shape != O.shape:
        raise DimensionMismatch("embedding dimensions differ")
    d = np.linalg.norm(R - O, axis=1)
    flags = [bool(v) for v in d <= t]
    return AttackReport(
        asr=float(np.mean(flags)),
        flags=flags,
        user_ids=list(user_ids) if user_ids is not None else [],
        leakage_cosine_mean=float(np.mean(cosine_rows(R, O))),
        threshold=t,
    )


def leakage_cosine(predictions, originals) -> float:
    return float(np.mean(cosine_rows(predictions, originals)))


def permuted_leakage(predictions, originals, seed: int = 0) -> float:
    """Same statistic against randomly shuffled originals (the chance level)."""
    rng = np.random.default_rng(seed)
    O = np.atleast_2d(np.asarray(originals, dtype=np.float64))
    perm = rng.permutation(O.shape[0])
    return leakage_cosine(predictions, O[perm])


def random_guess_asr(dataset: Sequence[LabeledEmbedding], t: float, trials: int, seed: int):
    """Mean and sd over trials of the fraction of other users within ``t`` of a random target."""
    users = first_per_user(dataset)
    if len(users) < 2:
        raise InsufficientData("need at least two distinct users")
    if trials < 1:
        raise InvalidParameter("trials must be positive")
    U = _unit_rows(np.stack([u.embedding for u in users]))
    rng = np.random.default_rng(seed)
    rates = np.empty(trials)
    for i in range(trials):
        j = int(rng.integers(len(users)))
        d = np.linalg.norm(U - U[j], axis=1)
        d = np.delete(d, j)
        rates[i] = float(np.mean(d <= t))
    sd = float(rates.std(ddof=1)) if trials > 1 else 0.0
    return float(rates.mean()), sd
