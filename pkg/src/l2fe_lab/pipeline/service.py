"""Enroll / authenticate lifecycle, breach export and evaluation drivers."""

from __future__ import annotations

import logging
import math
import shutil
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from ..attack import (
    AttackReport,
    ReadoutModel,
    attack_asr,
    cosine_rows,
    fit_ridge,
    permuted_leakage,
    random_guess_asr,
    surrogate_vector,
)
from ..core import LabeledEmbedding, QuantizerConfig, derive_seed, first_per_user
from ..errors import DimensionMismatch, DuplicateUser, InvalidParameter, OutOfRange, UnknownUser, UnsupportedScheme
from ..schemes import (
    FacialFeParams,
    FacialFeScheme,
    L2feParams,
    L2feScheme,
    MrpParams,
    MrpScheme,
    ProtectedRecord,
)
from ..schemes.l2fe import FACENET_QUANT_SCALE, DEFAULT_DIM, DEFAULT_MODULUS, DEFAULT_SECRET_DIM
from .store import StoreFile

log = logging.getLogger(__name__)

DEFAULTS: dict[str, dict] = {
    "mrp": {"input_dim": 512, "output_dim": 128, "t": 0.6, "jl_eps": 0.5},
    "facialfe": {"dim": 512, "scale": 5.7, "lambda_bits": 768, "out_bits": 256},
    "l2fe": {
        "dim": DEFAULT_DIM,
        "secret_dim": DEFAULT_SECRET_DIM,
        "modulus": DEFAULT_MODULUS,
        "quant_min": -1.0,
        "quant_max": 1.0,
        "quant_scale": FACENET_QUANT_SCALE,
        "input_dim": 512,
        "projection_seed": 0,
        "key_bits": 256,
        "out_bits": 256,
        "reduce_basis": False,
    },
}


def build_scheme(name: str, overrides: dict | None = None):
    """Scheme object from defaults plus a (possibly partial) override dict."""
    if name not in DEFAULTS:
        raise UnsupportedScheme(f"unknown scheme {name!r}")
    cfg = dict(DEFAULTS[name])
    unknown = set(overrides or {}) - set(cfg) - {"threshold"}
    if unknown:
        raise InvalidParameter(f"unknown {name} options: {sorted(unknown)}")
    cfg.update(overrides or {})
    if name == "mrp":
        if "threshold" in cfg:
            p = MrpParams(int(cfg["input_dim"]), int(cfg["output_dim"]), float(cfg["threshold"]))
        else:
            p = MrpParams.from_tolerance(int(cfg["input_dim"]), int(cfg["output_dim"]), float(cfg["t"]), float(cfg["jl_eps"]))
        return MrpScheme(p)
    if name == "facialfe":
        return FacialFeScheme(
            FacialFeParams(int(cfg["dim"]), float(cfg["scale"]), int(cfg["lambda_bits"]), int(cfg["out_bits"]))
        )
    q = int(cfg["modulus"])
    return L2feScheme(
        L2feParams(
            dim=int(cfg["dim"]),
            secret_dim=int(cfg["secret_dim"]),
            modulus=q,
            quantizer=QuantizerConfig(float(cfg["quant_min"]), float(cfg["quant_max"]), q, float(cfg["quant_scale"])),
            key_bits=int(cfg["key_bits"]),
            out_bits=int(cfg["out_bits"]),
            input_dim=None if cfg["input_dim"] is None else int(cfg["input_dim"]),
            projection_seed=int(cfg["projection_seed"]),
            reduce_basis=bool(cfg["reduce_basis"]),
        )
    )


def scheme_input_dim(scheme) -> int:
    if isinstance(scheme, MrpScheme):
        return scheme.params.input_dim
    if isinstance(scheme, FacialFeScheme):
        return scheme.params.dim
    p = scheme.params
    return p.input_dim if p.input_dim is not None else p.dim


def new_store(scheme) -> StoreFile:
    return StoreFile(scheme=scheme.name, params=scheme.params_dict())


# --------------------------------------------------------------------------
# lifecycle


def user_rng(master_seed: int, user_id: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, "enroll/" + user_id))


def enroll(user_id: str, embedding, store: StoreFile, master_seed: int, path=None) -> ProtectedRecord:
    """Gen under the user's derived seed, then add (and optionally append) the record.

    Only the record is kept; the input and every Gen-internal secret go out
    of scope when this returns.
    """
    if user_id in store.records:
        raise DuplicateUser(f"user {user_id!r} is already enrolled")
    scheme = store.scheme_obj()
    payload = scheme.gen(embedding, user_rng(master_seed, user_id))
    rec = ProtectedRecord(user_id, scheme.name, payload)
    if path is None:
        store.add(rec)
    else:
        store.append(path, rec)
    return rec


def authenticate(user_id: str, probe, store: StoreFile, scheme=None) -> bool:
    rec = store.get(user_id)
    scheme = scheme or store.scheme_obj()
    try:
        out = scheme.rep(probe, rec.payload)
    except OutOfRange:
        # a probe the quantizer cannot represent cannot match the enrolled user
        return False
    return scheme.verify(rec.payload, out)


def breach_dump(store_path, out_path) -> None:
    """Full leakage: the persisted store, verbatim."""
    shutil.copyfile(store_path, out_path)


@dataclass
class ConfusionCounts:
    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    @property
    def tpr(self) -> float:
        pos = self.tp + self.fn
        return self.tp / pos if pos else math.nan

    @property
    def fpr(self) -> float:
        neg = self.fp + self.tn
        return self.fp / neg if neg else math.nan

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tpr"] = self.tpr
        d["fpr"] = self.fpr
        return d


def eval_accuracy(pairs: Sequence[tuple], store: StoreFile) -> ConfusionCounts:
    scheme = store.scheme_obj()
    cc = ConfusionCounts()
    for probe, user_id, same in pairs:
        ok = authenticate(user_id, probe, store, scheme)
        if same:
            cc.tp += ok
            cc.fn += not ok
        else:
            cc.fp += ok
            cc.tn += not ok
    return cc


def make_eval_pairs(dataset: Sequence[LabeledEmbedding]) -> list[tuple[np.ndarray, str, bool]]:
    """Positive pair: a user's second sample vs their enrollment.  Negative: the next user's second sample."""
    by_user: dict[str, list[np.ndarray]] = {}
    for row in dataset:
        by_user.setdefault(row.user_id, []).append(row.embedding)
    users = [u for u, v in by_user.items() if len(v) >= 2]
    if len(users) < 2:
        raise InvalidParameter("need at least two users with two samples each")
    pos = [(by_user[u][1], u, True) for u in users]
    neg = [(by_user[users[(i + 1) % len(users)]][1], u, False) for i, u in enumerate(users)]
    return pos + neg


# --------------------------------------------------------------------------
# attack drivers


def fit_public_readout(scheme, public: Sequence[LabeledEmbedding], seed: int, ridge: float = 1.0) -> ReadoutModel | None:
    """Attacker-side readout: run Gen on public embeddings and regress embeddings on surrogates.

    MRP needs none (``R^+ y`` already lives on the embedding scale), so it
    returns ``None``.
    """
    if isinstance(scheme, MrpScheme):
        return None
    X, Y = [], []
    for i, row in enumerate(public):
        rng = np.random.default_rng(derive_seed(seed, f"public/{i}/{row.user_id}"))
        X.append(surrogate_vector(scheme.gen(row.embedding, rng)))
        Y.append(row.embedding)
    # centering keeps the readout from spending its budget on the mean embedding
    return fit_ridge(np.stack(X), np.stack(Y), ridge, center=True)


def reconstruct(store: StoreFile, readout: ReadoutModel | None) -> dict[str, np.ndarray]:
    out = {}
    for uid, rec in store.records.items():
        s = surrogate_vector(rec.payload)
        out[uid] = s if readout is None else readout.predict(s)
    return out


def _aligned(recon: dict[str, np.ndarray], originals: Sequence[LabeledEmbedding]):
    orig = {row.user_id: row.embedding for row in first_per_user(originals)}
    missing = [u for u in recon if u not in orig]
    if missing:
        raise UnknownUser(f"no original embedding for {missing[:3]}")
    uids = list(recon)
    R = np.stack([recon[u] for u in uids])
    O = np.stack([orig[u] for u in uids])
    if R.shape != O.shape:
        raise DimensionMismatch(f"reconstructions {R.shape[1:]} vs originals {O.shape[1:]}")
    return uids, R, O


def attack_report(
    recon: dict[str, np.ndarray],
    originals: Sequence[LabeledEmbedding],
    t: float,
    baseline_trials: int = 100,
    seed: int = 0,
) -> AttackReport:
    uids, R, O = _aligned(recon, originals)
    rep = attack_asr(list(R), list(O), t, user_ids=uids)
    users = first_per_user(originals)
    if len(users) >= 2:
        rep.baseline_asr_mean, rep.baseline_asr_sd = random_guess_asr(users, t, baseline_trials, seed)
    return rep


@dataclass
class LeakageReport:
    scheme: str
    users: int
    cosine_mean: float
    cosine_sd: float
    permuted_mean: float
    readout: str

    def to_dict(self) -> dict:
        return asdict(self)


def leakage_report(store: StoreFile, readout, originals: Sequence[LabeledEmbedding], seed: int = 0) -> LeakageReport:
    uids, R, O = _aligned(reconstruct(store, readout), originals)
    cos = cosine_rows(R, O)
    return LeakageReport(
        scheme=store.scheme,
        users=len(uids),
        cosine_mean=float(cos.mean()),
        cosine_sd=float(cos.std(ddof=1)) if len(cos) > 1 else 0.0,
        permuted_mean=permuted_leakage(R, O, seed),
        readout="none" if readout is None else f"ridge({readout.ridge:g})",
    )
