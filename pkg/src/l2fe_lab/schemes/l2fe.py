"""Lattice fuzzy extractor over a random q-ary lattice, decoded with Babai.

Gen hides the secret lattice point ``A b`` under the quantized embedding
(``c = A b + x mod q``) and keeps only ``H_k(b)``.  Rep subtracts the
probe, lifts the result to centered representatives and asks the
nearest-plane decoder for the closest point of ``Lambda_q(A)``.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..core import QuantizerConfig, as_embedding, is_prime, projection_matrix, quantize
from ..errors import DimensionMismatch, InvalidParameter, NotInLattice
from ..hashing import keyed_hash, random_bits, verify_exact, zq_bytes
from ..lattice import (
    babai_nearest_plane,
    build_qary_basis,
    coefficients_from_top,
    gram_schmidt,
    matrix_rank_mod,
    recover_coefficients,
)
from .base import PAYLOAD_TAGS, Seed, as_rng

log = logging.getLogger(__name__)

DEFAULT_DIM = 180
DEFAULT_SECRET_DIM = 60
DEFAULT_MODULUS = 130003
FACENET_QUANT_SCALE = 0.0014
ARCFACE_QUANT_SCALE = 0.0017


@dataclass(frozen=True)
class L2feParams:
    dim: int
    secret_dim: int
    modulus: int
    quantizer: QuantizerConfig
    key_bits: int = 256
    out_bits: int = 256
    input_dim: int | None = None  # raw dimension before the Gaussian reduction, if any
    projection_seed: int = 0
    reduce_basis: bool = False

    def __post_init__(self):
        if not 0 < self.secret_dim < self.dim:
            raise InvalidParameter("need 0 < l < m")
        if not is_prime(self.modulus):
            raise InvalidParameter(f"modulus {self.modulus} is not prime")
        if self.modulus >= 2**32:
            raise InvalidParameter("modulus must fit in 32 bits")
        if self.quantizer.modulus != self.modulus:
            raise InvalidParameter("quantizer modulus differs from scheme modulus")
        if not 0 < self.out_bits <= 512:
            raise InvalidParameter("out_bits must lie in (0, 512]")
        if self.input_dim is not None and self.input_dim <= self.dim:
            raise InvalidParameter("input_dim must exceed dim when a reduction is configured")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["quantizer"] = self.quantizer.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "L2feParams":
        qd = d["quantizer"]
        return cls(
            dim=int(d["dim"]),
            secret_dim=int(d["secret_dim"]),
            modulus=int(d["modulus"]),
            quantizer=QuantizerConfig(float(qd["min"]), float(qd["max"]), int(qd["modulus"]), float(qd["scale"])),
            key_bits=int(d.get("key_bits", 256)),
            out_bits=int(d.get("out_bits", 256)),
            input_dim=None if d.get("input_dim") is None else int(d["input_dim"]),
            projection_seed=int(d.get("projection_seed", 0)),
            reduce_basis=bool(d.get("reduce_basis", False)),
        )


def default_params(quant_min: float, quant_max: float, scale: float = FACENET_QUANT_SCALE, **kw) -> L2feParams:
    """Default operating point ``m=180, l=60, q=130003``."""
    q = DEFAULT_MODULUS
    return L2feParams(
        dim=DEFAULT_DIM,
        secret_dim=DEFAULT_SECRET_DIM,
        modulus=q,
        quantizer=QuantizerConfig(quant_min, quant_max, q, scale),
        **kw,
    )


@dataclass(frozen=True, eq=False)
class L2feRecord:
    matrix: np.ndarray  # A, m x l over Z_q
    masked: np.ndarray  # c = A b + x mod q
    key: bytes
    extracted: bytes | None
    out_bits: int = 256
    modulus: int = DEFAULT_MODULUS
    reduce_basis: bool = field(default=False)


PAYLOAD_TAGS["L2feRecord"] = "l2fe"


def _sample_secret(rng: np.random.Generator, l: int, q: int) -> np.ndarray:
    return rng.integers(0, q, size=l, dtype=np.int64)


def _sample_matrix(rng: np.random.Generator, m: int, l: int, q: int) -> np.ndarray:
    while True:
        A = rng.integers(0, q, size=(m, l), dtype=np.int64)
        if matrix_rank_mod(A, q) == l:
            return A
        log.debug("resampling rank-deficient A")


def l2fe_gen(x_raw, params: L2feParams, seed: Seed):
    """Gen on an ``m``-dimensional real input; returns ``(r, record)``."""
    x_raw = as_embedding(x_raw)
    if x_raw.shape[0] != params.dim:
        raise DimensionMismatch(f"L2FE expects dimension {params.dim}, got {x_raw.shape[0]}")
    x = quantize(x_raw, params.quantizer)
    rng = as_rng(seed)
    m, l, q = params.dim, params.secret_dim, params.modulus
    A = _sample_matrix(rng, m, l, q)
    b = _sample_secret(rng, l, q)
    k = random_bits(rng, params.key_bits)
    Ab = np.mod(A @ b, q)
    c = np.mod(Ab + x, q)
    assert np.array_equal(np.mod(c - x, q), Ab)
    r = keyed_hash(k, zq_bytes(b), params.out_bits)
    del b, Ab, x
    rec = L2feRecord(
        matrix=A,
        masked=c,
        key=k,
        extracted=r,
        out_bits=params.out_bits,
        modulus=q,
        reduce_basis=params.reduce_basis,
    )
    return r, rec


def centered_lift(v, q: int) -> np.ndarray:
    """Representatives in ``(-q/2, q/2]``."""
    v = np.mod(np.asarray(v, dtype=np.int64), q)
    return np.where(v > q // 2, v - q, v)


@lru_cache(maxsize=64)
def _decoder_for(A_bytes: bytes, shape: tuple[int, int], q: int, reduce: bool):
    A = np.frombuffer(A_bytes, dtype=np.int64).reshape(shape)
    basis = build_qary_basis(A, q, reduce=reduce)
    return basis, gram_schmidt(basis.basis)


def decoder_for(record: L2feRecord):
    """``(QaryLatticeBasis, GramSchmidtData)`` for a record, memoised on ``A``."""
    A = np.ascontiguousarray(record.matrix, dtype=np.int64)
    return _decoder_for(A.tobytes(), A.shape, record.modulus, record.reduce_basis)


def decode_secret(beta, record: L2feRecord) -> np.ndarray:
    basis, gs = decoder_for(record)
    point, _ = babai_nearest_plane(basis, gs, centered_lift(beta, record.modulus))
    try:
        return recover_coefficients(basis, point)
    except NotInLattice:
        return coefficients_from_top(basis, point)


def l2fe_rep(probe_raw, record: L2feRecord, params: L2feParams) -> bytes:
    probe_raw = as_embedding(probe_raw)
    if probe_raw.shape[0] != params.dim:
        raise DimensionMismatch(f"L2FE expects dimension {params.dim}, got {probe_raw.shape[0]}")
    x_prime = quantize(probe_raw, params.quantizer)
    beta = np.mod(record.masked - x_prime, record.modulus)
    b_hat = decode_secret(beta, record)
    return keyed_hash(record.key, zq_bytes(b_hat), record.out_bits)


class L2feScheme:
    name = "l2fe"

    def __init__(self, params: L2feParams):
        self.params = params

    def prepare(self, x) -> np.ndarray:
        """Apply the configured dimension reduction (identity if none)."""
        x = as_embedding(x)
        p = self.params
        if p.input_dim is None:
            if x.shape[0] != p.dim:
                raise DimensionMismatch(f"L2FE expects dimension {p.dim}, got {x.shape[0]}")
            return x
        if x.shape[0] != p.input_dim:
            raise DimensionMismatch(f"L2FE expects raw dimension {p.input_dim}, got {x.shape[0]}")
        return projection_matrix(p.input_dim, p.dim, p.projection_seed) @ x

    def gen(self, x, rng) -> L2feRecord:
        _, rec = l2fe_gen(self.prepare(x), self.params, rng)
        return rec

    def rep(self, probe, payload: L2feRecord) -> bytes:
        return l2fe_rep(self.prepare(probe), payload, self.params)

    def verify(self, payload: L2feRecord, output) -> bool:
        if payload.extracted is None or output is None:
            return False
        return verify_exact(payload.extracted, output)

    def output_of(self, payload: L2feRecord):
        return payload.extracted

    def with_output(self, payload: L2feRecord, output) -> L2feRecord:
        return dataclasses.replace(payload, extracted=output)

    def random_output(self, payload: L2feRecord, rng: np.random.Generator) -> bytes:
        return random_bits(rng, payload.out_bits)

    def params_dict(self) -> dict:
        return self.params.to_dict()

    @classmethod
    def from_dict(cls, d: dict) -> "L2feScheme":
        return cls(L2feParams.from_dict(d))
