"""E8 code-offset fuzzy extractor (secure sketch ``ss = c - x``)."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from ..core import as_embedding
from ..errors import DimensionMismatch, InvalidDimension, InvalidParameter
from ..hashing import keyed_hash, random_bits, real_bytes, verify_exact
from ..lattice import decode_e8
from .base import PAYLOAD_TAGS, Seed, as_rng

FACENET_SCALE = 5.7
ARCFACE_SCALE = 1.39


@dataclass(frozen=True)
class FacialFeParams:
    dim: int
    scale: float = FACENET_SCALE
    lambda_bits: int = 768
    out_bits: int = 256

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 8:
            raise InvalidDimension(f"Facial-FE dimension must be a positive multiple of 8, got {self.dim}")
        if self.lambda_bits <= self.dim:
            raise InvalidParameter("lambda_bits must exceed the input dimension (key is lambda - m bits)")
        if not self.scale > 0:
            raise InvalidParameter("scale must be positive")


@dataclass(frozen=True, eq=False)
class FacialFeRecord:
    sketch: np.ndarray  # ss, in scaled coordinates
    key: bytes
    extracted: bytes | None
    out_bits: int = 256


PAYLOAD_TAGS["FacialFeRecord"] = "facialfe"


def _hash_input(x_tilde: np.ndarray, ss: np.ndarray) -> bytes:
    return real_bytes(x_tilde) + real_bytes(ss)


def facialfe_gen(x, lambda_bits: int, seed: Seed, out_bits: int = 256):
    """Gen on an already-scaled input; returns ``(r, record)``."""
    x = as_embedding(x)
    m = x.shape[0]
    if m % 8:
        raise InvalidDimension(f"dimension {m} is not a multiple of 8")
    if lambda_bits <= m:
        raise InvalidParameter("lambda_bits must exceed the input dimension")
    rng = as_rng(seed)
    k = random_bits(rng, lambda_bits - m)
    c = decode_e8(x)
    ss = c - x
    # hash c - ss rather than x so Rep, which recomputes c* - ss, sees identical bytes
    r = keyed_hash(k, _hash_input(c - ss, ss), out_bits)
    return r, FacialFeRecord(sketch=ss, key=k, extracted=r, out_bits=out_bits)


def facialfe_rep(probe, record: FacialFeRecord) -> bytes:
    probe = as_embedding(probe)
    ss = record.sketch
    if probe.shape != ss.shape:
        raise DimensionMismatch(f"probe dimension {probe.shape[0]} != sketch dimension {ss.shape[0]}")
    c_star = decode_e8(probe + ss)
    x_tilde = c_star - ss
    return keyed_hash(record.key, _hash_input(x_tilde, ss), record.out_bits)


class FacialFeScheme:
    name = "facialfe"

    def __init__(self, params: FacialFeParams):
        self.params = params

    def _scaled(self, x) -> np.ndarray:
        x = as_embedding(x)
        if x.shape[0] != self.params.dim:
            raise DimensionMismatch(f"Facial-FE expects dimension {self.params.dim}, got {x.shape[0]}")
        return self.params.scale * x

    def gen(self, x, rng) -> FacialFeRecord:
        _, rec = facialfe_gen(self._scaled(x), self.params.lambda_bits, rng, self.params.out_bits)
        return rec

    def rep(self, probe, payload: FacialFeRecord) -> bytes:
        return facialfe_rep(self._scaled(probe), payload)

    def verify(self, payload: FacialFeRecord, output) -> bool:
        if payload.extracted is None or output is None:
            return False
        return verify_exact(payload.extracted, output)

    def output_of(self, payload: FacialFeRecord):
        return payload.extracted

    def with_output(self, payload: FacialFeRecord, output) -> FacialFeRecord:
        return dataclasses.replace(payload, extracted=output)

    def random_output(self, payload: FacialFeRecord, rng: np.random.Generator) -> bytes:
        return random_bits(rng, payload.out_bits)

    def params_dict(self) -> dict:
        return dataclasses.asdict(self.params)

    @classmethod
    def from_dict(cls, d: dict) -> "FacialFeScheme":
        return cls(
            FacialFeParams(
                dim=int(d["dim"]),
                scale=float(d.get("scale", FACENET_SCALE)),
                lambda_bits=int(d.get("lambda_bits", 768)),
                out_bits=int(d.get("out_bits", 256)),
            )
        )
