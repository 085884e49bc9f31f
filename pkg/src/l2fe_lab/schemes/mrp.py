"""Multispace random projection with closeness matching."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from ..core import as_embedding
from ..errors import DimensionMismatch, InvalidParameter
from .base import PAYLOAD_TAGS, Seed, as_rng


@dataclass(frozen=True)
class MrpParams:
    input_dim: int
    output_dim: int
    threshold: float

    def __post_init__(self):
        if not 0 < self.output_dim < self.input_dim:
            raise InvalidParameter("MRP needs 0 < n < m")
        if not self.threshold > 0:
            raise InvalidParameter("MRP threshold must be positive")

    @classmethod
    def from_tolerance(cls, input_dim: int, output_dim: int, t: float, eps: float) -> "MrpParams":
        """Threshold ``T = t * sqrt(1 + eps)``: the JL upper distortion applied to ``t``."""
        return cls(input_dim, output_dim, t * math.sqrt(1.0 + eps))


@dataclass(frozen=True, eq=False)
class MrpRecord:
    projected: np.ndarray  # y, length n
    projection: np.ndarray  # R, n x m


PAYLOAD_TAGS["MrpRecord"] = "mrp"


def _project(R: np.ndarray, x: np.ndarray) -> np.ndarray:
    return (R @ x) / math.sqrt(R.shape[0])


def mrp_gen(x, params: MrpParams, seed: Seed) -> MrpRecord:
    x = as_embedding(x)
    if x.shape[0] != params.input_dim:
        raise DimensionMismatch(f"MRP expects dimension {params.input_dim}, got {x.shape[0]}")
    rng = as_rng(seed)
    R = rng.standard_normal((params.output_dim, params.input_dim))
    return MrpRecord(projected=_project(R, x), projection=R)


def mrp_rep(probe, record: MrpRecord) -> np.ndarray:
    probe = as_embedding(probe)
    if probe.shape[0] != record.projection.shape[1]:
        raise DimensionMismatch("probe dimension does not match the stored projection")
    return _project(record.projection, probe)


def mrp_verify(stored: MrpRecord, probe, params: MrpParams) -> bool:
    y_prime = mrp_rep(probe, stored)
    return bool(np.linalg.norm(stored.projected - y_prime) <= params.threshold)


def jl_min_dimension(k: int, eps: float) -> int:
    """Smallest ``n >= 4 ln k / (eps^2/2 - eps^3/3)``."""
    if not 0 < eps < 1:
        raise InvalidParameter("eps must lie in (0, 1)")
    if k < 2:
        raise InvalidParameter("need at least two points")
    return math.ceil(4.0 * math.log(k) / (eps**2 / 2.0 - eps**3 / 3.0))


class MrpScheme:
    name = "mrp"

    def __init__(self, params: MrpParams):
        self.params = params

    def gen(self, x, rng) -> MrpRecord:
        return mrp_gen(x, self.params, rng)

    def rep(self, probe, payload: MrpRecord) -> np.ndarray:
        return mrp_rep(probe, payload)

    def verify(self, payload: MrpRecord, output) -> bool:
        if output is None or payload.projected is None:
            return False
        return bool(np.linalg.norm(payload.projected - output) <= self.params.threshold)

    def output_of(self, payload: MrpRecord):
        return payload.projected

    def with_output(self, payload: MrpRecord, output) -> MrpRecord:
        return dataclasses.replace(payload, projected=output)

    def random_output(self, payload: MrpRecord, rng: np.random.Generator):
        return rng.standard_normal(payload.projection.shape[0])

    def params_dict(self) -> dict:
        return dataclasses.asdict(self.params)

    @classmethod
    def from_dict(cls, d: dict) -> "MrpScheme":
        return cls(MrpParams(int(d["input_dim"]), int(d["output_dim"]), float(d["threshold"])))
