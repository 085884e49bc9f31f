"""Vector plumbing shared by every scheme and attack.

Embeddings are plain 1-D ``float64`` numpy arrays; :func:`as_embedding`
is the single checkpoint that enforces finiteness.  All randomness is drawn
from explicit ``numpy.random.Generator`` objects or integer seeds.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidDimension,
    InvalidInput,
    InvalidParameter,
    InvalidSpec,
    OutOfRange,
    ParseError,
    ZeroNorm,
)


def as_embedding(values, dim: int | None = None) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInput(f"embedding must be one-dimensional, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InvalidInput("embedding contains non-finite values")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {x.shape[0]}")
    return x


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    r = math.isqrt(n)
    for p in range(3, r + 1, 2):
        if n % p == 0:
            return False
    return True


def derive_seed(master: int, label: str) -> int:
    """64-bit child seed: keyed BLAKE2b of ``label`` under the master seed."""
    key = int(master).to_bytes(8, "little", signed=False)
    digest = hashlib.blake2b(label.encode("utf-8"), key=key, digest_size=8).digest()
    return int.from_bytes(digest, "little")


# --------------------------------------------------------------------------
# quantization


@dataclass(frozen=True)
class QuantizerConfig:
    min: float
    max: float
    modulus: int
    scale: float = 1.0

    def __post_init__(self):
        if not self.min < self.max:
            raise InvalidParameter(f"quantizer needs min < max, got {self.min}, {self.max}")
        if not self.scale > 0:
            raise InvalidParameter("quantizer scale must be positive")
        if self.modulus <= 1:
            raise InvalidParameter("quantizer modulus must exceed 1")

    @property
    def levels(self) -> float:
        """Multiplier applied to the unit-normalised coordinate (``q * scale``)."""
        return self.modulus * self.scale

    @property
    def step(self) -> float:
        """Width of one quantization cell in input units."""
        return (self.max - self.min) / self.levels

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max, "modulus": self.modulus, "scale": self.scale}


def quantize(x, cfg: QuantizerConfig) -> np.ndarray:
    """Map a real embedding to ``Z_q`` by ``floor((x - min)/(max - min) * q * scale)``."""
    x = as_embedding(x)
    bad = np.nonzero((x < cfg.min) | (x > cfg.max))[0]
    if bad.size:
        i = int(bad[0])
        raise OutOfRange(i, float(x[i]), cfg.min, cfg.max)
    v = np.floor((x - cfg.min) / (cfg.max - cfg.min) * cfg.levels).astype(np.int64)
    return np.mod(v, cfg.modulus)


# --------------------------------------------------------------------------
# elementary geometry


def l2_distance(u, v) -> float:
    u = as_embedding(u)
    v = as_embedding(v)
    if u.shape != v.shape:
        raise DimensionMismatch(f"dimensions differ: {u.shape[0]} vs {v.shape[0]}")
    return float(np.linalg.norm(u - v))


def normalize(v) -> np.ndarray:
    v = as_embedding(v)
    n = np.linalg.norm(v)
    if n == 0:
        raise ZeroNorm("cannot normalise the zero vector")
    return v / n


def cosine(u, v) -> float:
    return float(np.dot(normalize(u), normalize(v)))


@lru_cache(maxsize=32)
def projection_matrix(in_dim: int, target_dim: int, seed: int) -> np.ndarray:
    """Gaussian ``target_dim x in_dim`` matrix scaled by ``1/sqrt(target_dim)`` (read-only).

    The generator is keyed by a domain-separated seed so the matrix never
    coincides with other draws (such as ball centers) made from the same
    integer seed.
    """
    rng = np.random.default_rng(derive_seed(seed, "projection"))
    P = rng.standard_normal((target_dim, in_dim)) / math.sqrt(target_dim)
    P.setflags(write=False)
    return P


def random_projection_reduce(x, target_dim: int, seed: int) -> np.ndarray:
    x = as_embedding(x)
    if not 0 < target_dim < x.shape[0]:
        raise InvalidDimension(f"target dimension {target_dim} must lie in (0, {x.shape[0]})")
    return projection_matrix(x.shape[0], target_dim, seed) @ x


# --------------------------------------------------------------------------
# the union-of-balls input model


@dataclass(frozen=True)
class LabeledEmbedding:
    user_id: str
    embedding: np.ndarray

    def __post_init__(self):
        if not self.user_id:
            raise InvalidInput("user_id must be non-empty")

    @property
    def dim(self) -> int:
        return int(self.embedding.shape[0])


def ball_label(index: int) -> str:
    return f"u{index:04d}"


@dataclass(frozen=True, eq=False)
class BallDistributionSpec:
    """Uniform distribution over ``len(centers)`` disjoint balls of radius ``radius``."""

    centers: np.ndarray
    radius: float
    bound: int
    seed: int = 0
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        c = np.asarray(self.centers, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] < 1:
            raise InvalidSpec("centers must be a non-empty (beta, m) array")
        object.__setattr__(self, "centers", c)
        if c.shape[1] % 2:
            raise InvalidSpec(f"dimension must be even, got {c.shape[1]}")
        if not self.radius > 0 or self.bound <= 0:
            raise InvalidSpec("radius and bound must be positive")
        if np.any(np.abs(c) > self.bound - self.radius):
            raise InvalidSpec("a center lies outside [-R+eps, R-eps]^m")
        if c.shape[0] > 1:
            sq = np.einsum("ij,ij->i", c, c)
            d2 = sq[:, None] + sq[None, :] - 2.0 * (c @ c.T)
            np.fill_diagonal(d2, np.inf)
            if d2.min() <= (2.0 * self.radius) ** 2:
                raise InvalidSpec("balls are not disjoint (some centers within 2*eps)")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(ball_label(i) for i in range(c.shape[0])))
        elif len(self.labels) != c.shape[0]:
            raise InvalidSpec("one label per center required")

    @property
    def dim(self) -> int:
        return int(self.centers.shape[1])

    @property
    def beta(self) -> int:
        return int(self.centers.shape[0])


def make_ball_distribution(
    beta: int,
    dim: int,
    radius: float,
    *,
    bound: int = 1,
    seed: int = 0,
    layout: str = "sphere",
    center_norm: float = 1.0,
) -> BallDistributionSpec:
    """Draw ``beta`` centers and wrap them in a validated spec.

    ``layout="sphere"`` puts centers uniformly on the sphere of radius
    ``center_norm`` (mimics normalised face embeddings); ``"box"`` draws them
    uniformly from ``[-R+eps, R-eps]^m``.
    """
    rng = np.random.default_rng(seed)
    if layout == "sphere":
        g = rng.standard_normal((beta, dim))
        centers = center_norm * g / np.linalg.norm(g, axis=1, keepdims=True)
    elif layout == "box":
        half = bound - radius
        centers = rng.uniform(-half, half, size=(beta, dim))
    else:
        raise InvalidParameter(f"unknown center layout {layout!r}")
    return BallDistributionSpec(centers=centers, radius=radius, bound=bound, seed=seed)


def sample_ball(center: np.ndarray, radius: float, rng: np.random.Generator, n: int = 1) -> np.ndarray:
    """``n`` points uniform in the ball; direction from a normalised Gaussian, radius ``eps*U^(1/m)``."""
    m = center.shape[0]
    g = rng.standard_normal((n, m))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random((n, 1)) ** (1.0 / m)
    return center[None, :] + g * r


def sample_c_epsilon(spec: BallDistributionSpec, per_ball: int) -> list[LabeledEmbedding]:
    if per_ball < 1:
        raise InvalidParameter("per_ball must be positive")
    # offset stream: the centers were drawn from default_rng(seed) itself
    rng = np.random.default_rng([spec.seed, 1])
    out = []
    for label, center in zip(spec.labels, spec.centers):
        for p in sample_ball(center, spec.radius, rng, per_ball):
            out.append(LabeledEmbedding(label, p))
    return out


def draw_from(spec: BallDistributionSpec, rng: np.random.Generator) -> tuple[int, np.ndarray]:
    """One draw from ``U(C_eps)``: balls have equal volume, so pick a ball uniformly."""
    i = int(rng.integers(spec.beta))
    return i, sample_ball(spec.centers[i], spec.radius, rng)[0]


# --------------------------------------------------------------------------
# CSV ingestion


def _header(dim: int) -> list[str]:
    return ["id"] + [f"v{i}" for i in range(dim)]


def dumps_embeddings(rows: Sequence[LabeledEmbedding], dim: int | None = None) -> str:
    if dim is None:
        if not rows:
            raise InvalidInput("dimension required to export an empty dataset")
        dim = rows[0].dim
    buf = io.StringIO()
    buf.write(",".join(_header(dim)) + "\n")
    for row in rows:
        if row.dim != dim:
            raise DimensionMismatch(f"user {row.user_id} has dimension {row.dim}, expected {dim}")
        if "," in row.user_id or "\n" in row.user_id:
            raise InvalidInput(f"user id {row.user_id!r} contains a separator")
        buf.write(row.user_id + "," + ",".join(repr(float(v)) for v in row.embedding) + "\n")
    return buf.getvalue()


def export_embeddings(rows: Sequence[LabeledEmbedding], path, dim: int | None = None) -> None:
    Path(path).write_text(dumps_embeddings(rows, dim), encoding="utf-8", newline="\n")


def parse_embeddings(text: str) -> list[LabeledEmbedding]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(1, "missing header")
    header = next(csv.reader([lines[0]]))
    if not header or header[0] != "id" or header[1:] != [f"v{i}" for i in range(len(header) - 1)]:
        raise ParseError(1, "header must be id,v0,v1,...")
    dim = len(header) - 1
    if dim == 0:
        raise ParseError(1, "header declares no coordinates")
    out = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != dim + 1:
            raise DimensionMismatch(f"line {lineno}: expected {dim} values, got {len(cells) - 1}")
        uid = cells[0]
        if not uid:
            raise ParseError(lineno, "empty id")
        try:
            vals = np.array([float(c) for c in cells[1:]], dtype=np.float64)
        except ValueError as exc:
            raise ParseError(lineno, str(exc)) from None
        if not np.all(np.isfinite(vals)):
            raise ParseError(lineno, "non-finite value")
        out.append(LabeledEmbedding(uid, vals))
    return out


def load_embeddings(path) -> list[LabeledEmbedding]:
    return parse_embeddings(Path(path).read_text(encoding="utf-8"))


def first_per_user(rows: Iterable[LabeledEmbedding]) -> list[LabeledEmbedding]:
    seen: set[str] = set()
    out = []
    for row in rows:
        if row.user_id not in seen:
            seen.add(row.user_id)
            out.append(row)
    return out
