from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol, Union

import numpy as np

from ..errors import UnsupportedScheme

Seed = Union[int, np.random.Generator]


def as_rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(int(seed))


@dataclass(frozen=True, eq=False)
class ProtectedRecord:
    """Everything persisted for one enrolled user."""

    user_id: str
    scheme: str
    payload: Any

    def __post_init__(self):
        expected = PAYLOAD_TAGS.get(type(self.payload).__name__)
        if expected != self.scheme:
            raise UnsupportedScheme(
                f"payload {type(self.payload).__name__} does not match scheme tag {self.scheme!r}"
            )


# filled in by the scheme modules
PAYLOAD_TAGS: dict[str, str] = {}


class Scheme(Protocol):
    """Common Gen/Rep/Verify surface of every protection scheme."""

    name: str

    def gen(self, x, rng: np.random.Generator) -> Any: ...

    def rep(self, probe, payload) -> Any: ...

    def verify(self, payload, output) -> bool: ...

    def output_of(self, payload) -> Any: ...

    def with_output(self, payload, output) -> Any: ...

    def params_dict(self) -> dict: ...


def authenticate_payload(scheme: Scheme, probe, payload) -> bool:
    return scheme.verify(payload, scheme.rep(probe, payload))
