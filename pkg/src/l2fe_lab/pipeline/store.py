"""Line-delimited JSON store for protected records.

Line 1 is a header object; every further line is one record.  ``Z_q``
arrays are base64 of row-major little-endian ``uint32``; real vectors are
JSON arrays of decimal floats (``repr`` round-trips exactly); MRP's real
projection matrix is base64 of little-endian ``float64`` so a 128 x 512
matrix stays compact.  Objects are written with sorted keys and compact
separators, which makes write -> read -> write byte-identical.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DuplicateUser, InvalidInput, ParseError, UnknownUser, UnsupportedScheme
from ..schemes import FacialFeRecord, L2feRecord, MrpRecord, ProtectedRecord, scheme_from_dict

FORMAT = "l2fe-lab-store"
VERSION = 1
SEED_POLICY = "per-user seed = keyed BLAKE2b(master, user_id); master seed is not persisted"


def _b64(a: np.ndarray, dtype: str) -> str:
    return base64.b64encode(np.ascontiguousarray(a).astype(dtype).tobytes()).decode("ascii")


def _unb64(s: str, dtype: str, shape) -> np.ndarray:
    raw = base64.b64decode(s.encode("ascii"), validate=True)
    a = np.frombuffer(raw, dtype=dtype)
    if a.size != int(np.prod(shape)):
        raise InvalidInput(f"encoded array has {a.size} entries, expected shape {tuple(shape)}")
    return a.reshape(shape)


def _hex(b: bytes | None):
    return None if b is None else b.hex()


def _unhex(s):
    return None if s is None else bytes.fromhex(s)


def _floats(v) -> list[float]:
    return [float(x) for x in np.asarray(v, dtype=np.float64)]


def encode_payload(payload) -> dict:
    if isinstance(payload, MrpRecord):
        R = payload.projection
        return {
            "projected": None if payload.projected is None else _floats(payload.projected),
            "projection": _b64(R, "<f8"),
            "projection_shape": list(R.shape),
        }
    if isinstance(payload, FacialFeRecord):
        return {
            "sketch": _floats(payload.sketch),
            "key": _hex(payload.key),
            "extracted": _hex(payload.extracted),
            "out_bits": payload.out_bits,
        }
    if isinstance(payload, L2feRecord):
        return {
            "matrix": _b64(payload.matrix, "<u4"),
            "matrix_shape": list(payload.matrix.shape),
            "masked": _b64(payload.masked, "<u4"),
            "key": _hex(payload.key),
            "extracted": _hex(payload.extracted),
            "out_bits": payload.out_bits,
            "modulus": payload.modulus,
            "reduce_basis": payload.reduce_basis,
        }
    raise UnsupportedScheme(f"cannot encode {type(payload).__name__}")


def decode_payload(scheme: str, d: dict):
    if scheme == "mrp":
        R = _unb64(d["projection"], "<f8", d["projection_shape"]).astype(np.float64)
        y = None if d["projected"] is None else np.array(d["projected"], dtype=np.float64)
        return MrpRecord(projected=y, projection=R)
    if scheme == "facialfe":
        return FacialFeRecord(
            sketch=np.array(d["sketch"], dtype=np.float64),
            key=_unhex(d["key"]),
            extracted=_unhex(d["extracted"]),
            out_bits=int(d["out_bits"]),
        )
    if scheme == "l2fe":
        shape = d["matrix_shape"]
        return L2feRecord(
            matrix=_unb64(d["matrix"], "<u4", shape).astype(np.int64),
            masked=_unb64(d["masked"], "<u4", (shape[0],)).astype(np.int64),
            key=_unhex(d["key"]),
            extracted=_unhex(d["extracted"]),
            out_bits=int(d["out_bits"]),
            modulus=int(d["modulus"]),
            reduce_basis=bool(d["reduce_basis"]),
        )
    raise UnsupportedScheme(f"unknown scheme tag {scheme!r}")


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def encode_record(rec: ProtectedRecord) -> str:
    body = {"type": "record", "user_id": rec.user_id, "scheme": rec.scheme}
    body.update(encode_payload(rec.payload))
    return _dumps(body)


def decode_record(line: str, lineno: int = 0) -> ProtectedRecord:
    try:
        d = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
    if d.get("type") != "record":
        raise ParseError(lineno, "expected a record object")
    try:
        return ProtectedRecord(d["user_id"], d["scheme"], decode_payload(d["scheme"], d))
    except KeyError as exc:
        raise ParseError(lineno, f"missing field {exc.args[0]!r}") from None


@dataclass
class StoreFile:
    scheme: str
    params: dict
    records: dict[str, ProtectedRecord] = field(default_factory=dict)
    version: int = VERSION

    def header(self) -> dict:
        return {
            "type": "header",
            "format": FORMAT,
            "version": self.version,
            "scheme": self.scheme,
            "params": self.params,
            "seed_policy": SEED_POLICY,
        }

    def scheme_obj(self):
        return scheme_from_dict(self.scheme, self.params)

    def add(self, rec: ProtectedRecord) -> None:
        if rec.scheme != self.scheme:
            raise UnsupportedScheme(f"record scheme {rec.scheme!r} differs from store scheme {self.scheme!r}")
        if rec.user_id in self.records:
            raise DuplicateUser(f"user {rec.user_id!r} is already enrolled")
        self.records[rec.user_id] = rec

    def get(self, user_id: str) -> ProtectedRecord:
        try:
            return self.records[user_id]
        except KeyError:
            raise UnknownUser(f"user {user_id!r} is not enrolled") from None

    def dumps(self) -> str:
        lines = [_dumps(self.header())]
        lines += [encode_record(r) for r in self.records.values()]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8", newline="\n")

    def append(self, path, rec: ProtectedRecord) -> None:
        """Add ``rec`` and append its line to an existing store file (single writer)."""
        self.add(rec)
        with open(path, "a", encoding="utf-8", newline="\n") as fh:
            fh.write(encode_record(rec) + "\n")


def loads_store(text: str) -> StoreFile:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise ParseError(1, "empty store")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(1, f"invalid JSON: {exc.msg}") from None
    if head.get("type") != "header" or head.get("format") != FORMAT:
        raise ParseError(1, "not a store header")
    if head.get("version") != VERSION:
        raise ParseError(1, f"unsupported store version {head.get('version')!r}")
    store = StoreFile(scheme=head["scheme"], params=head["params"])
    for lineno, line in enumerate(lines[1:], start=2):
        store.add(decode_record(line, lineno))
    return store


def load_store(path) -> StoreFile:
    return loads_store(Path(path).read_text(encoding="utf-8"))
