"""Keyed hashing and the canonical byte encodings fed to it.

Byte layout (bit-exact, documented in README):

* ``Z_q`` vectors: little-endian unsigned 32-bit integers.
* real vectors: each value rounded to a multiple of ``1e-6`` and written as
  a little-endian signed 64-bit integer count of micro-units.

``keyed_hash`` is keyed BLAKE2b-512 truncated to the requested number of
bits (most significant bits first, unused trailing bits zeroed).  Requests
above 512 bits are served by appending ``BLAKE2b(key, data || LE32(i))``
blocks for ``i = 1, 2, ...``; keys longer than 64 bytes are first
compressed with unkeyed BLAKE2b-512.
"""

from __future__ import annotations

import hashlib
import hmac

import numpy as np

from .errors import InvalidParameter

FIXED_POINT = 1_000_000
NATIVE_BITS = 512


def zq_bytes(v) -> bytes:
    a = np.asarray(v, dtype=np.int64)
    if a.size and (a.min() < 0 or a.max() >= 2**32):
        raise InvalidParameter("Z_q entries must fit in uint32")
    return a.astype("<u4").tobytes()


def real_bytes(v) -> bytes:
    a = np.asarray(v, dtype=np.float64)
    return np.rint(a * FIXED_POINT).astype("<i8").tobytes()


def _mask(raw: bytes, bits: int) -> bytes:
    nbytes = (bits + 7) // 8
    out = bytearray(raw[:nbytes])
    rem = bits % 8
    if rem:
        out[-1] &= (0xFF << (8 - rem)) & 0xFF
    return bytes(out)


def keyed_hash(key: bytes, data: bytes, out_bits: int = 256) -> bytes:
    if out_bits <= 0:
        raise InvalidParameter("out_bits must be positive")
    if len(key) > 64:
        key = hashlib.blake2b(key).digest()
    stream = hashlib.blake2b(data, key=key).digest()
    i = 1
    while len(stream) * 8 < out_bits:
        stream += hashlib.blake2b(data + i.to_bytes(4, "little"), key=key).digest()
        i += 1
    return _mask(stream, out_bits)


def verify_exact(r: bytes, r_prime: bytes) -> bool:
    """Constant-time equality; a length mismatch simply rejects."""
    if len(r) != len(r_prime):
        return False
    return hmac.compare_digest(r, r_prime)


def random_bits(rng: np.random.Generator, bits: int) -> bytes:
    return _mask(rng.bytes((bits + 7) // 8), bits)
