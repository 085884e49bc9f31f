"""Search persisted artifacts for the bytes of Gen-internal secrets.

A "needle" is any encoding we might plausibly leak: little-endian uint32
and int64 bytes of ``b``, its decimal list, float64 bytes and ``repr`` of
the input coordinates, and the quantized input.  Base64 strings found in
JSON artifacts are decoded and searched too.
"""

from __future__ import annotations

import base64
import binascii
import json
from pathlib import Path

import numpy as np

import l2fe_lab.schemes.l2fe as l2fe_mod


def capture_secrets(monkeypatch) -> list[np.ndarray]:
    seen: list[np.ndarray] = []
    real = l2fe_mod._sample_secret

    def spy(rng, l, q):
        b = real(rng, l, q)
        seen.append(b.copy())
        return b

    monkeypatch.setattr(l2fe_mod, "_sample_secret", spy)
    return seen


def secret_needles(secrets) -> list[bytes]:
    out = []
    for b in secrets:
        b = np.asarray(b, dtype=np.int64)
        out += [b.astype("<u4").tobytes(), b.astype("<i8").tobytes()]
        out += [",".join(map(str, b)).encode(), ", ".join(map(str, b)).encode()]
    return out


def input_needles(inputs, quantized=()) -> list[bytes]:
    out = []
    for x in inputs:
        x = np.asarray(x, dtype=np.float64)
        out.append(x.tobytes())
        out += [repr(float(v)).encode() for v in x[:4] if v != 0.0]
    for xq in quantized:
        out.append(np.asarray(xq, dtype=np.int64).astype("<u4").tobytes())
    return out


def _strings(obj):
    if isinstance(obj, str):
        yield obj
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _strings(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _strings(v)


def haystacks(path) -> list[bytes]:
    raw = Path(path).read_bytes()
    out = [raw]
    for line in raw.decode("utf-8", errors="replace").splitlines():
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            continue
        for s in _strings(obj):
            if len(s) >= 16:
                try:
                    out.append(base64.b64decode(s, validate=True))
                except (binascii.Error, ValueError):
                    pass
    try:
        obj = json.loads(raw)
        out += [base64.b64decode(s, validate=True) for s in _strings(obj) if len(s) >= 16 and _is_b64(s)]
    except (json.JSONDecodeError, UnicodeDecodeError):
        pass
    return out


def _is_b64(s: str) -> bool:
    try:
        base64.b64decode(s, validate=True)
        return True
    except (binascii.Error, ValueError):
        return False


def find_leaks(paths, needles) -> list[tuple[str, int]]:
    hits = []
    for p in paths:
        for hay in haystacks(p):
            for i, n in enumerate(needles):
                if n and n in hay:
                    hits.append((str(p), i))
    return hits
