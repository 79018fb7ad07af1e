"""Model container: a short text header followed by an npz payload.

    GERNER-MODEL <version>
    sha256 <hex digest of payload>
    length <payload bytes>
    <payload>
"""
from __future__ import annotations

import hashlib
import io
import json

import numpy as np

from .model import TaggerParams

MAGIC = b"GERNER-MODEL"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def dumps(params: TaggerParams) -> bytes:
    meta = {"words": params.words, "chars": params.chars, "labels": params.labels,
            "config": params.config}
    buf = io.BytesIO()
    arrays = {f"a_{k}": v for k, v in params.arrays.items()}
    arrays["meta"] = np.frombuffer(json.dumps(meta, ensure_ascii=False).encode("utf-8"), dtype=np.uint8)
    np.savez(buf, **arrays)
    payload = buf.getvalue()
    header = (MAGIC + b" %d\nsha256 %s\nlength %d\n"
              % (VERSION, hashlib.sha256(payload).hexdigest().encode(), len(payload)))
    return header + payload


def loads(data: bytes) -> TaggerParams:
    lines = data.split(b"\n", 3)
    if len(lines) < 4 or not lines[0].startswith(MAGIC + b" "):
        raise ModelFormatError("not a model file")
    try:
        version = int(lines[0][len(MAGIC) + 1:])
        digest = lines[1].split(b" ", 1)[1].decode()
        length = int(lines[2].split(b" ", 1)[1])
    except (IndexError, ValueError, UnicodeDecodeError):
        raise ModelFormatError("corrupt model header") from None
    if version != VERSION:
        raise ModelFormatError(f"unsupported model version {version} (expected {VERSION})")
    payload = lines[3]
    if len(payload) != length:
        raise ModelFormatError(f"truncated model file ({len(payload)} of {length} bytes)")
    if hashlib.sha256(payload).hexdigest() != digest:
        raise ModelFormatError("model checksum mismatch")
    with np.load(io.BytesIO(payload), allow_pickle=False) as npz:
        meta = json.loads(npz["meta"].tobytes().decode("utf-8"))
        arrays = {k[2:]: npz[k] for k in npz.files if k.startswith("a_")}
    return TaggerParams(arrays, meta["words"], meta["chars"], meta["labels"], meta["config"])


def save_model(params: TaggerParams, path):
    with open(path, "wb") as fh:
        fh.write(dumps(params))


def load_model(path) -> TaggerParams:
    with open(path, "rb") as fh:
        return loads(fh.read())
