"""Checkpoint serialization.

Layout (all integers little-endian):

    magic   b"SVSCKPT"
    u32     format version (currently 1)
    u64     training step
    u32     rng-state length, then that many opaque bytes
    u32     config length, then that many bytes of JSON
    u32     record count
    records u32 name length, name utf-8,
            u32 ndim, ndim * u32 dims,
            float32 data (row-major)
    u32     CRC32 over all preceding bytes

Loading verifies magic, version and CRC before returning any state; a bad
file never yields a partial checkpoint.
"""

from __future__ import annotations

import io
import json
import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

MAGIC = b"SVSCKPT"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    """Base error for checkpoint IO."""


class CheckpointFormatError(CheckpointError):
    """Corrupt header, bad CRC, or truncated file."""


class CheckpointVersionError(CheckpointError):
    """File written by an incompatible format version."""


@dataclass
class Checkpoint:
    format_version: int = FORMAT_VERSION
    params: dict[str, np.ndarray] = field(default_factory=dict)
    training_step: int = 0
    rng_state: bytes = b""
    config: dict = field(default_factory=dict)


def _pack_bytes(buf: io.BytesIO, payload: bytes) -> None:
    buf.write(struct.pack("<I", len(payload)))
    buf.write(payload)


def save_checkpoint(path, ckpt: Checkpoint) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<I", ckpt.format_version))
    buf.write(struct.pack("<Q", ckpt.training_step))
    _pack_bytes(buf, ckpt.rng_state)
    _pack_bytes(buf, json.dumps(ckpt.config, sort_keys=True).encode("utf-8"))
    buf.write(struct.pack("<I", len(ckpt.params)))
    for name, arr in ckpt.params.items():
        arr = np.ascontiguousarray(arr, dtype=np.float32)
        _pack_bytes(buf, name.encode("utf-8"))
        buf.write(struct.pack("<I", arr.ndim))
        for dim in arr.shape:
            buf.write(struct.pack("<I", dim))
        buf.write(arr.astype("<f4").tobytes())
    body = buf.getvalue()
    crc = zlib.crc32(body) & 0xFFFFFFFF
    with open(path, "wb") as f:
        f.write(body)
        f.write(struct.pack("<I", crc))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise CheckpointFormatError("truncated checkpoint file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < len(MAGIC) + 8:
        raise CheckpointFormatError("file too short to be a checkpoint")
    body, (crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) & 0xFFFFFFFF != crc:
        raise CheckpointFormatError("CRC mismatch: checkpoint is corrupt")
    r = _Reader(body)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointFormatError("bad magic bytes: not a checkpoint file")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint format version {version}, reader supports {FORMAT_VERSION}")
    step = r.u64()
    rng_state = r.take(r.u32())
    cfg_raw = r.take(r.u32())
    config = json.loads(cfg_raw.decode("utf-8")) if cfg_raw else {}
    n_records = r.u32()
    params: dict[str, np.ndarray] = {}
    for _ in range(n_records):
        name = r.take(r.u32()).decode("utf-8")
        ndim = r.u32()
        shape = tuple(r.u32() for _ in range(ndim))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        data = np.frombuffer(r.take(count * 4), dtype="<f4").reshape(shape)
        params[name] = np.array(data, dtype=np.float32)
    if r.pos != len(body):
        raise CheckpointFormatError("trailing bytes after last record")
    return Checkpoint(format_version=version, params=params,
                      training_step=step, rng_state=rng_state, config=config)
