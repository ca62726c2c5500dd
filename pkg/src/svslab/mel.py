"""Mel spectrogram container and binary file format.

File layout: magic "SVSMEL1", u32 frame count, u32 band count, then
little-endian float32 data row-major (frames x bands).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .constants import HOP_LENGTH, N_MELS, SAMPLE_RATE, WIN_LENGTH

MEL_MAGIC = b"SVSMEL1"


class MelFileError(ValueError):
    pass


@dataclass
class MelSpectrogram:
    frames: np.ndarray  # float32 [L, n_mels], natural-log amplitude
    sample_rate: int = SAMPLE_RATE
    hop: int = HOP_LENGTH
    win: int = WIN_LENGTH

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2:
            raise ValueError(f"mel frames must be 2-D, got {self.frames.shape}")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("mel frames contain non-finite values")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_mels(self) -> int:
        return self.frames.shape[1]


def save_mel(path, mel: MelSpectrogram) -> None:
    with open(path, "wb") as f:
        f.write(MEL_MAGIC)
        f.write(struct.pack("<II", mel.n_frames, mel.n_mels))
        f.write(np.ascontiguousarray(mel.frames, dtype="<f4").tobytes())


def load_mel(path) -> MelSpectrogram:
    with open(path, "rb") as f:
        raw = f.read()
    head = len(MEL_MAGIC) + 8
    if len(raw) < head or raw[:len(MEL_MAGIC)] != MEL_MAGIC:
        raise MelFileError(f"{path}: not a mel file")
    n_frames, n_mels = struct.unpack("<II", raw[len(MEL_MAGIC):head])
    expected = head + n_frames * n_mels * 4
    if len(raw) != expected:
        raise MelFileError(f"{path}: expected {expected} bytes, got {len(raw)}")
    data = np.frombuffer(raw[head:], dtype="<f4").reshape(n_frames, n_mels)
    return MelSpectrogram(frames=np.array(data, dtype=np.float32))


def default_mel(frames: np.ndarray) -> MelSpectrogram:
    return MelSpectrogram(frames=frames)
