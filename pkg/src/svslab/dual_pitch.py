"""Dual-path pitch encoding.

Two structurally identical gated-conv encoders fill the same model slot:
one embeds quantized MIDI ids, the other reads a continuous f0 contour as
two channels (normalized log-f0 and a voiced flag). Training draws one path
per example with probability 1/2; inference picks the path explicitly, so a
contour extracted from a first render can be edited and fed back in.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import PITCH_VOCAB
from .f0 import ContourError, F0Contour
from .nn import ConvGLUStack, Embedding, Module, Tensor
from .nn import tensor as T


class PitchPath(enum.Enum):
    MIDI = "midi"
    F0 = "f0"


@dataclass
class PitchInput:
    """Pitch payload for one synthesis call: the quantized path reads the
    score's MIDI ids, the continuous path carries a contour."""

    path: PitchPath
    contour: Optional[F0Contour] = None


class MidiPitchEncoder(Module):
    def __init__(self, dim: int, rng: np.random.Generator, kernels=(5, 3)):
        self.embedding = Embedding(PITCH_VOCAB, dim, rng)
        self.stack = ConvGLUStack(dim, [dim] * len(kernels), kernels, rng)

    def forward(self, midi_ids) -> Tensor:
        """midi_ids: int sequence [L] (0-127 or the rest id) -> [d, L]."""
        emb = T.transpose(self.embedding.forward(midi_ids))
        return self.stack.forward(emb)

    def describe(self) -> dict:
        return self.stack.describe()


def featurize_contour(contour: F0Contour) -> np.ndarray:
    """Contour -> [2, L] float32: clamped log2(f0/440)/4 and a voiced flag."""
    f0 = contour.f0_hz
    if np.any(f0 < 0):
        bad = int(np.nonzero(f0 < 0)[0][0])
        raise ContourError(f"negative f0 at frame {bad}")
    voiced = f0 > 0
    feat = np.zeros((2, len(f0)), dtype=np.float32)
    if voiced.any():
        feat[0, voiced] = np.clip(np.log2(f0[voiced] / 440.0) / 4.0, -1.0, 1.0)
    feat[1, voiced] = 1.0
    return feat


class F0ContourEncoder(Module):
    """Same stack as the MIDI encoder; only the first layer's input differs."""

    def __init__(self, dim: int, rng: np.random.Generator, kernels=(5, 3)):
        self.stack = ConvGLUStack(2, [dim] * len(kernels), kernels, rng)

    def forward(self, contour: F0Contour) -> Tensor:
        feat = featurize_contour(contour)
        return self.stack.forward(Tensor(feat))

    def describe(self) -> dict:
        return self.stack.describe()


def select_path(mode: str, rng: np.random.Generator | None = None,
                forced: PitchPath | None = None) -> PitchPath:
    """Training draws MIDI/F0 with probability 1/2 each; inference is explicit."""
    if mode == "train":
        if rng is None:
            raise ValueError("training path selection requires an rng")
        return PitchPath.MIDI if rng.random() < 0.5 else PitchPath.F0
    if mode == "infer":
        if forced is None:
            raise ValueError("inference requires an explicit pitch path")
        return forced
    raise ValueError(f"mode must be 'train' or 'infer', got {mode!r}")
