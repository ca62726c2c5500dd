"""Contour edit operations: shift, flatten, vibrato, ramp.

All edits act multiplicatively in the semitone (log) domain on voiced
frames only; unvoiced frames are never modified. Results falling outside
[40, 1500] Hz clamp to the bounds with a warning.

Script document (JSON): a list of
    {"op": "shift",   "range": [a, b], "semitones": s}
    {"op": "flatten", "range": [a, b], "lambda": l}            # l in [0, 1]
    {"op": "vibrato", "range": [a, b], "rate_hz": r, "depth_semitones": d}
    {"op": "ramp",    "range": [a, b], "start_semitones": s0, "end_semitones": s1}
applied in order. Ranges are half-open frame intervals.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .constants import F0_MAX_HZ, F0_MIN_HZ
from .f0 import F0Contour


class EditRangeError(ValueError):
    pass


@dataclass(frozen=True)
class ShiftEdit:
    semitones: float
    range: tuple[int, int]


@dataclass(frozen=True)
class FlattenEdit:
    lam: float
    range: tuple[int, int]

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise EditRangeError(f"flatten lambda must be in [0, 1], got {self.lam}")


@dataclass(frozen=True)
class VibratoEdit:
    rate_hz: float
    depth_semitones: float
    range: tuple[int, int]


@dataclass(frozen=True)
class RampEdit:
    start_semitones: float
    end_semitones: float
    range: tuple[int, int]


F0Edit = Union[ShiftEdit, FlattenEdit, VibratoEdit, RampEdit]


def parse_edit_script(doc: list) -> list[F0Edit]:
    if not isinstance(doc, list):
        raise EditRangeError("edit script must be a JSON list")
    edits: list[F0Edit] = []
    for i, raw in enumerate(doc):
        op = raw.get("op")
        rng = raw.get("range")
        if (not isinstance(rng, (list, tuple)) or len(rng) != 2
                or not all(isinstance(v, int) for v in rng)):
            raise EditRangeError(f"edits[{i}]: range must be [a, b] integers")
        rng = (rng[0], rng[1])
        if op == "shift":
            edits.append(ShiftEdit(float(raw["semitones"]), rng))
        elif op == "flatten":
            edits.append(FlattenEdit(float(raw["lambda"]), rng))
        elif op == "vibrato":
            edits.append(VibratoEdit(float(raw["rate_hz"]),
                                     float(raw["depth_semitones"]), rng))
        elif op == "ramp":
            edits.append(RampEdit(float(raw["start_semitones"]),
                                  float(raw["end_semitones"]), rng))
        else:
            raise EditRangeError(f"edits[{i}]: unknown op {op!r}")
    return edits


def _check_range(rng: tuple[int, int], n_frames: int) -> tuple[int, int]:
    a, b = rng
    if not (0 <= a < b <= n_frames):
        raise EditRangeError(
            f"range [{a}, {b}) invalid for contour of {n_frames} frames")
    return a, b


def _voiced_segments(mask: np.ndarray):
    """Yield (start, stop) of each contiguous voiced run."""
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    stops = np.concatenate([idx[breaks] + 1, [idx[-1] + 1]])
    for a, b in zip(starts, stops):
        yield int(a), int(b)


def apply_f0_edits(contour: F0Contour, edits: list[F0Edit]) -> F0Contour:
    values = contour.f0_hz.astype(np.float64, copy=True)
    frame_dt = contour.hop / contour.sample_rate
    for edit in edits:
        a, b = _check_range(edit.range, len(values))
        voiced = values > 0.0
        window = np.zeros_like(voiced)
        window[a:b] = True
        active = voiced & window
        if isinstance(edit, ShiftEdit):
            values[active] *= 2.0 ** (edit.semitones / 12.0)
        elif isinstance(edit, FlattenEdit):
            for s0, s1 in _voiced_segments(active):
                seg = values[s0:s1]
                mu = seg.mean()
                values[s0:s1] = mu + edit.lam * (seg - mu)
        elif isinstance(edit, VibratoEdit):
            t = (np.arange(a, b) - a) * frame_dt
            factor = 2.0 ** (edit.depth_semitones
                             * np.sin(2.0 * np.pi * edit.rate_hz * t) / 12.0)
            values[a:b] = np.where(active[a:b], values[a:b] * factor, values[a:b])
        elif isinstance(edit, RampEdit):
            offsets = np.linspace(edit.start_semitones, edit.end_semitones, b - a)
            factor = 2.0 ** (offsets / 12.0)
            values[a:b] = np.where(active[a:b], values[a:b] * factor, values[a:b])
        else:
            raise EditRangeError(f"unsupported edit {edit!r}")
        clipped = active & ((values < F0_MIN_HZ) | (values > F0_MAX_HZ))
        if clipped.any():
            warnings.warn(
                f"{int(clipped.sum())} edited frame(s) clamped to "
                f"[{F0_MIN_HZ:g}, {F0_MAX_HZ:g}] Hz", stacklevel=2)
            values[clipped] = np.clip(values[clipped], F0_MIN_HZ, F0_MAX_HZ)
    return F0Contour(values, sample_rate=contour.sample_rate, hop=contour.hop)
