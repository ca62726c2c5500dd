"""Per-frame fundamental-frequency contours.

Values are Hz on the global frame grid; exactly 0.0 marks an unvoiced
frame. Voiced values live in [40, 1500] Hz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import F0_MAX_HZ, F0_MIN_HZ, HOP_LENGTH, SAMPLE_RATE


class ContourError(ValueError):
    """Contour violates the f0 domain; message names the frame."""


@dataclass
class F0Contour:
    f0_hz: np.ndarray          # float64 [L], 0.0 = unvoiced
    sample_rate: int = SAMPLE_RATE
    hop: int = HOP_LENGTH

    def __post_init__(self):
        self.f0_hz = np.asarray(self.f0_hz, dtype=np.float64)
        if self.f0_hz.ndim != 1:
            raise ContourError(f"contour must be 1-D, got shape {self.f0_hz.shape}")

    @property
    def n_frames(self) -> int:
        return len(self.f0_hz)

    @property
    def voiced(self) -> np.ndarray:
        return self.f0_hz > 0.0

    def validate(self) -> None:
        bad = np.nonzero(~np.isfinite(self.f0_hz))[0]
        if bad.size:
            raise ContourError(f"non-finite f0 at frame {int(bad[0])}")
        neg = np.nonzero(self.f0_hz < 0.0)[0]
        if neg.size:
            raise ContourError(
                f"negative f0 {self.f0_hz[neg[0]]:.3f} Hz at frame {int(neg[0])}")
        voiced = self.voiced
        out = np.nonzero(voiced & ((self.f0_hz < F0_MIN_HZ) | (self.f0_hz > F0_MAX_HZ)))[0]
        if out.size:
            raise ContourError(
                f"voiced f0 {self.f0_hz[out[0]]:.3f} Hz at frame {int(out[0])} "
                f"outside [{F0_MIN_HZ:g}, {F0_MAX_HZ:g}] Hz")


def contour_to_dict(contour: F0Contour) -> dict:
    return {
        "sample_rate": contour.sample_rate,
        "hop": contour.hop,
        "f0_hz": [float(v) for v in contour.f0_hz],
    }


def contour_from_dict(doc: dict) -> F0Contour:
    try:
        values = doc["f0_hz"]
    except (KeyError, TypeError):
        raise ContourError("document missing f0_hz") from None
    contour = F0Contour(np.asarray(values, dtype=np.float64),
                        sample_rate=int(doc.get("sample_rate", SAMPLE_RATE)),
                        hop=int(doc.get("hop", HOP_LENGTH)))
    contour.validate()
    return contour
