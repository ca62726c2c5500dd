"""Evaluation metrics: mel-cepstral distortion, f0 RMSE, voicing error.

MCD uses cepstral coefficients 1..13 from an orthonormal DCT-II of the
log-mel frames (c0, the frame energy, is excluded):

    MCD = mean_t (10 / ln 10) * sqrt(2 * sum_i (c_i - c'_i)^2)

No time alignment is performed; inputs must share the frame grid.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dct

from .dsp import Waveform, mel_analyze
from .f0 import F0Contour
from .mel import MelSpectrogram

MCD_COEFFS = 13


def _as_mel(x) -> MelSpectrogram:
    if isinstance(x, Waveform):
        return mel_analyze(x)
    if isinstance(x, MelSpectrogram):
        return x
    raise TypeError(f"expected MelSpectrogram or Waveform, got {type(x)!r}")


def mel_cepstra(mel: MelSpectrogram, n_coeffs: int = MCD_COEFFS) -> np.ndarray:
    """Coefficients 1..n of the orthonormal DCT-II of each log-mel frame."""
    c = dct(mel.frames.astype(np.float64), type=2, norm="ortho", axis=1)
    return c[:, 1:n_coeffs + 1]


def mcd(ref, est) -> float:
    ref_mel, est_mel = _as_mel(ref), _as_mel(est)
    if ref_mel.n_frames != est_mel.n_frames:
        raise ValueError(
            f"frame count mismatch: {ref_mel.n_frames} vs {est_mel.n_frames}")
    if ref_mel.n_mels != est_mel.n_mels:
        raise ValueError(
            f"band count mismatch: {ref_mel.n_mels} vs {est_mel.n_mels}")
    diff = mel_cepstra(ref_mel) - mel_cepstra(est_mel)
    per_frame = np.sqrt(2.0 * np.sum(diff * diff, axis=1))
    return float((10.0 / np.log(10.0)) * per_frame.mean())


def f0_rmse_vuv(ref: F0Contour, est: F0Contour) -> tuple[float, float]:
    """(RMSE in Hz over frames voiced in both, voicing disagreement in %)."""
    if ref.n_frames != est.n_frames:
        raise ValueError(
            f"frame count mismatch: {ref.n_frames} vs {est.n_frames}")
    ref_v, est_v = ref.voiced, est.voiced
    both = ref_v & est_v
    if both.any():
        err = ref.f0_hz[both] - est.f0_hz[both]
        rmse = float(np.sqrt(np.mean(err * err)))
    else:
        rmse = 0.0
    vuv = float(100.0 * np.mean(ref_v != est_v))
    return rmse, vuv
