"""Signal toolkit: mel analysis, phase-reconstruction vocoder, f0 extraction.

Analysis convention: center-padded STFT, Hann window 1024, hop 256, so a
signal of n samples yields floor(n/256)+1 frames with frame i centered at
sample i*256. The vocoder inverts the mel filterbank by clipped pseudo-
inverse and runs iterative phase reconstruction; f0 extraction is a
difference-function (cumulative-mean-normalized) pitch tracker with
parabolic refinement.
"""

from __future__ import annotations

import wave as wave_module
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import get_window

from .constants import (
    F0_MAX_HZ,
    F0_MIN_HZ,
    HOP_LENGTH,
    LOG_MEL_FLOOR,
    SAMPLE_RATE,
    WIN_LENGTH,
)
from .f0 import F0Contour
from .mel import MelSpectrogram

N_FFT = WIN_LENGTH


class AudioError(ValueError):
    pass


@dataclass
class Waveform:
    samples: np.ndarray  # float [n], in [-1, 1]
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise AudioError(f"waveform must be 1-D, got {self.samples.shape}")
        if not np.all(np.isfinite(self.samples)):
            raise AudioError("waveform contains non-finite samples")
        peak = np.abs(self.samples).max() if self.samples.size else 0.0
        if peak > 1.0 + 1e-6:
            raise AudioError(f"waveform peak {peak:.4f} exceeds [-1, 1]")

    def __len__(self) -> int:
        return len(self.samples)


def write_wav(path, w: Waveform) -> None:
    pcm = np.clip(np.round(w.samples * 32767.0), -32768, 32767).astype("<i2")
    with wave_module.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(w.sample_rate)
        f.writeframes(pcm.tobytes())


def read_wav(path) -> Waveform:
    with wave_module.open(str(path), "rb") as f:
        if f.getnchannels() != 1 or f.getsampwidth() != 2:
            raise AudioError(f"{path}: expected 16-bit mono PCM")
        rate = f.getframerate()
        pcm = np.frombuffer(f.readframes(f.getnframes()), dtype="<i2")
    return Waveform(pcm.astype(np.float64) / 32768.0, sample_rate=rate)


@lru_cache(maxsize=4)
def _hann(win: int) -> np.ndarray:
    return get_window("hann", win, fftbins=True).astype(np.float64)


def _frame_count(n_samples: int, hop: int = HOP_LENGTH) -> int:
    return n_samples // hop + 1


def stft(samples: np.ndarray, win: int = WIN_LENGTH,
         hop: int = HOP_LENGTH) -> np.ndarray:
    """Center-padded STFT -> complex [1 + win/2, frames]."""
    if len(samples) < win:
        raise AudioError(f"need at least {win} samples, got {len(samples)}")
    window = _hann(win)
    pad = win // 2
    padded = np.pad(samples.astype(np.float64), pad, mode="reflect")
    n_frames = _frame_count(len(samples), hop)
    spec = np.empty((win // 2 + 1, n_frames), dtype=np.complex128)
    for t in range(n_frames):
        seg = padded[t * hop:t * hop + win]
        spec[:, t] = np.fft.rfft(seg * window)
    return spec


def istft(spec: np.ndarray, length: int, win: int = WIN_LENGTH,
          hop: int = HOP_LENGTH) -> np.ndarray:
    """Windowed overlap-add inverse, trimmed to `length` samples."""
    window = _hann(win)
    n_frames = spec.shape[1]
    pad = win // 2
    total = (n_frames - 1) * hop + win
    acc = np.zeros(total)
    norm = np.zeros(total)
    wsq = window * window
    for t in range(n_frames):
        seg = np.fft.irfft(spec[:, t], n=win)
        acc[t * hop:t * hop + win] += seg * window
        norm[t * hop:t * hop + win] += wsq
    out = acc[pad:pad + length]
    scale = norm[pad:pad + length]
    return out / np.maximum(scale, 1e-10)


@lru_cache(maxsize=4)
def mel_filterbank(n_mels: int = 128, n_fft: int = N_FFT,
                   sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Triangular mel filterbank [n_mels, n_fft/2+1], peak-normalized.

    Mel scale 2595*log10(1 + f/700); band edges equally spaced on the mel
    axis from 0 Hz to Nyquist.
    """
    def to_mel(f):
        return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)

    def from_mel(m):
        return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)

    nyquist = sample_rate / 2.0
    mel_points = np.linspace(0.0, float(to_mel(nyquist)), n_mels + 2)
    hz_points = from_mel(mel_points)
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / sample_rate)
    fb = np.zeros((n_mels, len(freqs)))
    for m in range(n_mels):
        lo, center, hi = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        rising = (freqs - lo) / max(center - lo, 1e-9)
        falling = (hi - freqs) / max(hi - center, 1e-9)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def mel_band_edges(n_mels: int = 128,
                   sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Center frequencies in Hz of each mel band, [n_mels]."""
    def to_mel(f):
        return 2595.0 * np.log10(1.0 + f / 700.0)

    def from_mel(m):
        return 700.0 * (10.0 ** (m / 2595.0) - 1.0)

    mel_points = np.linspace(0.0, to_mel(sample_rate / 2.0), n_mels + 2)
    return from_mel(mel_points[1:-1])


def mel_analyze(w: Waveform, n_mels: int = 128) -> MelSpectrogram:
    """Waveform -> log-amplitude mel spectrogram with floor 1e-5."""
    spec = np.abs(stft(w.samples))
    fb = mel_filterbank(n_mels)
    mel_amp = fb @ spec
    frames = np.log(np.maximum(mel_amp, LOG_MEL_FLOOR)).T
    return MelSpectrogram(frames=frames.astype(np.float32),
                          sample_rate=w.sample_rate)


def vocode(mel: MelSpectrogram, iterations: int = 60) -> Waveform:
    """Mel -> waveform via clipped filterbank pseudo-inverse and iterative
    phase reconstruction. Output length is exactly (frames-1)*hop."""
    fb = mel_filterbank(mel.n_mels)
    inv = _fb_pinv(mel.n_mels)
    # cap at a huge-but-safe amplitude so degenerate inputs cannot overflow
    mel_amp = np.exp(np.minimum(mel.frames.astype(np.float64).T, 20.0))
    mel_amp[mel_amp <= LOG_MEL_FLOOR * 1.001] = 0.0  # silence floor stays silent
    mag = np.clip(inv @ mel_amp, 0.0, None)
    length = (mel.n_frames - 1) * mel.hop
    spec = mag.astype(np.complex128)
    y = istft(spec, length)
    for _ in range(max(0, iterations)):
        z = stft(y)
        z_mag = np.abs(z)
        phase = z / np.maximum(z_mag, 1e-12)
        y = istft(mag * phase, length)
    peak = np.abs(y).max() if y.size else 0.0
    if peak > 1.0:
        y = y / peak
    return Waveform(np.clip(y, -1.0, 1.0), sample_rate=mel.sample_rate)


@lru_cache(maxsize=4)
def _fb_pinv(n_mels: int) -> np.ndarray:
    return np.linalg.pinv(mel_filterbank(n_mels))


# f0 extraction: difference function with cumulative mean normalization.
_YIN_WINDOW = 1024
_YIN_THRESHOLD = 0.15


def extract_f0(w: Waveform, threshold: float = _YIN_THRESHOLD) -> F0Contour:
    """Per-frame pitch in [40, 1500] Hz; frames failing the periodicity
    threshold (or silent frames) are 0."""
    sr = w.sample_rate
    tau_min = max(2, int(np.ceil(sr / F0_MAX_HZ)))
    tau_max = int(sr / F0_MIN_HZ)
    window = _YIN_WINDOW
    span = window + tau_max
    half = span // 2
    n_frames = _frame_count(len(w.samples))
    padded = np.pad(w.samples.astype(np.float64), (half, span))
    out = np.zeros(n_frames, dtype=np.float64)
    for t in range(n_frames):
        seg = padded[t * HOP_LENGTH:t * HOP_LENGTH + span]
        f0 = _yin_frame(seg, window, tau_min, tau_max, threshold, sr)
        out[t] = f0
    return F0Contour(out, sample_rate=sr, hop=HOP_LENGTH)


def _yin_frame(seg: np.ndarray, window: int, tau_min: int, tau_max: int,
               threshold: float, sr: int) -> float:
    head = seg[:window]
    energy_head = float(head @ head)
    if energy_head < 1e-10:
        return 0.0
    # d[tau] = |head|^2 + |seg[tau:tau+W]|^2 - 2 * corr[tau]
    corr = np.correlate(seg, head, mode="valid")  # corr[tau], tau in [0, tau_max]
    sq = np.concatenate([[0.0], np.cumsum(seg * seg)])
    energies = sq[window:window + tau_max + 1] - sq[:tau_max + 1]
    diff = energy_head + energies - 2.0 * corr
    diff = np.maximum(diff, 0.0)
    # cumulative-mean normalization
    cmndf = np.ones(tau_max + 1)
    running = np.cumsum(diff[1:])
    nz = running > 0
    taus = np.arange(1, tau_max + 1, dtype=np.float64)
    cmndf[1:][nz] = diff[1:][nz] * taus[nz] / running[nz]

    tau = -1
    for candidate in range(tau_min, tau_max):
        if cmndf[candidate] < threshold:
            tau = candidate
            while tau + 1 <= tau_max and cmndf[tau + 1] < cmndf[tau]:
                tau += 1
            break
    if tau < 0:
        return 0.0
    tau_refined = _parabolic_min(cmndf, tau)
    f0 = sr / tau_refined
    return float(np.clip(f0, F0_MIN_HZ, F0_MAX_HZ))


def _parabolic_min(values: np.ndarray, i: int) -> float:
    if i <= 0 or i >= len(values) - 1:
        return float(i)
    a, b, c = values[i - 1], values[i], values[i + 1]
    denom = a - 2.0 * b + c
    if abs(denom) < 1e-12:
        return float(i)
    offset = 0.5 * (a - c) / denom
    return float(i + np.clip(offset, -0.5, 0.5))
