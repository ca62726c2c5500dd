"""Deterministic synthetic singing corpus.

Each song is a short random note sequence rendered by an additive harmonic
synthesizer: per-vowel formant envelopes with a per-singer timbre shift,
note-level f0 with bounded micro-deviation and optional vibrato, breath
noise in the gaps between phrases, and phrase-level loudness ramps. The
point is that breath and intensity structure actually exists in the audio
for the style tokens to discover, while every byte is reproducible from the
seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import HOP_LENGTH, SAMPLE_RATE
from .score import (
    FrameInputs,
    MusicScore,
    Note,
    PhonemeInventory,
    Syllable,
    expand_frames,
    midi_to_hz,
)

VOWELS = ("a", "e", "i", "o", "u")
ONSETS = ("b", "d", "g", "k", "l", "m", "n", "r", "s", "t")
CODAS = ("n", "m", "s", "t")

VOWEL_FORMANTS = {
    "a": (800.0, 1150.0),
    "e": (450.0, 1950.0),
    "i": (320.0, 2300.0),
    "o": (480.0, 900.0),
    "u": (350.0, 750.0),
}

_BREATH_MIN_GAP = 4
_VIBRATO_MIN_FRAMES = 14


@dataclass
class SyntheticSong:
    score: MusicScore
    wave: np.ndarray    # float32, (frames-1)*hop samples
    f0_hz: np.ndarray   # float64 [frames], 0 where unvoiced (gaps, breaths)

    @property
    def n_frames(self) -> int:
        return self.score.n_frames


def random_score(rng: np.random.Generator, n_singers: int = 4,
                 n_phrases: int | None = None) -> MusicScore:
    singer = int(rng.integers(n_singers))
    if n_phrases is None:
        n_phrases = 2 if rng.random() < 0.7 else 1
    base = int(rng.integers(57, 70))
    notes: list[Note] = []
    cursor = 0
    for phrase in range(n_phrases):
        if phrase > 0:
            cursor += int(rng.integers(_BREATH_MIN_GAP + 2, 10))
        for _ in range(int(rng.integers(2, 4))):
            pitch = int(np.clip(base + rng.integers(-5, 6), 48, 79))
            dur = int(rng.integers(9, 16))
            onset = str(rng.choice(ONSETS)) if rng.random() < 0.8 else None
            coda = str(rng.choice(CODAS)) if rng.random() < 0.2 else None
            vowel = str(rng.choice(VOWELS))
            notes.append(Note(pitch, cursor, dur, Syllable(onset, vowel, coda)))
            cursor += dur
    return MusicScore(singer_id=singer, notes=notes)


def random_scores(n: int, seed: int, n_singers: int = 4) -> list[MusicScore]:
    rng = np.random.default_rng(seed)
    return [random_score(rng, n_singers) for _ in range(n)]


def _phrases(notes: list[Note]) -> list[list[Note]]:
    groups: list[list[Note]] = []
    for note in notes:
        if groups and groups[-1][-1].end == note.start:
            groups[-1].append(note)
        else:
            groups.append([note])
    return groups


def _formant_envelope(freqs: np.ndarray, vowel: str, formant_scale: float,
                      tilt: float) -> np.ndarray:
    f1, f2 = VOWEL_FORMANTS[vowel]
    f1 *= formant_scale
    f2 *= formant_scale
    # the high shelf keeps upper harmonics present (deterministic spectral
    # content across the whole band, not just around the formants)
    env = (np.exp(-0.5 * ((freqs - f1) / 130.0) ** 2)
           + 0.6 * np.exp(-0.5 * ((freqs - f2) / 190.0) ** 2)
           + 0.12 * np.exp(-freqs / 3000.0)
           + 0.05 * np.exp(-freqs / 7000.0))
    return env * np.exp(-freqs * tilt)


def render_score(score: MusicScore, seed: int,
                 inventory: PhonemeInventory | None = None,
                 n_singers: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Render (waveform float32, per-frame f0 float64) for a score."""
    rng = np.random.default_rng(seed)
    inventory = inventory or PhonemeInventory()
    frames: FrameInputs = expand_frames(score, inventory)
    length = score.n_frames
    n_samples = (length - 1) * HOP_LENGTH

    centered = (score.singer_id - (n_singers - 1) / 2.0) / max(1.0, (n_singers - 1) / 2.0)
    formant_scale = 1.0 + 0.05 * centered
    tilt = 1.0 / 9000.0 + centered * 2e-5

    f0_frames = np.zeros(length)
    amp_frames = np.zeros(length)
    harmonic_gain = np.ones(length)
    noise_frames = np.zeros(length)
    vowel_of_frame = [None] * length

    silence_id = inventory.silence_id
    vowel_ids = {inventory.id_of(v): v for v in VOWELS}

    for group in _phrases([n for n in score.notes if not n.is_rest]):
        start, end = group[0].start, group[-1].end
        lo, hi = rng.uniform(0.45, 1.0, size=2)
        ramp = np.linspace(lo, hi, end - start)
        amp_frames[start:end] = 0.25 * ramp

    for note in score.notes:
        if note.is_rest:
            continue
        hz = midi_to_hz(note.pitch)
        dev_cents = np.clip(np.cumsum(rng.normal(0.0, 3.0, note.dur)), -15.0, 15.0)
        f0 = hz * 2.0 ** (dev_cents / 1200.0)
        f0[0] *= 2.0 ** (-60.0 / 1200.0)  # approach the note from below
        if note.dur >= 2:
            f0[1] *= 2.0 ** (-20.0 / 1200.0)
        if note.dur >= _VIBRATO_MIN_FRAMES and rng.random() < 0.6:
            rate = rng.uniform(5.0, 7.0)
            depth = rng.uniform(0.2, 0.4)
            t = np.arange(note.dur) * HOP_LENGTH / SAMPLE_RATE
            onset_ramp = np.clip(np.arange(note.dur) / 6.0, 0.0, 1.0)
            f0 *= 2.0 ** (depth * onset_ramp * np.sin(2 * np.pi * rate * t) / 12.0)
        f0_frames[note.start:note.end] = f0
        # soften note boundaries
        amp_frames[note.start] *= 0.6
        amp_frames[note.end - 1] *= 0.75

    for i in range(length):
        pid = int(frames.phoneme_ids[i])
        if pid == silence_id:
            continue
        if pid in vowel_ids:
            vowel_of_frame[i] = vowel_ids[pid]
            noise_frames[i] = 0.008 * amp_frames[i]
        else:  # onset/coda consonant frame
            vowel_of_frame[i] = _nearest_vowel(frames.phoneme_ids, i, vowel_ids)
            harmonic_gain[i] = 0.45
            noise_frames[i] = 0.3 * amp_frames[i]

    # breath bursts inside long gaps
    gaps = _silence_runs(f0_frames, score.notes)
    for a, b in gaps:
        if b - a < _BREATH_MIN_GAP:
            continue
        ba, bb = a + 1, b - 1
        env = np.hanning(bb - ba)
        noise_frames[ba:bb] = rng.uniform(0.05, 0.1) * env

    wave = np.zeros(n_samples)
    centers = np.arange(length) * HOP_LENGTH
    sample_idx = np.arange(n_samples)
    max_harmonics = 48
    freq_probe = np.arange(1, max_harmonics + 1)

    for s0, s1 in _voiced_runs(f0_frames):
        span_a = max(0, s0 * HOP_LENGTH - HOP_LENGTH // 2)
        span_b = min(n_samples, (s1 - 1) * HOP_LENGTH + HOP_LENGTH // 2)
        if span_b <= span_a:
            continue
        idx = sample_idx[span_a:span_b]
        f0_s = np.interp(idx, centers[s0:s1], f0_frames[s0:s1])
        phase = 2.0 * np.pi * np.cumsum(f0_s) / SAMPLE_RATE + rng.uniform(0, 2 * np.pi)
        k_max = int(min(max_harmonics,
                        (0.45 * SAMPLE_RATE) / f0_frames[s0:s1].max()))
        harm_amp_frames = np.zeros((k_max, s1 - s0))
        for j, fi in enumerate(range(s0, s1)):
            vowel = vowel_of_frame[fi] or "a"
            env = _formant_envelope(freq_probe[:k_max] * f0_frames[fi], vowel,
                                    formant_scale, tilt)
            env = env / max(env.sum(), 1e-9)
            harm_amp_frames[:, j] = env / np.sqrt(freq_probe[:k_max])
        seg = np.zeros(span_b - span_a)
        for k in range(1, k_max + 1):
            a_s = np.interp(idx, centers[s0:s1], harm_amp_frames[k - 1])
            seg += a_s * np.sin(k * phase)
        amp_s = np.interp(idx, centers[s0:s1],
                          amp_frames[s0:s1] * harmonic_gain[s0:s1])
        wave[span_a:span_b] += seg * amp_s

    noise = rng.standard_normal(n_samples)
    noise = np.diff(noise, prepend=0.0) * 0.7  # first difference: high-pass tilt
    wave += noise * np.interp(sample_idx, centers, noise_frames)

    peak = np.abs(wave).max()
    if peak > 0:
        wave *= 0.8 / peak
    return wave.astype(np.float32), f0_frames


def _nearest_vowel(phoneme_ids: np.ndarray, i: int, vowel_ids: dict) -> str:
    for j in list(range(i + 1, min(i + 4, len(phoneme_ids)))) + \
             list(range(i - 1, max(i - 4, -1), -1)):
        if int(phoneme_ids[j]) in vowel_ids:
            return vowel_ids[int(phoneme_ids[j])]
    return "a"


def _voiced_runs(f0_frames: np.ndarray):
    mask = f0_frames > 0
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return
    breaks = np.nonzero(np.diff(idx) > 1)[0]
    starts = np.concatenate([[idx[0]], idx[breaks + 1]])
    stops = np.concatenate([idx[breaks] + 1, [idx[-1] + 1]])
    for a, b in zip(starts, stops):
        yield int(a), int(b)


def _silence_runs(f0_frames: np.ndarray, notes) -> list[tuple[int, int]]:
    covered = np.zeros(len(f0_frames), dtype=bool)
    for note in notes:
        if not note.is_rest:
            covered[note.start:note.end] = True
    runs = []
    start = None
    for i, c in enumerate(covered):
        if not c and start is None:
            start = i
        elif c and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(covered)))
    return runs


def generate_synthetic_corpus(n_songs: int, seed: int,
                              n_singers: int = 4) -> list[SyntheticSong]:
    """n_songs rendered songs, fully determined by the seed."""
    if n_songs < 1:
        raise ValueError(f"n_songs must be >= 1, got {n_songs}")
    rng = np.random.default_rng(seed)
    songs = []
    for i in range(n_songs):
        score = random_score(rng, n_singers)
        wave, f0 = render_score(score, seed=int(rng.integers(0, 2 ** 31)),
                                n_singers=n_singers)
        songs.append(SyntheticSong(score=score, wave=wave, f0_hz=f0))
    return songs
