"""Music-score parsing and frame-level expansion.

Scores are authored directly on the acoustic frame grid (22,050 Hz, hop 256):
each note carries a MIDI pitch (or rest), a start frame, a duration in
frames, and a syllable of (optional onset, vowel, optional coda) phonemes.
Expansion assigns one frame to the onset, one to the coda, and the remainder
to the vowel; gaps between notes become silence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import REST_PITCH_ID

DEFAULT_PHONEMES = (
    "sil",
    "a", "e", "i", "o", "u",
    "b", "d", "f", "g", "h", "k", "l", "m", "n", "r", "s", "t", "w", "z",
)

SILENCE = "sil"


class ScoreError(ValueError):
    """Score document violates the schema; message names the field."""

    def __init__(self, message: str, field_path: str = ""):
        super().__init__(message)
        self.field_path = field_path


class OverlapError(ScoreError):
    """Two notes occupy the same frames."""


class ExpansionError(ScoreError):
    """A note is too short to host its boundary phonemes."""


class PhonemeInventory:
    """Symbol table mapping phoneme strings to embedding ids."""

    def __init__(self, symbols=DEFAULT_PHONEMES):
        symbols = tuple(symbols)
        if SILENCE not in symbols:
            raise ValueError(f"inventory must contain {SILENCE!r}")
        if len(set(symbols)) != len(symbols):
            raise ValueError("duplicate phoneme symbols")
        self.symbols = symbols
        self._ids = {s: i for i, s in enumerate(symbols)}

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._ids

    def id_of(self, symbol: str) -> int:
        return self._ids[symbol]

    @property
    def silence_id(self) -> int:
        return self._ids[SILENCE]


@dataclass(frozen=True)
class Syllable:
    onset: Optional[str]
    vowel: str
    coda: Optional[str]


@dataclass(frozen=True)
class Note:
    pitch: Optional[int]  # None means rest
    start: int
    dur: int
    syllable: Optional[Syllable]

    @property
    def end(self) -> int:
        return self.start + self.dur

    @property
    def is_rest(self) -> bool:
        return self.pitch is None


@dataclass
class MusicScore:
    singer_id: int
    notes: list[Note] = field(default_factory=list)

    @property
    def n_frames(self) -> int:
        return self.notes[-1].end if self.notes else 0


@dataclass
class FrameInputs:
    phoneme_ids: np.ndarray  # int64 [L]
    midi_pitch: np.ndarray   # int64 [L], REST_PITCH_ID for silence
    singer_id: int

    @property
    def n_frames(self) -> int:
        return len(self.phoneme_ids)


def _require(cond: bool, message: str, path: str) -> None:
    if not cond:
        raise ScoreError(f"{path}: {message}", path)


def parse_score(document, inventory: PhonemeInventory | None = None) -> MusicScore:
    """Validate a score document (JSON text or dict) into a MusicScore."""
    inventory = inventory or PhonemeInventory()
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ScoreError(f"invalid JSON: {exc}") from exc
    _require(isinstance(document, dict), "score must be a JSON object", "$")
    singer = document.get("singer_id")
    _require(isinstance(singer, int) and not isinstance(singer, bool) and singer >= 0,
             "singer_id must be a non-negative integer", "singer_id")
    raw_notes = document.get("notes")
    _require(isinstance(raw_notes, list) and len(raw_notes) > 0,
             "notes must be a non-empty list", "notes")

    notes: list[Note] = []
    for i, raw in enumerate(raw_notes):
        path = f"notes[{i}]"
        _require(isinstance(raw, dict), "note must be an object", path)
        pitch = raw.get("pitch")
        if pitch == "rest":
            pitch_val: Optional[int] = None
        else:
            _require(isinstance(pitch, int) and not isinstance(pitch, bool),
                     "pitch must be an integer or \"rest\"", f"{path}.pitch")
            _require(0 <= pitch <= 127,
                     f"pitch {pitch} outside MIDI range 0-127", f"{path}.pitch")
            pitch_val = pitch
        start = raw.get("start")
        dur = raw.get("dur")
        _require(isinstance(start, int) and start >= 0,
                 "start must be an integer >= 0", f"{path}.start")
        _require(isinstance(dur, int) and dur >= 1,
                 "dur must be an integer >= 1", f"{path}.dur")
        phonemes = raw.get("phonemes")
        if pitch_val is None:
            _require(phonemes in (None, {}),
                     "rest notes cannot carry phonemes", f"{path}.phonemes")
            syllable = None
        else:
            _require(isinstance(phonemes, dict), "phonemes object required",
                     f"{path}.phonemes")
            vowel = phonemes.get("vowel")
            _require(isinstance(vowel, str), "vowel phoneme required",
                     f"{path}.phonemes.vowel")
            syllable = Syllable(onset=phonemes.get("onset"), vowel=vowel,
                                coda=phonemes.get("coda"))
            for role in ("onset", "vowel", "coda"):
                sym = getattr(syllable, role)
                if sym is not None:
                    _require(isinstance(sym, str) and sym in inventory,
                             f"unknown phoneme {sym!r}", f"{path}.phonemes.{role}")
                    _require(sym != SILENCE,
                             "silence phoneme cannot appear in a syllable",
                             f"{path}.phonemes.{role}")
        notes.append(Note(pitch_val, start, dur, syllable))

    for i in range(1, len(notes)):
        prev, cur = notes[i - 1], notes[i]
        if cur.start < prev.start:
            raise ScoreError(
                f"notes[{i}] starts at frame {cur.start}, before notes[{i - 1}] "
                f"(frame {prev.start}); notes must be sorted", f"notes[{i}].start")
        if cur.start < prev.end:
            raise OverlapError(
                f"notes[{i - 1}] (frames {prev.start}-{prev.end}) overlaps "
                f"notes[{i}] (frames {cur.start}-{cur.end})", f"notes[{i}].start")
    return MusicScore(singer_id=singer, notes=notes)


def score_to_dict(score: MusicScore) -> dict:
    notes = []
    for note in score.notes:
        raw: dict = {"pitch": "rest" if note.is_rest else note.pitch,
                     "start": note.start, "dur": note.dur}
        if note.syllable is not None:
            ph = {"vowel": note.syllable.vowel}
            if note.syllable.onset is not None:
                ph["onset"] = note.syllable.onset
            if note.syllable.coda is not None:
                ph["coda"] = note.syllable.coda
            raw["phonemes"] = ph
        notes.append(raw)
    return {"singer_id": score.singer_id, "notes": notes}


def expand_frames(score: MusicScore,
                  inventory: PhonemeInventory | None = None) -> FrameInputs:
    """Expand a score to per-frame phoneme and pitch id sequences.

    Each note lays out [onset] * 1 + vowel * (dur - boundaries) + [coda] * 1;
    frames not covered by a note are silence with the rest pitch id.
    """
    inventory = inventory or PhonemeInventory()
    length = score.n_frames
    if length == 0:
        raise ScoreError("score has no notes to expand", "notes")
    phonemes = np.full(length, inventory.silence_id, dtype=np.int64)
    pitches = np.full(length, REST_PITCH_ID, dtype=np.int64)
    for i, note in enumerate(score.notes):
        if note.is_rest:
            continue
        syl = note.syllable
        boundaries = int(syl.onset is not None) + int(syl.coda is not None)
        if note.dur < boundaries + 1:
            raise ExpansionError(
                f"notes[{i}]: duration {note.dur} too short for "
                f"{boundaries} boundary phoneme(s) plus vowel", f"notes[{i}].dur")
        pos = note.start
        if syl.onset is not None:
            phonemes[pos] = inventory.id_of(syl.onset)
            pos += 1
        vowel_frames = note.dur - boundaries
        phonemes[pos:pos + vowel_frames] = inventory.id_of(syl.vowel)
        pos += vowel_frames
        if syl.coda is not None:
            phonemes[pos] = inventory.id_of(syl.coda)
        pitches[note.start:note.end] = note.pitch
    return FrameInputs(phoneme_ids=phonemes, midi_pitch=pitches,
                       singer_id=score.singer_id)


def midi_to_hz(midi_pitch: float) -> float:
    return 440.0 * 2.0 ** ((midi_pitch - 69) / 12.0)
