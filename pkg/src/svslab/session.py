"""Edit-and-resynthesize sessions with append-only persistence.

A session pins a score and a seed, and carries the current editable curves
(f0 contour plus style scores) and the latest synthesized mel. Every
mutation bumps a monotonically increasing revision and appends revisioned
files under the session's directory, so a restart restores every session
byte-identically. The session's mel is always "f0-path render of the
current curves": creation extracts the contour from an initial MIDI-path
render and immediately re-renders through the f0 path, which makes a no-op
edit followed by resynthesis an exact replay.
"""

from __future__ import annotations

import datetime as _dt
import json
import re
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from .constants import F0_MAX_HZ, F0_MIN_HZ
from .dsp import Waveform, extract_f0, vocode, write_wav
from .dual_pitch import PitchInput, PitchPath
from .f0 import F0Contour, contour_to_dict
from .mel import MelSpectrogram, load_mel, save_mel
from .model import AcousticModel, synthesize
from .score import FrameInputs, MusicScore, expand_frames, parse_score, score_to_dict
from .style_tokens import StyleBundle, bundle_from_dict, bundle_to_dict


class SessionNotFound(KeyError):
    pass


class RevisionConflict(Exception):
    def __init__(self, expected: int, got: int):
        super().__init__(f"revision conflict: expected {expected}, got {got}")
        self.expected = expected
        self.got = got


class CurveValidationError(ValueError):
    def __init__(self, field_path: str, message: str):
        super().__init__(f"{field_path}: {message}")
        self.field_path = field_path
        self.message = message


@dataclass
class Session:
    id: str
    score: MusicScore
    frame_inputs: FrameInputs
    seed: int
    revision: int
    f0: F0Contour
    style: StyleBundle
    mel: MelSpectrogram
    mel_revision: int
    created: str
    updated: str
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def n_frames(self) -> int:
        return self.frame_inputs.n_frames


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def validate_f0_values(values, n_frames: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or len(arr) != n_frames:
        raise CurveValidationError(
            "f0_hz", f"expected {n_frames} frames, got shape {arr.shape}")
    for i, v in enumerate(arr):
        if not np.isfinite(v):
            raise CurveValidationError(f"f0_hz[{i}]", "non-finite value")
        if v < 0:
            raise CurveValidationError(f"f0_hz[{i}]", f"negative f0 {v:g}")
        if v != 0.0 and not (F0_MIN_HZ <= v <= F0_MAX_HZ):
            raise CurveValidationError(
                f"f0_hz[{i}]",
                f"voiced f0 {v:g} outside [{F0_MIN_HZ:g}, {F0_MAX_HZ:g}] Hz")
    return arr


def validate_style_doc(doc: dict, n_frames: int, n_tokens: int,
                       sides: tuple[str, ...]) -> StyleBundle:
    for side in sides:
        side_doc = doc.get(side)
        if side_doc is None:
            raise CurveValidationError(f"style.{side}", "missing side")
        scores = side_doc.get("scores")
        arr = np.asarray(scores, dtype=np.float64)
        if arr.ndim != 2 or arr.shape != (n_frames, n_tokens):
            raise CurveValidationError(
                f"style.{side}.scores",
                f"expected shape ({n_frames}, {n_tokens}), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            frame = int(np.argwhere(~np.isfinite(arr))[0][0])
            raise CurveValidationError(
                f"style.{side}.scores[{frame}]", "non-finite value")
        if np.any(arr < 0):
            frame, token = (int(v) for v in np.argwhere(arr < 0)[0])
            raise CurveValidationError(
                f"style.{side}.scores[{frame}][{token}]",
                f"negative score {arr[frame, token]:g}")
    try:
        return bundle_from_dict({side: doc.get(side) for side in sides})
    except ValueError as exc:
        raise CurveValidationError("style", str(exc)) from exc


class SessionService:
    """Owns the model, the in-memory sessions, and the on-disk store."""

    def __init__(self, model: AcousticModel, data_dir, gl_iters: int = 40):
        import pathlib

        self.model = model
        self.gl_iters = gl_iters
        self.root = pathlib.Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self._restore()

    # -- persistence ------------------------------------------------------

    def _dir(self, session_id: str):
        return self.root / session_id

    def _write_meta(self, s: Session) -> None:
        meta = {
            "id": s.id, "seed": s.seed, "revision": s.revision,
            "mel_revision": s.mel_revision, "frames": s.n_frames,
            "created": s.created, "updated": s.updated,
        }
        (self._dir(s.id) / "meta.json").write_text(
            json.dumps(meta, indent=1), encoding="utf-8")

    def _write_f0(self, s: Session) -> None:
        doc = contour_to_dict(s.f0)
        (self._dir(s.id) / f"f0.rev{s.revision}.json").write_text(
            json.dumps(doc), encoding="utf-8")

    def _write_style(self, s: Session) -> None:
        doc = bundle_to_dict(s.style)
        (self._dir(s.id) / f"style.rev{s.revision}.json").write_text(
            json.dumps(doc), encoding="utf-8")

    def _write_mel(self, s: Session) -> None:
        save_mel(self._dir(s.id) / f"mel.rev{s.mel_revision}.bin", s.mel)

    def _latest(self, directory, pattern: str):
        best_rev, best_path = -1, None
        rx = re.compile(pattern)
        for p in directory.iterdir():
            m = rx.fullmatch(p.name)
            if m and int(m.group(1)) > best_rev:
                best_rev, best_path = int(m.group(1)), p
        return best_path

    def _restore(self) -> None:
        for d in sorted(self.root.iterdir()) if self.root.exists() else []:
            meta_path = d / "meta.json"
            if not d.is_dir() or not meta_path.exists():
                continue
            meta = json.loads(meta_path.read_text(encoding="utf-8"))
            score = parse_score(json.loads((d / "score.json").read_text(encoding="utf-8")))
            f0_path = self._latest(d, r"f0\.rev(\d+)\.json")
            style_path = self._latest(d, r"style\.rev(\d+)\.json")
            mel_path = self._latest(d, r"mel\.rev(\d+)\.bin")
            f0_doc = json.loads(f0_path.read_text(encoding="utf-8"))
            style_doc = json.loads(style_path.read_text(encoding="utf-8"))
            session = Session(
                id=meta["id"], score=score, frame_inputs=expand_frames(score),
                seed=meta["seed"], revision=meta["revision"],
                f0=F0Contour(np.asarray(f0_doc["f0_hz"], dtype=np.float64)),
                style=bundle_from_dict(style_doc),
                mel=load_mel(mel_path), mel_revision=meta["mel_revision"],
                created=meta["created"], updated=meta["updated"])
            self.sessions[session.id] = session

    # -- operations -------------------------------------------------------

    def _style_sides(self) -> tuple[str, ...]:
        sides = []
        if self.model.config.use_style_tokens:
            sides.append("text")
            if self.model.config.use_pitch_style_tokens:
                sides.append("pitch")
        return tuple(sides)

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise SessionNotFound(session_id) from None

    def create_session(self, score_doc: dict, seed: int = 0) -> Session:
        score = parse_score(score_doc)
        fi = expand_frames(score)
        first = synthesize(fi, PitchInput(PitchPath.MIDI), self.model, seed=seed)
        wav = vocode(first.mel, iterations=self.gl_iters)
        contour = extract_f0(wav)
        canonical = synthesize(fi, PitchInput(PitchPath.F0, contour=contour),
                               self.model, style_override=first.style_scores,
                               seed=seed)
        now = _now()
        session = Session(
            id=uuid.uuid4().hex, score=score, frame_inputs=fi, seed=seed,
            revision=1, f0=contour, style=canonical.style_scores,
            mel=canonical.mel, mel_revision=1, created=now, updated=now)
        with self._registry_lock:
            self.sessions[session.id] = session
        d = self._dir(session.id)
        d.mkdir(parents=True, exist_ok=True)
        (d / "score.json").write_text(json.dumps(score_to_dict(score)),
                                      encoding="utf-8")
        self._write_f0(session)
        self._write_style(session)
        self._write_mel(session)
        self._write_meta(session)
        return session

    def _check_revision(self, session: Session, revision: int) -> None:
        if revision != session.revision:
            raise RevisionConflict(expected=session.revision, got=revision)

    def put_f0(self, session_id: str, revision: int, doc: dict) -> Session:
        session = self.get(session_id)
        with session.lock:
            self._check_revision(session, revision)
            values = validate_f0_values(doc.get("f0_hz"), session.n_frames)
            session.f0 = F0Contour(values)
            session.revision += 1
            session.updated = _now()
            self._write_f0(session)
            self._write_meta(session)
        return session

    def put_style(self, session_id: str, revision: int, doc: dict) -> Session:
        session = self.get(session_id)
        with session.lock:
            self._check_revision(session, revision)
            bundle = validate_style_doc(doc, session.n_frames,
                                        self.model.config.n_tokens,
                                        self._style_sides())
            session.style = bundle
            session.revision += 1
            session.updated = _now()
            self._write_style(session)
            self._write_meta(session)
        return session

    def resynthesize(self, session_id: str, revision: int) -> Session:
        """Re-render through the f0 path with the session's current curves."""
        session = self.get(session_id)
        with session.lock:
            self._check_revision(session, revision)
            result = synthesize(
                session.frame_inputs,
                PitchInput(PitchPath.F0, contour=session.f0),
                self.model, style_override=session.style, seed=session.seed)
            session.mel = result.mel
            session.style = result.style_scores
            session.revision += 1
            session.mel_revision = session.revision
            session.updated = _now()
            self._write_style(session)
            self._write_mel(session)
            self._write_meta(session)
        return session

    def audio_path(self, session_id: str):
        """Vocode the session's mel, cached per mel revision."""
        session = self.get(session_id)
        with session.lock:
            path = self._dir(session.id) / f"audio.rev{session.mel_revision}.wav"
            if not path.exists():
                wav = vocode(session.mel, iterations=self.gl_iters)
                write_wav(path, wav)
            return path
