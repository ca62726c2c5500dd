"""Training loop and dual-path reconstruction analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import SyntheticSong, random_scores
from .dsp import Waveform, extract_f0, mel_analyze, vocode
from .dual_pitch import PitchInput, PitchPath, select_path
from .f0 import F0Contour
from .metrics import f0_rmse_vuv, mcd
from .model import AcousticModel, ModelConfig, synthesize
from .nn import Adam, Tensor
from .nn import tensor as T
from .score import FrameInputs, PhonemeInventory, expand_frames


class TrainingError(RuntimeError):
    pass


@dataclass
class TrainExample:
    frame_inputs: FrameInputs
    contour: F0Contour
    mel: np.ndarray  # raw log-mel [L, n_mels]


def build_training_set(songs: list[SyntheticSong],
                       inventory: PhonemeInventory | None = None,
                       n_mels: int = 128) -> list[TrainExample]:
    """Paired (frame inputs, f0 contour, target mel) examples.

    Training contours come from the extractor, not the generator's commanded
    values, so the f0 path sees the same distribution at training time that
    it gets from the edit loop (extraction of a previous render)."""
    inventory = inventory or PhonemeInventory()
    examples = []
    for song in songs:
        fi = expand_frames(song.score, inventory)
        wave = Waveform(song.wave.astype(np.float64))
        mel = mel_analyze(wave, n_mels=n_mels)
        if mel.n_frames != fi.n_frames:
            raise TrainingError(
                f"frame grid mismatch: mel {mel.n_frames} vs score {fi.n_frames}")
        examples.append(TrainExample(frame_inputs=fi,
                                     contour=extract_f0(wave),
                                     mel=mel.frames.astype(np.float32)))
    return examples


def train_step(batch: list[TrainExample], model: AcousticModel,
               optimizer: Adam, rng: np.random.Generator,
               history_noise: float = 0.3,
               self_conditioning: bool = False) -> float:
    """One optimizer update over the batch; returns the mean L1 loss.

    The pitch path is drawn per example with probability 1/2 each way.
    history_noise perturbs the teacher-forced previous frames (element plus
    broadband level noise) so free-running synthesis stays anchored to the
    conditioning; self_conditioning optionally adds a second pass whose
    previous frames are the first pass's own (detached) predictions. The
    reported loss is the teacher-forced L1 of the first pass."""
    if model.config.adversarial_weight != 0.0:
        raise TrainingError(
            "adversarial training is a config hook only; set adversarial_weight=0")
    optimizer.zero_grad()
    total = 0.0
    n = len(batch)
    mel_mean = np.float32(model.config.mel_mean)
    for ex in batch:
        path = select_path("train", rng)
        pitch = PitchInput(path, contour=ex.contour)
        pred, _, _, _ = model.forward_teacher(
            ex.frame_inputs, pitch, ex.mel,
            history_noise=history_noise, rng=rng)
        target = Tensor(ex.mel.T)
        loss = T.mean(T.absolute(T.sub(pred, target)))
        if self_conditioning:
            prev_own = np.empty_like(pred.data)
            prev_own[:, 0] = mel_mean
            prev_own[:, 1:] = pred.data[:, :-1]
            pred2, _, _, _ = model.forward_teacher(
                ex.frame_inputs, pitch, ex.mel, prev_override=prev_own)
            loss2 = T.mean(T.absolute(T.sub(pred2, target)))
            combined = T.scale(T.add(loss, loss2), 0.5)
        else:
            combined = loss
        T.scale(combined, 1.0 / n).backward()
        total += loss.item()
    value = total / n
    if not np.isfinite(value):
        raise TrainingError(f"non-finite training loss {value}")
    optimizer.step()
    return value


def train_model(examples: list[TrainExample], config: ModelConfig, steps: int,
                seed: int, lr: float = 5e-3,
                history_noise: float = 0.3) -> tuple[AcousticModel, list[float]]:
    model = AcousticModel(config)
    optimizer = Adam(model.named_parameters(), lr=lr)
    rng = np.random.default_rng(seed)
    losses = []
    for step in range(steps):
        try:
            losses.append(train_step(examples, model, optimizer, rng,
                                     history_noise=history_noise))
        except (TrainingError, FloatingPointError) as exc:
            raise TrainingError(f"step {step}: {exc}") from exc
    return model, losses


def analyze_tokens(model: AcousticModel, n_songs: int, seed: int,
                   inventory: PhonemeInventory | None = None) -> dict:
    """Correlate each style token's score with frame energy and silence.

    Token roles land on different indices every training run, so labels are
    suggestions: the strongest silence correlate is the breath candidate,
    the strongest energy correlate the intensity candidate.
    """
    if not model.config.use_style_tokens:
        return {"text": None, "pitch": None, "labels": {}}
    from .style_tokens import correlate_tokens

    inventory = inventory or PhonemeInventory()
    scores = random_scores(n_songs, seed, model.config.n_singers)
    text_cols, pitch_cols, energies, silences = [], [], [], []
    for score in scores:
        fi = expand_frames(score, inventory)
        result = synthesize(fi, PitchInput(PitchPath.MIDI), model, seed=seed)
        text_cols.append(result.style_scores.text.scores)
        if result.style_scores.pitch is not None:
            pitch_cols.append(result.style_scores.pitch.scores)
        energies.append(result.mel.frames.mean(axis=1))
        silences.append(fi.phoneme_ids == inventory.silence_id)
    energy = np.concatenate(energies)
    silence = np.concatenate(silences).astype(np.float64)
    text = correlate_tokens(np.concatenate(text_cols), energy, silence)
    pitch = (correlate_tokens(np.concatenate(pitch_cols), energy, silence)
             if pitch_cols else None)
    labels = {
        "breath": int(np.argmax([t["r_silence"] for t in text])),
        "intensity": int(np.argmax([t["r_energy"] for t in text])),
    }
    return {"text": text, "pitch": pitch, "labels": labels}


@dataclass
class ReconstructionReport:
    mcd_db: float
    f0_rmse_hz: float
    vuv_pct: float
    per_sample: list[dict]


def reconstruct_once(model: AcousticModel, frame_inputs: FrameInputs,
                     seed: int, gl_iters: int = 40) -> dict:
    """MIDI-path render, f0 extraction, f0-path re-render, metrics.

    The re-render carries the first render's style scores, exactly like the
    interactive loop: both curves obtained from the initial generation are
    fed back (here unmodified)."""
    first = synthesize(frame_inputs, PitchInput(PitchPath.MIDI), model, seed=seed)
    wav_first = vocode(first.mel, iterations=gl_iters)
    f0_first = extract_f0(wav_first)
    second = synthesize(frame_inputs, PitchInput(PitchPath.F0, contour=f0_first),
                        model, style_override=first.style_scores, seed=seed)
    wav_second = vocode(second.mel, iterations=gl_iters)
    f0_second = extract_f0(wav_second)
    rmse, vuv = f0_rmse_vuv(f0_first, f0_second)
    return {
        "mcd_db": mcd(first.mel, second.mel),
        "f0_rmse_hz": rmse,
        "vuv_pct": vuv,
    }


def reconstruction_analysis(model: AcousticModel, n_samples: int, seed: int,
                            gl_iters: int = 40,
                            inventory: PhonemeInventory | None = None) -> ReconstructionReport:
    inventory = inventory or PhonemeInventory()
    scores = random_scores(n_samples, seed, model.config.n_singers)
    per_sample = []
    for score in scores:
        fi = expand_frames(score, inventory)
        per_sample.append(reconstruct_once(model, fi, seed=seed, gl_iters=gl_iters))
    return ReconstructionReport(
        mcd_db=float(np.mean([s["mcd_db"] for s in per_sample])),
        f0_rmse_hz=float(np.mean([s["f0_rmse_hz"] for s in per_sample])),
        vuv_pct=float(np.mean([s["vuv_pct"] for s in per_sample])),
        per_sample=per_sample,
    )
