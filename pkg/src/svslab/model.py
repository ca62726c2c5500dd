"""Source-filter autoregressive acoustic model.

Two causal gated-conv decoders produce the log-mel output as a sum: the
filter branch reads the text encoding (conditioned on singer and the
text-side style tokens), the source branch reads the pitch encoding plus an
embedding of the previously generated mel frame (conditioned on singer and
the pitch-side style tokens). Training teacher-forces the previous frame;
synthesis free-runs one frame at a time.

The decode loop only ever needs the causal receptive field, so free-running
synthesis slides a short window instead of recomputing the whole prefix;
the result is bit-identical to the naive full recomputation.

A loaded model is read-only at inference and safe to share across threads
(each synthesis call owns its decode state); training mutates parameters
and optimizer state and must own the model exclusively.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .constants import N_MELS
from .dual_pitch import F0ContourEncoder, MidiPitchEncoder, PitchInput, PitchPath
from .f0 import F0Contour
from .mel import MelSpectrogram
from .nn import Affine, ConvGLU, ConvGLUStack, Embedding, Module, Tensor
from .nn import tensor as T
from .nn.checkpoint import (
    Checkpoint,
    CheckpointFormatError,
    load_checkpoint,
    save_checkpoint,
)
from .score import FrameInputs
from .style_tokens import (
    PITCH_SIDE,
    TEXT_SIDE,
    StyleBundle,
    StyleScore,
    StyleTokenModule,
)


@dataclass
class ModelConfig:
    """Architecture hyperparameters; every dimension is explicit.

    mel_mean/mel_scale center the previous-frame input and set the output
    bias prior; they are fixed constants, not data statistics.
    adversarial_weight is a hook only — training rejects nonzero values.
    """

    n_phonemes: int = 20
    n_singers: int = 4
    d_text: int = 64
    d_pitch: int = 64
    d_singer: int = 16
    d_style: int = 64
    d_decoder: int = 64
    d_prenet: int = 8  # narrow history bottleneck; see AcousticModel.__init__
    n_tokens: int = 4
    n_mels: int = N_MELS
    text_kernels: tuple = (5, 3)
    pitch_kernels: tuple = (5, 3)
    style_kernels: tuple = (5, 3, 1)
    filter_kernels: tuple = (3, 3, 3, 3)
    source_kernels: tuple = (3, 3, 3, 3)
    use_style_tokens: bool = True
    use_pitch_style_tokens: bool = True
    mel_mean: float = -6.0
    mel_scale: float = 3.0
    feedback_floor: float = -12.0
    feedback_ceiling: float = 5.0
    adversarial_weight: float = 0.0
    init_seed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in ("text_kernels", "pitch_kernels", "style_kernels",
                    "filter_kernels", "source_kernels"):
            d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        kwargs = dict(d)
        for key in ("text_kernels", "pitch_kernels", "style_kernels",
                    "filter_kernels", "source_kernels"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


@dataclass
class SynthesisResult:
    mel: MelSpectrogram
    style_scores: StyleBundle
    pitch_path: PitchPath
    seed: int


class AcousticModel(Module):
    def __init__(self, config: ModelConfig):
        cfg = config
        self.config = cfg

        def rng(name: str) -> np.random.Generator:
            # per-component streams: components shared between model
            # variants initialize identically for a given seed
            return np.random.default_rng(
                [cfg.init_seed, zlib.crc32(name.encode())])

        self.phoneme_embedding = Embedding(cfg.n_phonemes, cfg.d_text,
                                           rng("phoneme_embedding"))
        self.text_encoder = ConvGLUStack(
            cfg.d_text, [cfg.d_text] * len(cfg.text_kernels), cfg.text_kernels,
            rng("text_encoder"))
        self.singer_embedding = Embedding(cfg.n_singers, cfg.d_singer,
                                          rng("singer_embedding"))
        self.midi_encoder = MidiPitchEncoder(cfg.d_pitch, rng("midi_encoder"),
                                             cfg.pitch_kernels)
        self.f0_encoder = F0ContourEncoder(cfg.d_pitch, rng("f0_encoder"),
                                           cfg.pitch_kernels)
        if cfg.use_style_tokens:
            self.style_text = StyleTokenModule(
                TEXT_SIDE, cfg.d_text, cfg.d_singer, cfg.d_style, cfg.n_tokens,
                rng("style_text"), cfg.style_kernels)
            if cfg.use_pitch_style_tokens:
                self.style_pitch = StyleTokenModule(
                    PITCH_SIDE, cfg.d_pitch, cfg.d_singer, cfg.d_style,
                    cfg.n_tokens, rng("style_pitch"), cfg.style_kernels)
        self.prenet = ConvGLU(cfg.n_mels, cfg.d_prenet, 1, rng("prenet"),
                              causal=True)
        # the history pathway starts deliberately weak: free-running decode
        # then has a single conditioning-driven attractor, and the weights
        # grow only if the data demands it
        self.prenet.weight.data *= np.float32(0.25)
        filter_in = cfg.d_text + cfg.d_singer
        if cfg.use_style_tokens:
            filter_in += cfg.d_style
        self.filter_decoder = ConvGLUStack(
            filter_in, [cfg.d_decoder] * len(cfg.filter_kernels),
            cfg.filter_kernels, rng("filter_decoder"), causal=True)
        self.filter_proj = Affine(cfg.d_decoder, cfg.n_mels, rng("filter_proj"))
        source_in = cfg.d_prenet + cfg.d_pitch + cfg.d_singer
        if cfg.use_style_tokens and cfg.use_pitch_style_tokens:
            source_in += cfg.d_style
        self.source_decoder = ConvGLUStack(
            source_in, [cfg.d_decoder] * len(cfg.source_kernels),
            cfg.source_kernels, rng("source_decoder"), causal=True)
        self.source_proj = Affine(cfg.d_decoder, cfg.n_mels, rng("source_proj"))
        # output-bias prior: two branches summing to roughly the silence floor
        self.filter_proj.bias.data[:] = np.float32(cfg.mel_mean)
        self.source_proj.bias.data[:] = np.float32(cfg.mel_mean)

    @property
    def source_receptive_field(self) -> int:
        return 1 + sum(k - 1 for k in self.config.source_kernels)

    def singer_vector(self, singer_id: int) -> Tensor:
        emb = self.singer_embedding.forward(np.array([singer_id]))
        return T.reshape(emb, (self.config.d_singer,))

    def encode_text(self, phoneme_ids: np.ndarray) -> Tensor:
        emb = T.transpose(self.phoneme_embedding.forward(phoneme_ids))
        return self.text_encoder.forward(emb)

    def encode_pitch(self, pitch: PitchInput, frame_inputs: FrameInputs) -> Tensor:
        n_frames = frame_inputs.n_frames
        if pitch.path is PitchPath.MIDI:
            return self.midi_encoder.forward(frame_inputs.midi_pitch)
        if pitch.contour is None:
            raise ValueError("f0 path requires a contour payload")
        if pitch.contour.n_frames != n_frames:
            raise T.ShapeError(
                f"contour length {pitch.contour.n_frames} != {n_frames} frames")
        return self.f0_encoder.forward(pitch.contour)

    def _style_side(self, module: StyleTokenModule, content: Tensor,
                    singer: Tensor, override: Optional[StyleScore],
                    token_override: Optional[np.ndarray]):
        """Returns (style score actually used, token sequence [d, L] Tensor)."""
        if token_override is not None:
            t_seq = Tensor(np.asarray(token_override, dtype=np.float32))
            return None, T.transpose(t_seq)
        score_arr = override.scores if override is not None else None
        s, t_seq = module.forward(content, singer, score_override=score_arr)
        used = StyleScore(side=module.side, scores=s.data.copy(),
                          edited=bool(override.edited) if override is not None else False)
        return used, T.transpose(t_seq)

    def conditioning(self, frame_inputs: FrameInputs, pitch: PitchInput,
                     style_override: Optional[StyleBundle] = None,
                     token_override: Optional[dict] = None):
        """Everything the decoders need that does not depend on prev frames.

        Returns (filter_input [C_f, L], source_conditioning [C_s, L], styles).
        """
        cfg = self.config
        length = frame_inputs.n_frames
        if length < 1:
            raise T.ShapeError("cannot synthesize a zero-length sequence")
        override = style_override or StyleBundle()
        tok_override = token_override or {}
        e_t = self.encode_text(frame_inputs.phoneme_ids)
        singer = self.singer_vector(frame_inputs.singer_id)
        singer_seq = T.broadcast_col(singer, length)
        e_p = self.encode_pitch(pitch, frame_inputs)

        styles = StyleBundle()
        filter_parts = [e_t, singer_seq]
        source_parts = [e_p, singer_seq]
        if cfg.use_style_tokens:
            used, t_text = self._style_side(
                self.style_text, e_t, singer, override.text,
                tok_override.get(TEXT_SIDE))
            styles.text = used
            filter_parts.append(t_text)
            if cfg.use_pitch_style_tokens:
                used_p, t_pitch = self._style_side(
                    self.style_pitch, e_p, singer, override.pitch,
                    tok_override.get(PITCH_SIDE))
                styles.pitch = used_p
                source_parts.append(t_pitch)
        filter_input = T.concat(filter_parts, axis=0)
        source_cond = T.concat(source_parts, axis=0)
        return filter_input, source_cond, styles

    def filter_branch(self, filter_input: Tensor) -> Tensor:
        return self.filter_proj.forward(self.filter_decoder.forward(filter_input))

    def source_branch(self, prev_mel: np.ndarray, source_cond: Tensor) -> Tensor:
        """prev_mel: raw log-mel [n_mels, L'] fed as constant data.

        Previous frames are clamped to the representable log-mel envelope so
        the free-running feedback loop cannot leave the training regime;
        teacher-forced inputs sit inside the envelope already."""
        cfg = self.config
        clipped = np.clip(prev_mel.astype(np.float32),
                          np.float32(cfg.feedback_floor),
                          np.float32(cfg.feedback_ceiling))
        normed = (clipped - np.float32(cfg.mel_mean)) / np.float32(cfg.mel_scale)
        e_m = self.prenet.forward(Tensor(normed))
        src_in = T.concat([e_m, source_cond], axis=0)
        return self.source_proj.forward(self.source_decoder.forward(src_in))

    def forward_teacher(self, frame_inputs: FrameInputs, pitch: PitchInput,
                        target_mel: np.ndarray,
                        style_override: Optional[StyleBundle] = None,
                        history_noise: float = 0.0,
                        rng: Optional[np.random.Generator] = None,
                        prev_override: Optional[np.ndarray] = None):
        """Teacher-forced full-sequence pass.

        target_mel: raw log-mel [L, n_mels]. Returns (output [n_mels, L],
        filter branch, source branch, styles); output = filter + source.

        history_noise adds Gaussian noise (in log-mel units) to the
        teacher-forced previous frames: independent per-element noise plus a
        per-frame broadband level offset at the same scale. Free-running
        synthesis drifts exactly in those modes, so training to correct them
        keeps the feedback loop anchored to the conditioning. prev_override
        feeds an explicit previous-frame sequence [n_mels, L] instead of the
        shifted target.
        """
        length = frame_inputs.n_frames
        target = np.asarray(target_mel, dtype=np.float32)
        if target.shape != (length, self.config.n_mels):
            raise T.ShapeError(
                f"target mel shape {target.shape} != ({length}, {self.config.n_mels})")
        filter_input, source_cond, styles = self.conditioning(
            frame_inputs, pitch, style_override)
        if prev_override is not None:
            if prev_override.shape != (self.config.n_mels, length):
                raise T.ShapeError(
                    f"prev override shape {prev_override.shape} != "
                    f"({self.config.n_mels}, {length})")
            prev = prev_override.astype(np.float32)
        else:
            prev = np.zeros((self.config.n_mels, length), dtype=np.float32)
            prev[:, 1:] = target.T[:, :-1]
            prev[:, 0] = np.float32(self.config.mel_mean)
        if history_noise > 0.0:
            if rng is None:
                raise ValueError("history_noise requires an rng")
            element = rng.normal(0.0, history_noise, size=prev.shape)
            level = rng.normal(0.0, history_noise, size=(1, length))
            prev = prev + (element + level).astype(np.float32)
        filter_out = self.filter_branch(filter_input)
        source_out = self.source_branch(prev, source_cond)
        return T.add(filter_out, source_out), filter_out, source_out, styles

    def decode(self, frame_inputs: FrameInputs, pitch: PitchInput,
               style_override: Optional[StyleBundle] = None,
               token_override: Optional[dict] = None,
               window: Optional[int] = None):
        """Free-running decode; returns (mel [L, n_mels] float32, styles)."""
        cfg = self.config
        length = frame_inputs.n_frames
        filter_input, source_cond, styles = self.conditioning(
            frame_inputs, pitch, style_override, token_override)
        filter_out = self.filter_branch(filter_input).data
        cond_data = source_cond.data
        r = self.source_receptive_field if window is None else window
        mel = np.zeros((cfg.n_mels, length), dtype=np.float32)
        prev = np.full((cfg.n_mels, length), np.float32(cfg.mel_mean),
                       dtype=np.float32)
        for t in range(length):
            if t > 0:
                prev[:, t] = mel[:, t - 1]
            a = max(0, t - r + 1)
            src = self.source_branch(prev[:, a:t + 1],
                                     Tensor(cond_data[:, a:t + 1].copy()))
            mel[:, t] = filter_out[:, t] + src.data[:, -1]
        return mel.T.copy(), styles


def synthesize(frame_inputs: FrameInputs, pitch: PitchInput,
               model: AcousticModel,
               style_override: Optional[StyleBundle] = None,
               seed: int = 0,
               token_override: Optional[dict] = None) -> SynthesisResult:
    """Render a mel spectrogram; deterministic for fixed inputs and weights.

    The returned style scores are exactly the ones consumed by the decoders
    (overrides included), so they can be edited and replayed."""
    mel, styles = model.decode(frame_inputs, pitch, style_override, token_override)
    return SynthesisResult(mel=MelSpectrogram(frames=mel),
                           style_scores=styles,
                           pitch_path=pitch.path,
                           seed=int(seed))


def save_model(path, model: AcousticModel, training_step: int = 0,
               rng_state: bytes = b"") -> None:
    params = {name: t.data for name, t in model.named_parameters().items()}
    ckpt = Checkpoint(params=params, training_step=training_step,
                      rng_state=rng_state, config=model.config.to_dict())
    save_checkpoint(path, ckpt)


def load_model(path) -> tuple[AcousticModel, Checkpoint]:
    ckpt = load_checkpoint(path)
    config = ModelConfig.from_dict(ckpt.config)
    model = AcousticModel(config)
    own = model.named_parameters()
    if set(own) != set(ckpt.params):
        missing = set(own) ^ set(ckpt.params)
        raise CheckpointFormatError(
            f"parameter names do not match the architecture: {sorted(missing)[:4]}")
    for name, tensor in own.items():
        stored = ckpt.params[name]
        if stored.shape != tensor.data.shape:
            raise CheckpointFormatError(
                f"parameter {name}: shape {stored.shape} != {tensor.data.shape}")
        tensor.data = stored.astype(np.float32).copy()
    return model, ckpt
