"""Frame-level style tokens.

A small bank of trainable key/value vectors is queried by a gated-conv
encoder over the content sequence (text or pitch embedding, concatenated
with the broadcast singer vector). The resulting attention matrix — one
row-stochastic score row per frame — is the user-editable expression
surface: scaling or ramping one token's column scales exactly that token's
contribution to the retrieved sequence, because retrieval is linear.

Edits deliberately do NOT renormalize rows; a renormalize flag exists for
experimentation but leaks the edit into the other tokens' contributions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .nn import Module, ConvGLUStack, Tensor, scaled_dot_attention
from .nn import tensor as T

TEXT_SIDE = "text"
PITCH_SIDE = "pitch"
SIDES = (TEXT_SIDE, PITCH_SIDE)


class StyleEditError(ValueError):
    """Edit arguments outside the score's token/frame domain."""


@dataclass
class StyleScore:
    """Per-frame attention over style tokens; rows are simplex points until edited."""

    side: str
    scores: np.ndarray  # float32 [L, N]
    edited: bool = False

    @property
    def n_frames(self) -> int:
        return self.scores.shape[0]

    @property
    def n_tokens(self) -> int:
        return self.scores.shape[1]


@dataclass
class StyleTokenSequence:
    values: np.ndarray  # float32 [L, d]


@dataclass
class StyleBundle:
    """Text- and pitch-side scores travelling together through an edit loop."""

    text: StyleScore | None = None
    pitch: StyleScore | None = None

    def sides(self) -> dict[str, StyleScore]:
        out = {}
        if self.text is not None:
            out[TEXT_SIDE] = self.text
        if self.pitch is not None:
            out[PITCH_SIDE] = self.pitch
        return out


class StyleBank(Module):
    """N trainable key/value token vectors, init N(0, 1/d)."""

    def __init__(self, n_tokens: int, dim: int, rng: np.random.Generator):
        if n_tokens < 1:
            raise ValueError(f"need at least one style token, got {n_tokens}")
        scale = 1.0 / np.sqrt(dim)
        self.keys = Tensor((rng.standard_normal((n_tokens, dim)) * scale).astype(np.float32),
                           requires_grad=True)
        self.values = Tensor((rng.standard_normal((n_tokens, dim)) * scale).astype(np.float32),
                             requires_grad=True)

    @property
    def n_tokens(self) -> int:
        return self.keys.shape[0]

    @property
    def dim(self) -> int:
        return self.keys.shape[1]


class StyleEncoder(Module):
    """Gated-conv stack mapping cat(content, singer) to query vectors."""

    def __init__(self, content_dim: int, singer_dim: int, out_dim: int,
                 rng: np.random.Generator, kernels=(5, 3, 1)):
        widths = [out_dim] * len(kernels)
        self.stack = ConvGLUStack(content_dim + singer_dim, widths, kernels, rng)

    def forward(self, content: Tensor, singer: Tensor) -> Tensor:
        """content: [d_c, L], singer: [d_s] -> queries [L, d]."""
        if content.data.ndim != 2 or content.shape[1] < 1:
            raise T.ShapeError(
                f"style encoder needs a [channels, frames>=1] content sequence, "
                f"got {content.shape}")
        length = content.shape[1]
        singer_seq = T.broadcast_col(singer, length)
        hidden = self.stack.forward(T.concat([content, singer_seq], axis=0))
        return T.transpose(hidden)


class StyleTokenModule(Module):
    """Encoder plus bank for one side (text or pitch)."""

    def __init__(self, side: str, content_dim: int, singer_dim: int, dim: int,
                 n_tokens: int, rng: np.random.Generator, kernels=(5, 3, 1)):
        if side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {side!r}")
        self.side = side
        self.encoder = StyleEncoder(content_dim, singer_dim, dim, rng, kernels)
        self.bank = StyleBank(n_tokens, dim, rng)

    def forward(self, content: Tensor, singer: Tensor,
                score_override: np.ndarray | None = None) -> tuple[Tensor, Tensor]:
        """Returns (scores [L, N], retrieved sequence [L, d]).

        With score_override the encoder/attention is bypassed and the given
        matrix (an edited score) is multiplied against the value bank.
        """
        if score_override is not None:
            s = Tensor(np.asarray(score_override, dtype=np.float32))
            if s.shape != (content.shape[1], self.bank.n_tokens):
                raise T.ShapeError(
                    f"score override shape {s.shape} != "
                    f"({content.shape[1]}, {self.bank.n_tokens})")
            return s, T.matmul(s, self.bank.values)
        q = self.encoder.forward(content, singer)
        return scaled_dot_attention(q, self.bank.keys, self.bank.values)


def compute_style(q: Tensor, bank: StyleBank,
                  side: str = TEXT_SIDE) -> tuple[StyleScore, StyleTokenSequence]:
    """Attention of queries against a bank, wrapped in the edit-surface types."""
    scores, out = scaled_dot_attention(q, bank.keys, bank.values)
    return (StyleScore(side=side, scores=scores.data.copy(), edited=False),
            StyleTokenSequence(values=out.data.copy()))


def _check_edit(score: StyleScore, token: int, frame_range) -> tuple[int, int]:
    a, b = frame_range
    if not (0 <= token < score.n_tokens):
        raise StyleEditError(
            f"token {token} out of range [0, {score.n_tokens})")
    if not (0 <= a < b <= score.n_frames):
        raise StyleEditError(
            f"frame range [{a}, {b}) invalid for {score.n_frames} frames")
    return int(a), int(b)


def _apply_factors(score: StyleScore, token: int, a: int, b: int,
                   factors: np.ndarray, renormalize: bool) -> StyleScore:
    out = score.scores.astype(np.float32, copy=True)
    out[a:b, token] *= factors.astype(np.float32)
    if renormalize:
        sums = out[a:b].sum(axis=1, keepdims=True)
        np.divide(out[a:b], sums, out=out[a:b], where=sums > 0)
    return replace(score, scores=out, edited=True)


def edit_scale_token(score: StyleScore, token: int, factor: float,
                     frame_range, renormalize: bool = False) -> StyleScore:
    """Multiply one token's score by a constant over [a, b)."""
    a, b = _check_edit(score, token, frame_range)
    if factor < 0:
        raise StyleEditError(f"factor must be >= 0, got {factor}")
    factors = np.full(b - a, factor, dtype=np.float32)
    return _apply_factors(score, token, a, b, factors, renormalize)


def edit_ramp_token(score: StyleScore, token: int, factor_start: float,
                    factor_end: float, frame_range,
                    renormalize: bool = False) -> StyleScore:
    """Linearly interpolate the per-frame factor from start to end over [a, b)."""
    a, b = _check_edit(score, token, frame_range)
    if factor_start < 0 or factor_end < 0:
        raise StyleEditError(
            f"factors must be >= 0, got {factor_start}, {factor_end}")
    factors = np.linspace(factor_start, factor_end, b - a, dtype=np.float64)
    return _apply_factors(score, token, a, b, factors, renormalize)


def style_score_to_dict(score: StyleScore) -> dict:
    return {
        "side": score.side,
        "n_tokens": score.n_tokens,
        "frames": score.n_frames,
        "scores": [[float(v) for v in row] for row in score.scores],
        "edited": bool(score.edited),
    }


def bundle_to_dict(bundle: StyleBundle) -> dict:
    return {
        TEXT_SIDE: style_score_to_dict(bundle.text) if bundle.text else None,
        PITCH_SIDE: style_score_to_dict(bundle.pitch) if bundle.pitch else None,
    }


def bundle_from_dict(doc: dict) -> StyleBundle:
    text = doc.get(TEXT_SIDE)
    pitch = doc.get(PITCH_SIDE)
    return StyleBundle(
        text=style_score_from_dict(text) if text else None,
        pitch=style_score_from_dict(pitch) if pitch else None,
    )


def style_score_from_dict(doc: dict) -> StyleScore:
    side = doc.get("side")
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    scores = np.asarray(doc["scores"], dtype=np.float32)
    if scores.ndim != 2:
        raise ValueError(f"scores must be a 2-D matrix, got shape {scores.shape}")
    if scores.shape != (doc["frames"], doc["n_tokens"]):
        raise ValueError(
            f"scores shape {scores.shape} != (frames={doc['frames']}, "
            f"n_tokens={doc['n_tokens']})")
    if np.any(scores < 0):
        bad = int(np.argwhere(scores < 0)[0][0])
        raise ValueError(f"negative score at frame {bad}")
    return StyleScore(side=side, scores=scores, edited=bool(doc.get("edited", False)))


def correlate_tokens(scores: np.ndarray, frame_energy: np.ndarray,
                     silence_mask: np.ndarray) -> list[dict]:
    """Pearson correlation of each token's score with energy and silence.

    Helps label what each token learned: the strongest positive silence
    correlate usually tracks breath, the strongest energy correlate tracks
    intensity. Token roles vary per training run, so this is an analysis
    aid, not a contract.
    """
    def pearson(x, y):
        x = x - x.mean()
        y = y - y.mean()
        denom = np.sqrt((x * x).sum() * (y * y).sum())
        return float((x * y).sum() / denom) if denom > 0 else 0.0

    report = []
    for tok in range(scores.shape[1]):
        col = scores[:, tok].astype(np.float64)
        report.append({
            "token": tok,
            "r_energy": pearson(col, frame_energy.astype(np.float64)),
            "r_silence": pearson(col, silence_mask.astype(np.float64)),
        })
    return report
