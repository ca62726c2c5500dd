"""Controllable singing voice synthesis at desk scale.

Pipeline: a frame-aligned music score is synthesized to a log-mel
spectrogram by a source-filter autoregressive model whose expression is
steered by editable frame-level style-token scores and whose pitch input
can be either the score's MIDI sequence or an f0 contour extracted from a
previous render, edited, and fed back.
"""

from .constants import HOP_LENGTH, N_MELS, SAMPLE_RATE, WIN_LENGTH
from .score import (
    FrameInputs,
    MusicScore,
    Note,
    PhonemeInventory,
    ScoreError,
    Syllable,
    expand_frames,
    parse_score,
)
from .f0 import F0Contour
from .mel import MelSpectrogram, load_mel, save_mel
from .dual_pitch import PitchInput, PitchPath, select_path
from .style_tokens import (
    StyleBank,
    StyleBundle,
    StyleScore,
    StyleTokenSequence,
    compute_style,
    edit_ramp_token,
    edit_scale_token,
)
from .model import AcousticModel, ModelConfig, SynthesisResult, load_model, save_model, synthesize
from .dsp import Waveform, extract_f0, mel_analyze, read_wav, vocode, write_wav
from .f0_edit import apply_f0_edits, parse_edit_script
from .metrics import f0_rmse_vuv, mcd
from .corpus import SyntheticSong, generate_synthetic_corpus
from .train import (
    TrainExample,
    build_training_set,
    reconstruction_analysis,
    train_model,
    train_step,
)

__version__ = "0.1.0"
