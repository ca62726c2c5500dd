import numpy as np
import pytest

from svslab import (
    ModelConfig,
    AcousticModel,
    generate_synthetic_corpus,
    parse_score,
    expand_frames,
)
from svslab.train import build_training_set, train_model

TINY_CONFIG = dict(
    n_phonemes=20, n_singers=2, d_text=8, d_pitch=8, d_singer=4,
    d_style=8, d_decoder=8, n_mels=12, init_seed=1,
)

# frozen hyperparameters for the overfit/reconstruction pipeline
CORPUS_SEED = 11
INIT_SEED = 2
TRAIN_SEED = 0
TRAIN_STEPS = 500
TRAIN_LR = 5e-3
RECON_SEED = 123
GL_ITERS = 40


@pytest.fixture
def tiny_model():
    return AcousticModel(ModelConfig(**TINY_CONFIG))


@pytest.fixture
def tiny_inputs():
    score = parse_score({
        "singer_id": 0,
        "notes": [
            {"pitch": 60, "start": 0, "dur": 10,
             "phonemes": {"onset": "l", "vowel": "a"}},
            {"pitch": 64, "start": 12, "dur": 8, "phonemes": {"vowel": "i"}},
        ],
    })
    return expand_frames(score)


@pytest.fixture(scope="session")
def toy_corpus():
    return generate_synthetic_corpus(5, seed=CORPUS_SEED)


@pytest.fixture(scope="session")
def toy_examples(toy_corpus):
    return build_training_set(toy_corpus)


@pytest.fixture(scope="session")
def trained_models(toy_examples):
    """The two acceptance configurations, trained once per test session."""
    dual_cfg = ModelConfig(init_seed=INIT_SEED, use_style_tokens=False)
    styled_cfg = ModelConfig(init_seed=INIT_SEED, use_style_tokens=True)
    dual, dual_losses = train_model(toy_examples, dual_cfg, steps=TRAIN_STEPS,
                                    seed=TRAIN_SEED, lr=TRAIN_LR)
    styled, styled_losses = train_model(toy_examples, styled_cfg,
                                        steps=TRAIN_STEPS, seed=TRAIN_SEED,
                                        lr=TRAIN_LR)
    return {
        "dual": (dual, dual_losses),
        "styled": (styled, styled_losses),
    }
