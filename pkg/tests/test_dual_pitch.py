import numpy as np
import numpy.testing as npt
import pytest

from svslab.constants import REST_PITCH_ID
from svslab.dual_pitch import (
    F0ContourEncoder,
    MidiPitchEncoder,
    PitchPath,
    featurize_contour,
    select_path,
)
from svslab.f0 import ContourError, F0Contour
from svslab.nn import ShapeError, Tensor


def midi_encoder(seed=0, dim=8):
    return MidiPitchEncoder(dim, np.random.default_rng(seed))


def f0_encoder(seed=0, dim=8):
    return F0ContourEncoder(dim, np.random.default_rng(seed))


class TestMidiEncoder:
    def test_all_rest_constant_interior(self):
        enc = midi_encoder()
        out = enc.forward(np.full(12, REST_PITCH_ID)).data
        # same-padding boundary frames may differ; interior must be constant
        interior = out[:, 4:-4]
        npt.assert_allclose(interior - interior[:, :1], 0.0, atol=1e-6)

    def test_length_one(self):
        assert midi_encoder().forward(np.array([60])).shape == (8, 1)

    def test_out_of_range_id(self):
        with pytest.raises(ShapeError):
            midi_encoder().forward(np.array([129]))

    def test_matches_composition_oracle(self):
        enc = midi_encoder(3)
        ids = np.random.default_rng(4).integers(0, 129, size=9)
        got = enc.forward(ids).data
        emb = enc.embedding.table.data[ids].T
        manual = Tensor(emb.copy())
        for layer in enc.stack.layers:
            manual = layer.forward(manual)
        npt.assert_allclose(got, manual.data, atol=1e-5)


class TestF0Encoder:
    def test_featurization(self):
        contour = F0Contour(np.array([0.0, 440.0, 880.0, 110.0]))
        feat = featurize_contour(contour)
        npt.assert_allclose(feat[0], [0.0, 0.0, 0.25, -0.5], atol=1e-6)
        npt.assert_allclose(feat[1], [0.0, 1.0, 1.0, 1.0])

    def test_featurization_clamps(self):
        contour = F0Contour(np.array([1500.0, 40.0]))
        feat = featurize_contour(contour)
        assert np.all(feat[0] <= 1.0) and np.all(feat[0] >= -1.0)

    def test_negative_f0_rejected(self):
        contour = F0Contour.__new__(F0Contour)
        contour.f0_hz = np.array([-5.0])
        with pytest.raises(ContourError):
            featurize_contour(contour)

    def test_all_unvoiced_equals_zero_input_response(self):
        enc = f0_encoder(1)
        out = enc.forward(F0Contour(np.zeros(10))).data
        zero = enc.stack.forward(Tensor(np.zeros((2, 10), np.float32))).data
        assert np.array_equal(out, zero)
        interior = out[:, 4:-4]
        npt.assert_allclose(interior - interior[:, :1], 0.0, atol=1e-6)

    def test_constant_440_constant_interior(self):
        enc = f0_encoder(2)
        out = enc.forward(F0Contour(np.full(12, 440.0))).data
        interior = out[:, 4:-4]
        npt.assert_allclose(interior - interior[:, :1], 0.0, atol=1e-6)

    def test_matches_composition_oracle(self):
        enc = f0_encoder(5)
        rng = np.random.default_rng(6)
        values = np.where(rng.random(9) < 0.3, 0.0, rng.uniform(80, 900, 9))
        contour = F0Contour(values)
        got = enc.forward(contour).data
        manual = Tensor(featurize_contour(contour))
        for layer in enc.stack.layers:
            manual = layer.forward(manual)
        npt.assert_allclose(got, manual.data, atol=1e-5)


class TestInterchangeability:
    def test_same_output_shape(self):
        length = 11
        midi_out = midi_encoder().forward(np.full(length, 60))
        f0_out = f0_encoder().forward(F0Contour(np.full(length, 261.0)))
        assert midi_out.shape == f0_out.shape

    def test_same_hyperparameters_except_first_input(self):
        m, f = midi_encoder().describe(), f0_encoder().describe()
        assert m["depth"] == f["depth"]
        assert m["widths"] == f["widths"]
        assert m["kernels"] == f["kernels"]
        assert m["in_channels"] == 8   # embedding width
        assert f["in_channels"] == 2   # log-f0 + voiced flag


class TestPathSelection:
    def test_seeded_draws_reproducible(self):
        rng = np.random.default_rng(42)
        first = [select_path("train", rng) for _ in range(8)]
        rng = np.random.default_rng(42)
        second = [select_path("train", rng) for _ in range(8)]
        assert first == second

    def test_forced_inference(self):
        assert select_path("infer", forced=PitchPath.F0) is PitchPath.F0
        assert select_path("infer", forced=PitchPath.MIDI) is PitchPath.MIDI

    def test_infer_without_forced_errors(self):
        with pytest.raises(ValueError):
            select_path("infer")

    def test_train_without_rng_errors(self):
        with pytest.raises(ValueError):
            select_path("train")

    def test_balanced_frequencies(self):
        rng = np.random.default_rng(1234)
        draws = [select_path("train", rng) for _ in range(10_000)]
        midi_fraction = sum(d is PitchPath.MIDI for d in draws) / 10_000
        assert abs(midi_fraction - 0.5) <= 0.02

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            select_path("validate")
