import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svslab.nn import Tensor, grad_check
from svslab.nn import tensor as T
from svslab.style_tokens import (
    StyleBank,
    StyleEditError,
    StyleScore,
    StyleTokenModule,
    compute_style,
    edit_ramp_token,
    edit_scale_token,
    style_score_from_dict,
    style_score_to_dict,
)


def naive_matmul(a, b):
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            out[i, j] = sum(float(a[i, k]) * float(b[k, j])
                            for k in range(a.shape[1]))
    return out


def make_bank(n=4, d=8, seed=0):
    return StyleBank(n, d, np.random.default_rng(seed))


class TestComputeStyle:
    def test_zero_query_uniform_scores_mean_values(self):
        bank = make_bank()
        q = Tensor(np.zeros((5, 8), np.float32))
        score, tokens = compute_style(q, bank)
        npt.assert_allclose(score.scores, 0.25, atol=1e-7)
        npt.assert_allclose(tokens.values,
                            np.repeat(bank.values.data.mean(axis=0, keepdims=True),
                                      5, axis=0), atol=1e-6)
        assert not score.edited

    def test_single_token_repeats_value_row(self):
        bank = make_bank(n=1)
        q = Tensor(np.random.default_rng(1).normal(size=(6, 8)).astype(np.float32))
        score, tokens = compute_style(q, bank)
        assert np.all(score.scores == 1.0)
        npt.assert_allclose(tokens.values, np.repeat(bank.values.data, 6, axis=0),
                            atol=1e-7)

    def test_retrieval_matches_naive_matmul(self):
        bank = make_bank()
        q = Tensor(np.random.default_rng(2).normal(size=(8, 8)).astype(np.float32))
        score, tokens = compute_style(q, bank)
        npt.assert_allclose(tokens.values,
                            naive_matmul(score.scores, bank.values.data),
                            atol=1e-6)

    def test_token_permutation_equivariance_exact(self):
        bank = make_bank()
        q = Tensor(np.random.default_rng(3).normal(size=(7, 8)).astype(np.float32))
        score, _ = compute_style(q, bank)
        perm = np.array([3, 1, 0, 2])
        permuted = make_bank()
        permuted.keys.data = bank.keys.data[perm].copy()
        permuted.values.data = bank.values.data[perm].copy()
        score_p, _ = compute_style(q, permuted)
        assert np.array_equal(score.scores[:, perm], score_p.scores)


class TestStyleEncoder:
    def test_length_one_input(self):
        module = StyleTokenModule("text", 6, 3, 8, 4, np.random.default_rng(0))
        content = Tensor(np.random.default_rng(1).normal(size=(6, 1)).astype(np.float32))
        singer = Tensor(np.random.default_rng(2).normal(size=3).astype(np.float32))
        s, t = module.forward(content, singer)
        assert s.shape == (1, 4)
        assert t.shape == (1, 8)

    def test_zero_length_rejected(self):
        module = StyleTokenModule("text", 6, 3, 8, 4, np.random.default_rng(0))
        with pytest.raises(T.ShapeError):
            module.forward(Tensor(np.zeros((6, 0), np.float32)),
                           Tensor(np.zeros(3, np.float32)))

    def test_zero_encoder_weights_give_uniform_scores(self):
        module = StyleTokenModule("text", 6, 3, 8, 4, np.random.default_rng(0))
        for layer in module.encoder.stack.layers:
            layer.weight.data[:] = 0.0
            layer.bias.data[:] = 0.0
        content = Tensor(np.random.default_rng(1).normal(size=(6, 5)).astype(np.float32))
        singer = Tensor(np.random.default_rng(2).normal(size=3).astype(np.float32))
        s, _ = module.forward(content, singer)
        npt.assert_allclose(s.data, 0.25, atol=1e-7)

    def test_matches_layerwise_composition_oracle(self):
        module = StyleTokenModule("text", 6, 3, 8, 4, np.random.default_rng(4))
        rng = np.random.default_rng(5)
        content = rng.normal(size=(6, 16)).astype(np.float32)
        singer = rng.normal(size=3).astype(np.float32)
        q = module.encoder.forward(Tensor(content), Tensor(singer))
        manual = Tensor(np.concatenate(
            [content, np.repeat(singer[:, None], 16, axis=1)], axis=0))
        for layer in module.encoder.stack.layers:
            manual = layer.forward(manual)
        npt.assert_allclose(q.data, manual.data.T, atol=1e-5)

    def test_gradients_reach_keys_values_and_encoder(self):
        module = StyleTokenModule("text", 4, 2, 6, 3,
                                  np.random.default_rng(6)).astype(np.float64)
        rng = np.random.default_rng(7)
        content = Tensor(rng.normal(size=(4, 5)), dtype=np.float64)
        singer = Tensor(rng.normal(size=2), dtype=np.float64)

        def fn():
            _, t_seq = module.forward(content, singer)
            return T.mean(T.mul(t_seq, t_seq))

        err = grad_check(fn, module.parameters(), eps=1e-4)
        assert err < 1e-3
        names = module.named_parameters()
        assert any(k.startswith("bank.keys") for k in names)
        assert any(k.startswith("bank.values") for k in names)
        assert any(k.startswith("encoder.") for k in names)
        for name, p in names.items():
            assert p.grad is not None and np.any(p.grad != 0.0), name


def make_score(rows):
    return StyleScore(side="text", scores=np.asarray(rows, dtype=np.float32))


class TestEdits:
    def test_scale_single_row(self):
        score = make_score([[0.7, 0.1, 0.1, 0.1]])
        out = edit_scale_token(score, token=0, factor=2.0, frame_range=(0, 1))
        npt.assert_allclose(out.scores, [[1.4, 0.1, 0.1, 0.1]], atol=1e-7)
        assert out.edited
        # original untouched
        npt.assert_allclose(score.scores, [[0.7, 0.1, 0.1, 0.1]])

    def test_identity_factor_marks_edited(self):
        score = make_score([[0.25] * 4] * 3)
        out = edit_scale_token(score, token=2, factor=1.0, frame_range=(0, 3))
        assert out.edited
        npt.assert_allclose(out.scores, score.scores)

    def test_scale_is_linear_in_retrieval(self):
        bank = make_bank()
        q = Tensor(np.random.default_rng(8).normal(size=(6, 8)).astype(np.float32))
        score, tokens = compute_style(q, bank)
        edited = edit_scale_token(score, token=0, factor=0.5, frame_range=(0, 6))
        t_edit = naive_matmul(edited.scores, bank.values.data)
        t_expected = tokens.values - 0.5 * np.outer(score.scores[:, 0],
                                                    bank.values.data[0])
        npt.assert_allclose(t_edit, t_expected, atol=1e-5)

    def test_ramp_multipliers(self):
        score = make_score([[1.0, 1.0]] * 3)
        out = edit_ramp_token(score, token=0, factor_start=0.5, factor_end=2.0,
                              frame_range=(0, 3))
        npt.assert_allclose(out.scores[:, 0], [0.5, 1.25, 2.0], atol=1e-6)
        npt.assert_allclose(out.scores[:, 1], 1.0)

    def test_constant_ramp_equals_scale(self):
        score = make_score(np.random.default_rng(9).uniform(0, 1, (5, 4)))
        a = edit_ramp_token(score, 1, 0.7, 0.7, (1, 4))
        b = edit_scale_token(score, 1, 0.7, (1, 4))
        npt.assert_allclose(a.scores, b.scores, atol=1e-7)

    def test_crescendo_quadruples_last_frame_contribution(self):
        bank = make_bank()
        length = 8
        constant = np.full((length, 4), 0.25, dtype=np.float32)
        score = StyleScore(side="text", scores=constant)
        edited = edit_ramp_token(score, token=1, factor_start=0.5,
                                 factor_end=2.0, frame_range=(0, length))
        contrib = np.outer(edited.scores[:, 1], bank.values.data[1])
        ratio = contrib[-1] / contrib[0]
        npt.assert_allclose(ratio, 4.0, rtol=1e-5)

    def test_range_validation(self):
        score = make_score([[0.5, 0.5]] * 4)
        with pytest.raises(StyleEditError):
            edit_scale_token(score, token=5, factor=1.0, frame_range=(0, 4))
        with pytest.raises(StyleEditError):
            edit_scale_token(score, token=0, factor=1.0, frame_range=(2, 2))
        with pytest.raises(StyleEditError):
            edit_scale_token(score, token=0, factor=1.0, frame_range=(0, 9))
        with pytest.raises(StyleEditError):
            edit_scale_token(score, token=0, factor=-0.5, frame_range=(0, 4))

    def test_renormalize_flag(self):
        score = make_score([[0.5, 0.5]])
        out = edit_scale_token(score, 0, 3.0, (0, 1), renormalize=True)
        npt.assert_allclose(out.scores.sum(axis=1), 1.0, atol=1e-6)


class TestUneditedInvariant:
    @settings(deadline=None, max_examples=25)
    @given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(1, 12))
    def test_rows_are_simplex_points(self, seed, n_tokens_pow, length):
        rng = np.random.default_rng(seed)
        n_tokens = 2 ** n_tokens_pow
        module = StyleTokenModule("pitch", 5, 2, 8, n_tokens, rng)
        content = Tensor(rng.normal(size=(5, length)).astype(np.float32))
        singer = Tensor(rng.normal(size=2).astype(np.float32))
        s, _ = module.forward(content, singer)
        assert np.all(s.data >= 0.0)
        npt.assert_allclose(s.data.sum(axis=1), 1.0, atol=1e-6)


class TestDocumentFormat:
    def test_roundtrip(self):
        score = make_score(np.random.default_rng(0).uniform(0, 1, (6, 4)))
        doc = style_score_to_dict(score)
        assert doc["side"] == "text" and doc["frames"] == 6 and doc["n_tokens"] == 4
        back = style_score_from_dict(doc)
        npt.assert_allclose(back.scores, score.scores, atol=0)
        assert back.edited == score.edited

    def test_negative_scores_rejected(self):
        doc = {"side": "text", "n_tokens": 2, "frames": 1,
               "scores": [[0.5, -0.1]], "edited": True}
        with pytest.raises(ValueError):
            style_score_from_dict(doc)

    def test_shape_mismatch_rejected(self):
        doc = {"side": "pitch", "n_tokens": 2, "frames": 3,
               "scores": [[0.5, 0.5]], "edited": False}
        with pytest.raises(ValueError):
            style_score_from_dict(doc)
