import math

import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svslab.nn import GradientError, NonFiniteError, ShapeError, Tensor, scaled_dot_attention
from svslab.nn import tensor as T


def rnd(shape, seed=0, dtype=np.float32):
    return np.random.default_rng(seed).normal(size=shape).astype(dtype)


class TestBasics:
    def test_shape_invariant(self):
        t = Tensor(np.ones((2, 3), np.float32))
        assert t.shape == (2, 3)
        assert t.size == 6

    def test_nonfinite_rejected(self):
        with pytest.raises(NonFiniteError):
            Tensor(np.array([1.0, np.nan], np.float32))

    def test_nonfinite_from_op(self):
        big = Tensor(np.full((2, 2), 3e38, np.float32))
        with pytest.raises(NonFiniteError) as exc:
            T.add(big, big)
        assert "add" in str(exc.value)

    def test_add_shape_error(self):
        with pytest.raises(ShapeError):
            T.add(Tensor(np.ones((2, 2), np.float32)), Tensor(np.ones(2, np.float32)))

    def test_backward_requires_scalar(self):
        with pytest.raises(ShapeError):
            Tensor(np.ones((2, 2), np.float32)).backward()


class TestAutodiff:
    def test_add_mul_chain(self):
        a = Tensor(np.array([2.0, 3.0], np.float32), requires_grad=True)
        b = Tensor(np.array([4.0, 5.0], np.float32), requires_grad=True)
        out = T.total(T.mul(a, b))
        out.backward()
        npt.assert_allclose(a.grad, [4.0, 5.0])
        npt.assert_allclose(b.grad, [2.0, 3.0])

    def test_shared_operand_accumulates(self):
        a = Tensor(np.array([3.0], np.float32), requires_grad=True)
        out = T.total(T.mul(a, a))
        out.backward()
        npt.assert_allclose(a.grad, [6.0])

    def test_same_tensor_both_sides_of_add(self):
        a = Tensor(np.array([1.5], np.float32), requires_grad=True)
        T.total(T.add(a, a)).backward()
        npt.assert_allclose(a.grad, [2.0])

    def test_matmul_grads(self):
        a = Tensor(rnd((3, 4), 1), requires_grad=True)
        b = Tensor(rnd((4, 2), 2), requires_grad=True)
        T.total(T.matmul(a, b)).backward()
        ones = np.ones((3, 2), np.float32)
        npt.assert_allclose(a.grad, ones @ b.data.T, rtol=1e-6)
        npt.assert_allclose(b.grad, a.data.T @ ones, rtol=1e-6)

    def test_embedding_grad_scatter(self):
        table = Tensor(rnd((5, 3), 3), requires_grad=True)
        out = T.embedding(table, np.array([1, 1, 4]))
        T.total(out).backward()
        expected = np.zeros((5, 3), np.float32)
        expected[1] = 2.0
        expected[4] = 1.0
        npt.assert_allclose(table.grad, expected)

    def test_embedding_out_of_range(self):
        table = Tensor(rnd((5, 3), 3))
        with pytest.raises(ShapeError):
            T.embedding(table, np.array([5]))

    def test_gradient_error_identifies_op(self):
        # forward stays finite; the gradient product overflows in backward
        small = Tensor(np.array([1e-30], np.float32), requires_grad=True)
        big1 = Tensor(np.array([1e30], np.float32))
        big2 = Tensor(np.array([1e30], np.float32))
        out = T.total(T.mul(T.mul(small, big1), big2))
        with pytest.raises(GradientError) as exc:
            out.backward()
        assert "mul" in str(exc.value)


class TestSoftmax:
    @settings(deadline=None, max_examples=60)
    @given(st.integers(1, 6), st.integers(1, 8), st.integers(0, 10 ** 6))
    def test_rows_sum_to_one(self, rows, cols, seed):
        x = Tensor(np.random.default_rng(seed).normal(scale=5.0, size=(rows, cols))
                   .astype(np.float32))
        s = T.softmax_rows(x).data
        npt.assert_allclose(s.sum(axis=1), np.ones(rows), atol=1e-6)
        assert np.all(s >= 0)

    def test_single_column_is_exactly_one(self):
        s = T.softmax_rows(Tensor(rnd((4, 1), 5))).data
        assert np.all(s == 1.0)

    def test_permutation_invariance_is_exact(self):
        x = rnd((6, 4), 9)
        perm = np.array([2, 0, 3, 1])
        s = T.softmax_rows(Tensor(x)).data
        s_perm = T.softmax_rows(Tensor(x[:, perm])).data
        assert np.array_equal(s[:, perm], s_perm)


class TestAttention:
    def test_zero_query_uniform(self):
        q = Tensor(np.zeros((3, 4), np.float32))
        k = Tensor(rnd((4, 4), 1))
        v = Tensor(rnd((4, 4), 2))
        scores, _ = scaled_dot_attention(q, k, v)
        npt.assert_allclose(scores.data, np.full((3, 4), 0.25), atol=1e-7)

    def test_hand_evaluated_softmax(self):
        # one matching key among four, d=4: logits [0.5, 0, 0, 0]
        q = Tensor(np.array([[1.0, 0, 0, 0]], np.float32))
        k = Tensor(np.array([[1.0, 0, 0, 0], [0, 0, 0, 0],
                             [0, 0, 0, 0], [0, 0, 0, 0]], np.float32))
        v = Tensor(np.eye(4, dtype=np.float32))
        scores, _ = scaled_dot_attention(q, k, v)
        e = math.exp(0.5)
        expected = np.array([e, 1, 1, 1]) / (e + 3)
        npt.assert_allclose(scores.data[0], expected, atol=1e-6)
        npt.assert_allclose(scores.data[0], [0.3547, 0.2151, 0.2151, 0.2151],
                            atol=5e-5)

    def test_single_token(self):
        q = Tensor(rnd((5, 3), 1))
        k = Tensor(rnd((1, 3), 2))
        v = Tensor(rnd((1, 3), 3))
        scores, out = scaled_dot_attention(q, k, v)
        assert np.all(scores.data == 1.0)
        npt.assert_allclose(out.data, np.repeat(v.data, 5, axis=0), atol=1e-7)

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            scaled_dot_attention(Tensor(rnd((2, 3))), Tensor(rnd((4, 5))),
                                 Tensor(rnd((4, 5))))


class TestGLU:
    @settings(deadline=None, max_examples=40)
    @given(st.integers(1, 4), st.integers(1, 9), st.integers(0, 10 ** 6))
    def test_magnitude_bounded_by_linear_path(self, channels, length, seed):
        x = np.random.default_rng(seed).normal(scale=3.0,
                                               size=(2 * channels, length))
        out = T.glu(Tensor(x.astype(np.float32))).data
        assert np.all(np.abs(out) <= np.abs(x[:channels]) + 1e-7)

    def test_zero_gate_halves(self):
        x = Tensor(np.array([[2.0], [0.0]], np.float32))
        npt.assert_allclose(T.glu(x).data, [[1.0]])


class TestConv:
    @pytest.mark.parametrize("kernel", [1, 3, 5, 7])
    def test_same_padding_preserves_length(self, kernel):
        rng = np.random.default_rng(kernel)
        x = Tensor(rng.normal(size=(2, 11)).astype(np.float32))
        w = Tensor(rng.normal(size=(3, 2, kernel)).astype(np.float32))
        b = Tensor(np.zeros(3, np.float32))
        assert T.conv1d(x, w, b, "same").shape == (3, 11)
        assert T.conv1d(x, w, b, "causal").shape == (3, 11)

    def test_even_kernel_rejected_for_same(self):
        x = Tensor(rnd((1, 4)))
        w = Tensor(rnd((1, 1, 2)))
        b = Tensor(np.zeros(1, np.float32))
        with pytest.raises(ShapeError):
            T.conv1d(x, w, b, "same")

    def test_channel_mismatch_names_shapes(self):
        x = Tensor(rnd((3, 4)))
        w = Tensor(rnd((2, 2, 3)))
        b = Tensor(np.zeros(2, np.float32))
        with pytest.raises(ShapeError) as exc:
            T.conv1d(x, w, b)
        assert "[2, L]" in str(exc.value) and "(3, 4)" in str(exc.value)

    def test_causality(self):
        rng = np.random.default_rng(0)
        x1 = rng.normal(size=(1, 8)).astype(np.float32)
        x2 = x1.copy()
        x2[:, 5:] += 1.0  # future change must not affect earlier outputs
        w = Tensor(rng.normal(size=(1, 1, 3)).astype(np.float32))
        b = Tensor(np.zeros(1, np.float32))
        y1 = T.conv1d(Tensor(x1), w, b, "causal").data
        y2 = T.conv1d(Tensor(x2), w, b, "causal").data
        assert np.array_equal(y1[:, :5], y2[:, :5])


def test_forward_determinism():
    def run():
        rng = np.random.default_rng(42)
        x = Tensor(rng.normal(size=(3, 9)).astype(np.float32))
        w = Tensor(rng.normal(size=(4, 3, 3)).astype(np.float32))
        b = Tensor(rng.normal(size=4).astype(np.float32))
        y = T.conv1d(x, w, b)
        s = T.softmax_rows(T.transpose(y))
        return T.total(s).item(), y.data.tobytes()

    first, second = run(), run()
    assert first[0] == second[0]
    assert first[1] == second[1]
