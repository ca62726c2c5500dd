"""Differentiable layers: embeddings, affine maps, gated conv stacks.

All sequence layers use the [channels, length] layout. Weights initialize
uniformly in +-sqrt(1/fan_in) from a caller-supplied numpy Generator so a
model build is fully determined by its seed.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Tensor


def _uniform_init(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(np.float32)


class Module:
    """Parameter container; children discovered from attribute order."""

    def named_parameters(self, prefix: str = "") -> dict[str, Tensor]:
        out: dict[str, Tensor] = {}
        for name, value in vars(self).items():
            key = f"{prefix}{name}"
            if isinstance(value, Tensor):
                if value.requires_grad:
                    out[key] = value
            elif isinstance(value, Module):
                out.update(value.named_parameters(f"{key}."))
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        out.update(item.named_parameters(f"{key}.{i}."))
                    elif isinstance(item, Tensor) and item.requires_grad:
                        out[f"{key}.{i}"] = item
        return out

    def parameters(self) -> list[Tensor]:
        return list(self.named_parameters().values())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def astype(self, dtype) -> "Module":
        """Cast all parameters in place (float64 for gradient checking)."""
        for p in self.parameters():
            p.data = p.data.astype(dtype)
            p.grad = None
        return self


class Embedding(Module):
    def __init__(self, num_embeddings: int, dim: int, rng: np.random.Generator):
        self.table = Tensor(_uniform_init(rng, (num_embeddings, dim), dim),
                            requires_grad=True)

    @property
    def num_embeddings(self) -> int:
        return self.table.shape[0]

    @property
    def dim(self) -> int:
        return self.table.shape[1]

    def forward(self, ids) -> Tensor:
        return T.embedding(self.table, ids)


class Affine(Module):
    """Per-frame linear map on [in, L] sequences."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.weight = Tensor(_uniform_init(rng, (out_dim, in_dim), in_dim),
                             requires_grad=True)
        self.bias = Tensor(np.zeros(out_dim, np.float32), requires_grad=True)

    def forward(self, x: Tensor) -> Tensor:
        return T.add_bias(T.matmul(self.weight, x), self.bias)


class ConvGLU(Module):
    """Length-preserving 1-D convolution gated by a sigmoid half.

    The convolution produces 2*out_channels; the first half is multiplied
    by the sigmoid of the second half.
    """

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 rng: np.random.Generator, causal: bool = False):
        if kernel_size < 1 or kernel_size % 2 == 0:
            raise ValueError(f"kernel size must be odd and positive, got {kernel_size}")
        fan_in = in_channels * kernel_size
        self.weight = Tensor(
            _uniform_init(rng, (2 * out_channels, in_channels, kernel_size), fan_in),
            requires_grad=True)
        self.bias = Tensor(np.zeros(2 * out_channels, np.float32), requires_grad=True)
        self.causal = causal

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0] // 2

    @property
    def kernel_size(self) -> int:
        return self.weight.shape[2]

    def forward(self, x: Tensor) -> Tensor:
        pad = "causal" if self.causal else "same"
        return T.glu(T.conv1d(x, self.weight, self.bias, padding=pad))


class ConvGLUStack(Module):
    """Stack of ConvGLU layers; widths/kernels given per layer."""

    def __init__(self, in_channels: int, widths, kernels,
                 rng: np.random.Generator, causal: bool = False):
        widths = list(widths)
        kernels = list(kernels)
        if len(widths) != len(kernels):
            raise ValueError("widths and kernels must have equal length")
        self.layers = []
        prev = in_channels
        for width, kernel in zip(widths, kernels):
            self.layers.append(ConvGLU(prev, width, kernel, rng, causal=causal))
            prev = width

    def describe(self) -> dict:
        return {
            "depth": len(self.layers),
            "in_channels": self.layers[0].in_channels if self.layers else 0,
            "widths": [l.out_channels for l in self.layers],
            "kernels": [l.kernel_size for l in self.layers],
        }

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = layer.forward(x)
        return x
