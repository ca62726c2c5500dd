from . import tensor
from .tensor import (
    Tensor,
    ShapeError,
    NonFiniteError,
    GradientError,
    scaled_dot_attention,
)
from .layers import Module, Embedding, Affine, ConvGLU, ConvGLUStack
from .optim import Adam
from .gradcheck import grad_check
from .checkpoint import (
    Checkpoint,
    CheckpointError,
    CheckpointFormatError,
    CheckpointVersionError,
    save_checkpoint,
    load_checkpoint,
)

__all__ = [
    "tensor", "Tensor", "ShapeError", "NonFiniteError", "GradientError",
    "scaled_dot_attention", "Module", "Embedding", "Affine", "ConvGLU",
    "ConvGLUStack", "Adam", "grad_check", "Checkpoint", "CheckpointError",
    "CheckpointFormatError", "CheckpointVersionError", "save_checkpoint",
    "load_checkpoint",
]
