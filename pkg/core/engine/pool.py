from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.engine.tensor import Tensor, as_tensor
from core.errors import MissingContextError, ShapeError


@dataclass
class AvgPoolContext:
    input_shape: Tuple[int, ...]
    size: int


def avgpool2d_forward(x: Tensor, size: int = 2) -> Tuple[Tensor, AvgPoolContext]:
    """Non-overlapping size x size mean pooling; trailing rows/cols that do not fill a window are dropped."""
    x = as_tensor(x)
    if x.ndim != 4:
        raise ShapeError(f"avgpool2d expects x[N,C,H,W], got {tuple(x.shape)}")
    n, c, h, w = x.shape
    h_out, w_out = h // size, w // size
    if h_out == 0 or w_out == 0:
        raise ShapeError(f"input {tuple(x.shape)} too small for {size}x{size} pooling")
    cropped = x[:, :, :h_out * size, :w_out * size]
    out = cropped.reshape(n, c, h_out, size, w_out, size).mean(axis=(3, 5))
    return out, AvgPoolContext(input_shape=x.shape, size=size)


def avgpool2d_backward(ctx: Optional[AvgPoolContext], grad_out: Tensor) -> Tensor:
    if ctx is None:
        raise MissingContextError("avgpool2d_backward called without a forward context")
    grad_out = as_tensor(grad_out)
    n, c, h, w = ctx.input_shape
    s = ctx.size
    expected = (n, c, h // s, w // s)
    if grad_out.shape != expected:
        raise ShapeError(f"grad_out shape {tuple(grad_out.shape)} does not match forward output {expected}")
    grad_x = np.zeros(ctx.input_shape, dtype=grad_out.dtype)
    spread = np.repeat(np.repeat(grad_out, s, axis=2), s, axis=3) / (s * s)
    grad_x[:, :, :spread.shape[2], :spread.shape[3]] = spread
    return grad_x
