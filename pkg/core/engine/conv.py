from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.engine.tensor import Tensor, as_tensor
from core.errors import MissingContextError, ShapeError


@dataclass
class Conv2dContext:
    windows: Tensor  # [N, C, H', W', k, k] view over the padded input
    w: Tensor
    input_shape: Tuple[int, ...]
    padding: int


def conv2d_forward(x: Tensor, w: Tensor, b: Tensor, padding: int = 1) -> Tuple[Tensor, Conv2dContext]:
    """
    Stride-1 cross-correlation of x[N, C, H, W] with w[O, C, k, k] plus bias b[O].
    """
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if x.ndim != 4 or w.ndim != 4 or b.ndim != 1:
        raise ShapeError(f"conv2d expects x[N,C,H,W], w[O,C,k,k], b[O]; got {x.shape}, {w.shape}, {b.shape}")
    if x.shape[1] != w.shape[1] or w.shape[0] != b.shape[0] or w.shape[2] != w.shape[3]:
        raise ShapeError(f"conv2d shapes do not conform: x {tuple(x.shape)}, w {tuple(w.shape)}, b {tuple(b.shape)}")
    k = w.shape[2]
    if x.shape[2] + 2 * padding < k or x.shape[3] + 2 * padding < k:
        raise ShapeError(f"input {tuple(x.shape)} is smaller than kernel {k} with padding {padding}")

    padded = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = sliding_window_view(padded, (k, k), axis=(2, 3))
    # [N, C, H', W', k, k] x [O, C, k, k] -> [N, H', W', O]
    out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3]))
    out = np.ascontiguousarray(out.transpose(0, 3, 1, 2)) + b[None, :, None, None]
    return out, Conv2dContext(windows=windows, w=w, input_shape=x.shape, padding=padding)


def conv2d_backward(ctx: Optional[Conv2dContext], grad_out: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    if ctx is None:
        raise MissingContextError("conv2d_backward called without a forward context")
    grad_out = as_tensor(grad_out)
    n, _, h_out, w_out = ctx.windows.shape[:4]
    expected = (n, ctx.w.shape[0], h_out, w_out)
    if grad_out.shape != expected:
        raise ShapeError(f"grad_out shape {tuple(grad_out.shape)} does not match forward output {expected}")

    k = ctx.w.shape[2]
    p = ctx.padding
    grad_b = grad_out.sum(axis=(0, 2, 3))
    # [N, O, H', W'] x [N, C, H', W', k, k] -> [O, C, k, k]
    grad_w = np.tensordot(grad_out, ctx.windows, axes=([0, 2, 3], [0, 2, 3]))

    _, c, h, w = ctx.input_shape
    grad_padded = np.zeros((n, c, h + 2 * p, w + 2 * p), dtype=grad_out.dtype)
    for ki in range(k):
        for kj in range(k):
            # [N, O, H', W'] x [O, C] -> [N, H', W', C]
            contribution = np.tensordot(grad_out, ctx.w[:, :, ki, kj], axes=([1], [0]))
            grad_padded[:, :, ki:ki + h_out, kj:kj + w_out] += contribution.transpose(0, 3, 1, 2)
    grad_x = grad_padded[:, :, p:p + h, p:p + w]
    return np.ascontiguousarray(grad_x), grad_w, grad_b
