from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.engine.tensor import Tensor, as_tensor
from core.errors import MissingContextError, ShapeError


@dataclass
class LinearContext:
    x: Tensor
    w: Tensor


def linear_forward(x: Tensor, w: Tensor, b: Tensor) -> Tuple[Tensor, LinearContext]:
    """out[i, j] = sum_k x[i, k] * w[j, k] + b[j]"""
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if x.ndim != 2 or w.ndim != 2 or b.ndim != 1 or x.shape[1] != w.shape[1] or b.shape[0] != w.shape[0]:
        raise ShapeError(
            f"linear shapes do not conform: x {tuple(x.shape)}, w {tuple(w.shape)}, b {tuple(b.shape)}"
        )
    out = x @ w.T + b
    return out, LinearContext(x=x, w=w)


def linear_backward(ctx: Optional[LinearContext], grad_out: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    if ctx is None:
        raise MissingContextError("linear_backward called without a forward context")
    grad_out = as_tensor(grad_out)
    if grad_out.shape != (ctx.x.shape[0], ctx.w.shape[0]):
        raise ShapeError(
            f"grad_out shape {tuple(grad_out.shape)} does not match forward output "
            f"{(ctx.x.shape[0], ctx.w.shape[0])}"
        )
    grad_x = grad_out @ ctx.w
    grad_w = grad_out.T @ ctx.x
    grad_b = grad_out.sum(axis=0)
    return grad_x, grad_w, grad_b
