from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.engine.tensor import Tensor, as_tensor
from core.errors import MissingContextError, ShapeError

CHANNEL_AXIS = 2


@dataclass
class TNormContext:
    xhat: Tensor
    std_inv: Tensor  # per channel
    gamma: Tensor
    training: bool


def _broadcast(vector: Tensor, ndim: int) -> Tensor:
    shape = [1] * ndim
    shape[CHANNEL_AXIS] = vector.shape[0]
    return vector.reshape(shape)


def _reduce_axes(ndim: int) -> Tuple[int, ...]:
    return tuple(axis for axis in range(ndim) if axis != CHANNEL_AXIS)


def tnorm_forward(
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: Tensor,
    running_var: Tensor,
    training: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tuple[Tensor, TNormContext]:
    """
    Per-channel normalization of a time-unrolled activation x[T, B, C, ...].

    Training statistics are taken jointly over time, batch and space; scale
    and shift are shared by all timesteps. Running statistics are updated in
    place while training and used as-is in evaluation.
    """
    x = as_tensor(x)
    if x.ndim < 3:
        raise ShapeError(f"tnorm expects x[T,B,C,...], got {tuple(x.shape)}")
    channels = x.shape[CHANNEL_AXIS]
    for name, vector in (("gamma", gamma), ("beta", beta), ("running_mean", running_mean), ("running_var", running_var)):
        if vector.shape != (channels,):
            raise ShapeError(f"tnorm {name} has shape {tuple(vector.shape)}, expected ({channels},)")

    axes = _reduce_axes(x.ndim)
    if training:
        mean = x.mean(axis=axes)
        var = x.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var
    else:
        mean, var = running_mean, running_var

    std_inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - _broadcast(mean, x.ndim)) * _broadcast(std_inv, x.ndim)
    out = _broadcast(gamma, x.ndim) * xhat + _broadcast(beta, x.ndim)
    return out, TNormContext(xhat=xhat, std_inv=std_inv, gamma=as_tensor(gamma).copy(), training=training)


def tnorm_backward(ctx: Optional[TNormContext], grad_out: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    if ctx is None:
        raise MissingContextError("tnorm_backward called without a forward context")
    grad_out = as_tensor(grad_out)
    if grad_out.shape != ctx.xhat.shape:
        raise ShapeError(f"grad_out shape {tuple(grad_out.shape)} does not match forward output {ctx.xhat.shape}")

    ndim = grad_out.ndim
    axes = _reduce_axes(ndim)
    grad_gamma = (grad_out * ctx.xhat).sum(axis=axes)
    grad_beta = grad_out.sum(axis=axes)

    grad_xhat = grad_out * _broadcast(ctx.gamma, ndim)
    std_inv = _broadcast(ctx.std_inv, ndim)
    if not ctx.training:
        return grad_xhat * std_inv, grad_gamma, grad_beta

    count = grad_out.size // grad_out.shape[CHANNEL_AXIS]
    sum_grad = grad_xhat.sum(axis=axes, keepdims=True)
    sum_grad_xhat = (grad_xhat * ctx.xhat).sum(axis=axes, keepdims=True)
    grad_x = std_inv / count * (count * grad_xhat - sum_grad - ctx.xhat * sum_grad_xhat)
    return grad_x, grad_gamma, grad_beta
