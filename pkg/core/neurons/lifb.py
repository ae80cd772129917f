from typing import Optional, Tuple

import numpy as np

from core.base.neuron import BaseNeuron, StepContext, channel_view
from core.engine.tensor import Tensor, as_tensor
from core.errors import MissingContextError
from core.protocol import NeuronKind, NeuronParams

# Simplified burst neuron:
#
#   s = H(u - v_th) + (kappa - 1) * H(u - v_h)
#
# so each neuron emits 0, 1 or its channel's kappa. Reset is triggered by the
# v_th crossing alone; v_h > v_th makes a v_h-only crossing impossible.


class LIFBNeuron(BaseNeuron):

    kind = NeuronKind.LIFB
    kappa_rows = 1

    def emit(self, u: Tensor, kappa: Optional[Tensor], relaxed: bool):
        regular = self.readout(u, self.params.v_th, relaxed)
        burst = self.readout(u, self.params.v_h, relaxed)
        scale = channel_view(kappa - 1.0, u.ndim)
        s = regular + scale * burst
        return s, np.greater(u, self.params.v_th), (regular, burst)

    def spike_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        scale = channel_view(ctx.kappa - 1.0, ctx.u.ndim)
        local = self.surrogate.derivative(ctx.u, self.params.v_th) + scale * self.surrogate.derivative(
            ctx.u, self.params.v_h
        )
        return grad_s * local

    def kappa_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        # ds/dkappa = H(u - v_h) exactly; s is linear in kappa
        return self.reduce_channels(grad_s * ctx.readouts[1])

    def codes(self, ctx: StepContext) -> np.ndarray:
        """
        1 for a regular spike, 2 for a v_h crossing. The code follows the
        crossing, not the emitted value: at kappa = 1 a burst emits 1.0 and
        still records 2.
        """
        regular = ctx.reset
        burst = np.greater(ctx.u, self.params.v_h)
        return (regular.astype(np.int8) + burst.astype(np.int8)).astype(np.int8)


def _kappa_vector(kappa, v: Tensor) -> Tensor:
    channels = v.shape[1] if v.ndim > 1 else 1
    if np.ndim(kappa) == 0:
        return np.full(channels, float(kappa))
    return as_tensor(kappa)


def lifb_step(v: Tensor, I: Tensor, p: NeuronParams, kappa, return_context: bool = False):
    """
    One LIFB timestep on [B, C, ...] tensors with kappa broadcast per channel.

    A scalar kappa is expanded to every channel; a vector must have exactly one
    entry per channel.
    """
    v = as_tensor(v)
    s, v_next, ctx = LIFBNeuron(p).step(v, I, _kappa_vector(kappa, v))
    if return_context:
        return s, v_next, ctx
    return s, v_next


def lifb_backward(ctx: Optional[StepContext], grad_s: Tensor, grad_v_next: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    """Backward of `lifb_step` with the dynamics recorded in `ctx`; grad_kappa is summed over batch and spatial positions."""
    if ctx is None:
        raise MissingContextError("lifb backward called without a forward context")
    return LIFBNeuron(ctx.params).step_backward(ctx, as_tensor(grad_s), as_tensor(grad_v_next))
