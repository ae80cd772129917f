from typing import Optional

import numpy as np

from core.base.neuron import BaseNeuron, StepContext
from core.engine.tensor import Tensor
from core.protocol import NeuronKind, NeuronParams, RasterCode


class LIFNeuron(BaseNeuron):
    """Leaky integrate-and-fire: s = H(u - v_th), hard reset on every spike."""

    kind = NeuronKind.LIF

    def emit(self, u: Tensor, kappa: Optional[Tensor], relaxed: bool):
        fired = self.readout(u, self.params.v_th, relaxed)
        reset = np.greater(u, self.params.v_th)
        return fired, reset, (fired,)

    def spike_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        return grad_s * self.surrogate.derivative(ctx.u, self.params.v_th)

    def codes(self, ctx: StepContext) -> np.ndarray:
        return np.where(ctx.reset, RasterCode.REGULAR.value, RasterCode.REST.value).astype(np.int8)


def lif_step(v: Tensor, I: Tensor, p: NeuronParams, return_context: bool = False):
    s, v_next, ctx = LIFNeuron(p).step(v, I)
    if return_context:
        return s, v_next, ctx
    return s, v_next
