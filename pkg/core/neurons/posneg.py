from typing import Optional

import numpy as np

from core.base.neuron import BaseNeuron, StepContext
from core.engine.tensor import Tensor
from core.protocol import NeuronKind, NeuronParams


class PosNegNeuron(BaseNeuron):
    """
    Ternary neuron: s = H(u - v_th) - H(-u - v_th).

    Fires +1 above v_th and -1 below -v_th, with a hard reset on either.
    """

    kind = NeuronKind.POSNEG

    def emit(self, u: Tensor, kappa: Optional[Tensor], relaxed: bool):
        th = self.params.v_th
        positive = self.readout(u, th, relaxed)
        negative = self.readout(-u, th, relaxed)
        reset = np.greater(u, th) | np.greater(-u, th)
        return positive - negative, reset, (positive, negative)

    def spike_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        th = self.params.v_th
        return grad_s * (self.surrogate.derivative(ctx.u, th) + self.surrogate.derivative(-ctx.u, th))

    def codes(self, ctx: StepContext) -> np.ndarray:
        th = self.params.v_th
        return (np.greater(ctx.u, th).astype(np.int8) - np.greater(-ctx.u, th).astype(np.int8)).astype(np.int8)


def posneg_step(v: Tensor, I: Tensor, p: NeuronParams, return_context: bool = False):
    s, v_next, ctx = PosNegNeuron(p).step(v, I)
    if return_context:
        return s, v_next, ctx
    return s, v_next
