from typing import Optional

import numpy as np

from core.base.neuron import BaseNeuron, StepContext, channel_view
from core.engine.tensor import Tensor
from core.protocol import NeuronKind, NeuronParams


class DecoupledPairNeuron(BaseNeuron):
    """
    Two binary threshold units reading one shared membrane.

    Unit A fires on u > v_th, unit B on u > pair_threshold, and the membrane
    resets when A fires. Each unit only ever emits 0 or 1; the per-channel
    output weights kappa[0] (unit A) and kappa[1] (unit B) are synaptic
    scalings applied downstream of the spikes.

    With weights (1, kappa - 1) and pair_threshold = v_h the pair reproduces an
    LIFB neuron bit for bit.
    """

    kind = NeuronKind.DECOUPLED
    kappa_rows = 2

    def __init__(self, params: NeuronParams, pair_threshold: Optional[float] = None):
        super().__init__(params)
        self.pair_threshold = params.v_h if pair_threshold is None else float(pair_threshold)
        if self.pair_threshold < params.v_th:
            raise ValueError(
                f"pair threshold {self.pair_threshold} is below v_th={params.v_th}; "
                "unit B could fire without unit A"
            )

    def unit_spikes(self, u: Tensor):
        """Hard binary spike trains of units A and B."""
        return np.greater(u, self.params.v_th), np.greater(u, self.pair_threshold)

    def emit(self, u: Tensor, kappa: Optional[Tensor], relaxed: bool):
        unit_a = self.readout(u, self.params.v_th, relaxed)
        unit_b = self.readout(u, self.pair_threshold, relaxed)
        s = channel_view(kappa[0], u.ndim) * unit_a + channel_view(kappa[1], u.ndim) * unit_b
        return s, np.greater(u, self.params.v_th), (unit_a, unit_b)

    def spike_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        ndim = ctx.u.ndim
        local = channel_view(ctx.kappa[0], ndim) * self.surrogate.derivative(ctx.u, self.params.v_th)
        local = local + channel_view(ctx.kappa[1], ndim) * self.surrogate.derivative(ctx.u, self.pair_threshold)
        return grad_s * local

    def kappa_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        return np.stack([self.reduce_channels(grad_s * readout) for readout in ctx.readouts])

    def codes(self, ctx: StepContext) -> np.ndarray:
        unit_a, unit_b = self.unit_spikes(ctx.u)
        return (unit_a.astype(np.int8) + unit_b.astype(np.int8)).astype(np.int8)
