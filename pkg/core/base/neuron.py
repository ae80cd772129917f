# The MIT License (MIT)
# Copyright © 2024 Burst SNN Contributors

# Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
# documentation files (the “Software”), to deal in the Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software,
# and to permit persons to whom the Software is furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies or substantial portions of
# the Software.

# THE SOFTWARE IS PROVIDED “AS IS”, WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO
# THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
# THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION
# OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from core.engine.tensor import DTYPE, Tensor, as_tensor, check_same_shape
from core.errors import MissingContextError, ShapeError
from core.engine.surrogate import get_surrogate
from core.protocol import NeuronKind, NeuronParams


@dataclass
class StepContext:
    """
    Everything a single timestep's backward needs.

    Attributes:
        u: Post-integration membrane potential.
        reset: Boolean mask of positions hard-reset to v_rst (gradient-detached).
        readouts: Per-readout spike trains that `kappa` scales (hard or relaxed).
        kappa: Per-channel emission parameters as passed to `step` (None if unused).
        relaxed: Whether the forward used surrogate primitives instead of Heavisides.
        params: Dynamics of the neuron that produced the step.
    """
    u: Tensor
    reset: Tensor
    readouts: Tuple[Tensor, ...]
    kappa: Optional[Tensor]
    relaxed: bool
    params: NeuronParams


def channel_view(vector: Tensor, ndim: int) -> Tensor:
    """Reshapes a per-channel vector so it broadcasts over [B, C, ...]."""
    return vector.reshape((vector.shape[0],) + (1,) * (ndim - 2))


def heaviside(u: Tensor, threshold: float) -> Tensor:
    """H(u - threshold) with the strict comparison u > threshold."""
    return np.greater(u, threshold).astype(DTYPE)


class BaseNeuron(ABC):
    """
    A discrete-time spiking neuron with hard reset and surrogate gradients.

    Subclasses only decide how the post-integration potential `u` turns into
    an emission (`emit`), how the emission differentiates with respect to `u`
    (`spike_grad`) and which raster code each position gets (`codes`). The
    leaky integration, the hard reset, the membrane-carry path of BPTT and the
    per-channel parameter reduction are shared here.
    """

    kind: NeuronKind
    # Shape of the per-channel emission parameters, relative to the channel count.
    kappa_rows: int = 0

    def __init__(self, params: NeuronParams):
        self.params = params
        self.surrogate = get_surrogate(params.surrogate, params.surrogate_width)

    def integrate(self, v: Tensor, current: Tensor) -> Tensor:
        """u = v + (1/tau) * (-v + I)"""
        return v + self.params.decay * (current - v)

    @abstractmethod
    def emit(self, u: Tensor, kappa: Optional[Tensor], relaxed: bool) -> Tuple[Tensor, Tensor, Tuple[Tensor, ...]]:
        """Returns (emission, reset mask, readouts)."""

    @abstractmethod
    def spike_grad(self, ctx: StepContext, grad_s: Tensor) -> Tensor:
        """dL/du through the emission path."""

    @abstractmethod
    def codes(self, ctx: StepContext) -> np.ndarray:
        """int8 raster codes of one timestep."""

    def kappa_grad(self, ctx: StepContext, grad_s: Tensor) -> Optional[Tensor]:
        return None

    def check_kappa(self, kappa: Optional[Tensor], v: Tensor):
        if self.kappa_rows == 0:
            return
        if kappa is None:
            raise ValueError(f"{self.kind.value} neurons need per-channel emission parameters")
        channels = v.shape[1] if v.ndim > 1 else 1
        expected = (channels,) if self.kappa_rows == 1 else (self.kappa_rows, channels)
        if kappa.shape != expected:
            raise ShapeError(
                f"kappa has shape {tuple(kappa.shape)} but the layer has {channels} channels "
                f"(expected {expected})"
            )

    def step(
        self, v: Tensor, current: Tensor, kappa: Optional[Tensor] = None, relaxed: bool = False
    ) -> Tuple[Tensor, Tensor, StepContext]:
        v, current = as_tensor(v), as_tensor(current)
        check_same_shape("v", v, "I", current)
        self.check_kappa(kappa, v)
        u = self.integrate(v, current)
        s, reset, readouts = self.emit(u, kappa, relaxed)
        v_next = np.where(reset, self.params.v_rst, u)
        return s, v_next, StepContext(u=u, reset=reset, readouts=readouts, kappa=kappa, relaxed=relaxed, params=self.params)

    def step_backward(
        self, ctx: Optional[StepContext], grad_s: Tensor, grad_v_next: Tensor
    ) -> Tuple[Tensor, Tensor, Optional[Tensor]]:
        """
        Reverse of `step`. The reset assignment is detached: gradient reaches u
        from v_next only where no reset happened.
        """
        if ctx is None:
            raise MissingContextError(f"{self.kind.value} backward called without a forward context")
        grad_u = self.spike_grad(ctx, grad_s) + np.where(ctx.reset, 0.0, grad_v_next)
        decay = self.params.decay
        return grad_u * (1.0 - decay), grad_u * decay, self.kappa_grad(ctx, grad_s)

    def run(
        self, currents: Tensor, kappa: Optional[Tensor] = None, relaxed: bool = False, keep_context: bool = True
    ) -> Tuple[Tensor, np.ndarray, List[StepContext]]:
        """
        Unrolls the neuron over currents[T, B, ...] starting from v = v_rst.

        Returns emissions[T, B, ...], int8 codes[T, B, ...] and the per-step
        contexts (empty when keep_context is False).
        """
        currents = as_tensor(currents)
        v = np.full(currents.shape[1:], self.params.v_rst, dtype=DTYPE)
        emissions = np.empty_like(currents)
        codes = np.empty(currents.shape, dtype=np.int8)
        contexts = []
        for t in range(currents.shape[0]):
            s, v, ctx = self.step(v, currents[t], kappa, relaxed)
            emissions[t] = s
            codes[t] = self.codes(ctx)
            if keep_context:
                contexts.append(ctx)
        return emissions, codes, contexts

    def run_backward(
        self, contexts: List[StepContext], grad_emissions: Tensor
    ) -> Tuple[Tensor, Optional[Tensor]]:
        """BPTT over a `run`: returns dL/dcurrents and the time-summed kappa gradient."""
        if len(contexts) != grad_emissions.shape[0]:
            raise MissingContextError(
                f"have {len(contexts)} step contexts for {grad_emissions.shape[0]} timesteps"
            )
        grad_currents = np.empty_like(grad_emissions)
        grad_v = np.zeros(grad_emissions.shape[1:], dtype=grad_emissions.dtype)
        grad_kappa = None
        for t in reversed(range(len(contexts))):
            grad_v, grad_currents[t], step_kappa = self.step_backward(contexts[t], grad_emissions[t], grad_v)
            if step_kappa is not None:
                grad_kappa = step_kappa if grad_kappa is None else grad_kappa + step_kappa
        return grad_currents, grad_kappa

    def readout(self, u: Tensor, threshold: float, relaxed: bool) -> Tensor:
        if relaxed:
            return self.surrogate.primitive(u, threshold)
        return heaviside(u, threshold)

    @staticmethod
    def reduce_channels(values: Tensor) -> Tensor:
        """Sums [B, C, ...] down to [C] in a fixed axis order."""
        if values.ndim == 1:
            return values.copy()
        axes = tuple(axis for axis in range(values.ndim) if axis != 1)
        return values.sum(axis=axes)
