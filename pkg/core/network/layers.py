import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from core.base.layer import BaseLayer
from core.base.neuron import BaseNeuron, StepContext
from core.decouple.pair import DecoupledPairNeuron
from core.engine import (
    GradPair,
    Tensor,
    as_tensor,
    avgpool2d_backward,
    avgpool2d_forward,
    conv2d_backward,
    conv2d_forward,
    linear_backward,
    linear_forward,
    tnorm_backward,
    tnorm_forward,
)
from core.errors import MissingContextError, ShapeError
from core.neurons.lif import LIFNeuron
from core.neurons.lifb import LIFBNeuron
from core.neurons.posneg import PosNegNeuron
from core.protocol import NeuronKind, NeuronParams

# Every layer here maps x[T, B, ...] -> y[T, B, ...]. Stateless layers fold
# time into the batch axis; spiking layers unroll over T.


def _fold(x: Tensor) -> Tensor:
    return x.reshape((x.shape[0] * x.shape[1],) + x.shape[2:])


def _unfold(y: Tensor, steps: int) -> Tensor:
    return y.reshape((steps, y.shape[0] // steps) + y.shape[1:])


def _uniform(rng: np.random.Generator, fan_in: int, shape: Tuple[int, ...]) -> Tensor:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class FoldedContext:
    inner: object
    input_shape: Tuple[int, ...]


class LinearLayer(BaseLayer):
    """Fully connected layer; flattens per-sample features."""

    layer_type = "linear"

    def __init__(self, name: str, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__(name)
        self.in_features, self.out_features = in_features, out_features
        self.weight = GradPair(_uniform(rng, in_features, (out_features, in_features)))
        self.bias = GradPair(_uniform(rng, in_features, (out_features,)))

    def forward(self, x: Tensor, training: bool):
        steps, batch = x.shape[:2]
        flat = x.reshape(steps * batch, -1)
        if flat.shape[1] != self.in_features:
            raise ShapeError(f"{self.name} expects {self.in_features} features, got {flat.shape[1]}")
        out, ctx = linear_forward(flat, self.weight.value, self.bias.value)
        return out.reshape(steps, batch, self.out_features), FoldedContext(ctx, x.shape)

    def backward(self, ctx: Optional[FoldedContext], grad_out: Tensor) -> Tensor:
        if ctx is None:
            raise MissingContextError(f"{self.name} backward called without a forward context")
        grad_x, grad_w, grad_b = linear_backward(ctx.inner, grad_out.reshape(-1, self.out_features))
        self.weight.accumulate(grad_w)
        self.bias.accumulate(grad_b)
        return grad_x.reshape(ctx.input_shape)

    def output_shape(self, input_shape):
        return (self.out_features,)

    def parameters(self) -> Dict[str, GradPair]:
        return {"weight": self.weight, "bias": self.bias}


class ConvLayer(BaseLayer):

    layer_type = "conv"

    def __init__(
        self, name: str, in_channels: int, out_channels: int, kernel_size: int, padding: int, rng: np.random.Generator
    ):
        super().__init__(name)
        self.kernel_size, self.padding = kernel_size, padding
        fan_in = in_channels * kernel_size * kernel_size
        self.weight = GradPair(_uniform(rng, fan_in, (out_channels, in_channels, kernel_size, kernel_size)))
        self.bias = GradPair(_uniform(rng, fan_in, (out_channels,)))

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    def forward(self, x: Tensor, training: bool):
        if x.ndim != 5:
            raise ShapeError(f"{self.name} expects x[T,B,C,H,W], got {tuple(x.shape)}")
        out, ctx = conv2d_forward(_fold(x), self.weight.value, self.bias.value, self.padding)
        return _unfold(out, x.shape[0]), FoldedContext(ctx, x.shape)

    def backward(self, ctx: Optional[FoldedContext], grad_out: Tensor) -> Tensor:
        if ctx is None:
            raise MissingContextError(f"{self.name} backward called without a forward context")
        grad_x, grad_w, grad_b = conv2d_backward(ctx.inner, _fold(grad_out))
        self.weight.accumulate(grad_w)
        self.bias.accumulate(grad_b)
        return grad_x.reshape(ctx.input_shape)

    def output_shape(self, input_shape):
        _, height, width = input_shape
        span = 2 * self.padding - self.kernel_size + 1
        return (self.out_channels, height + span, width + span)

    def parameters(self) -> Dict[str, GradPair]:
        return {"weight": self.weight, "bias": self.bias}


class AvgPoolLayer(BaseLayer):

    layer_type = "avgpool"

    def __init__(self, name: str, size: int = 2):
        super().__init__(name)
        self.size = size

    def forward(self, x: Tensor, training: bool):
        out, ctx = avgpool2d_forward(_fold(x), self.size)
        return _unfold(out, x.shape[0]), FoldedContext(ctx, x.shape)

    def backward(self, ctx: Optional[FoldedContext], grad_out: Tensor) -> Tensor:
        if ctx is None:
            raise MissingContextError(f"{self.name} backward called without a forward context")
        return avgpool2d_backward(ctx.inner, _fold(grad_out)).reshape(ctx.input_shape)

    def output_shape(self, input_shape):
        channels, height, width = input_shape
        return (channels, height // self.size, width // self.size)


class TNormLayer(BaseLayer):
    """Per-channel normalization shared across timesteps."""

    layer_type = "tnorm"

    def __init__(self, name: str, channels: int, momentum: float = 0.1, eps: float = 1e-5):
        super().__init__(name)
        self.momentum, self.eps = momentum, eps
        self.gamma = GradPair(np.ones(channels))
        self.beta = GradPair(np.zeros(channels))
        self.running_mean = np.zeros(channels)
        self.running_var = np.ones(channels)

    def forward(self, x: Tensor, training: bool):
        return tnorm_forward(
            x,
            self.gamma.value,
            self.beta.value,
            self.running_mean,
            self.running_var,
            training,
            self.momentum,
            self.eps,
        )

    def backward(self, ctx, grad_out: Tensor) -> Tensor:
        grad_x, grad_gamma, grad_beta = tnorm_backward(ctx, grad_out)
        self.gamma.accumulate(grad_gamma)
        self.beta.accumulate(grad_beta)
        return grad_x

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def parameters(self) -> Dict[str, GradPair]:
        return {"gamma": self.gamma, "beta": self.beta}

    def buffers(self) -> Dict[str, Tensor]:
        return {"running_mean": self.running_mean, "running_var": self.running_var}


@dataclass
class SpikingContext:
    steps: List[StepContext]
    codes: np.ndarray
    emissions: Tensor


def build_neuron(kind: NeuronKind, params: NeuronParams, pair_threshold: Optional[float] = None) -> BaseNeuron:
    if kind == NeuronKind.LIF:
        return LIFNeuron(params)
    if kind == NeuronKind.LIFB:
        return LIFBNeuron(params)
    if kind == NeuronKind.POSNEG:
        return PosNegNeuron(params)
    if kind == NeuronKind.DECOUPLED:
        return DecoupledPairNeuron(params, pair_threshold)
    raise ValueError(f"unknown neuron model '{kind}'")


class SpikingLayer(BaseLayer):
    """
    A layer of spiking neurons unrolled over T with a per-channel parameter vector.

    LIFB layers carry kappa[C]; decoupled layers carry the pair output weights
    kappa[2, C]; LIF and PosNeg layers carry nothing.
    """

    layer_type = "neuron"

    def __init__(
        self,
        name: str,
        kind: NeuronKind,
        params: NeuronParams,
        channels: int,
        kappa_init: float = 1.0,
        kappa_trainable: bool = True,
        pair_threshold: Optional[float] = None,
        pair_trainable: bool = False,
    ):
        super().__init__(name)
        self.kind = kind
        self.params = params
        self.channels = channels
        self.neuron = build_neuron(kind, params, pair_threshold)
        self.relaxed = False
        self.kappa: Optional[GradPair] = None
        if kind == NeuronKind.LIFB:
            self.kappa = GradPair(np.full(channels, float(kappa_init)), trainable=kappa_trainable, is_kappa=True)
        elif kind == NeuronKind.DECOUPLED:
            weights = np.stack([np.ones(channels), np.full(channels, float(kappa_init) - 1.0)])
            self.kappa = GradPair(weights, trainable=pair_trainable, is_kappa=True)

    @property
    def pair_threshold(self) -> Optional[float]:
        return getattr(self.neuron, "pair_threshold", None)

    def forward(self, x: Tensor, training: bool, keep_context: bool = True):
        if x.shape[2] != self.channels:
            raise ShapeError(f"{self.name} has {self.channels} channels, input has {x.shape[2]}")
        kappa = None if self.kappa is None else self.kappa.value
        emissions, codes, steps = self.neuron.run(x, kappa, self.relaxed, keep_context)
        return emissions, SpikingContext(steps=steps, codes=codes, emissions=emissions)

    def backward(self, ctx: Optional[SpikingContext], grad_out: Tensor) -> Tensor:
        if ctx is None or not ctx.steps:
            raise MissingContextError(f"{self.name} backward needs the per-timestep contexts of its forward")
        grad_x, grad_kappa = self.neuron.run_backward(ctx.steps, as_tensor(grad_out))
        if self.kappa is not None and grad_kappa is not None:
            self.kappa.accumulate(grad_kappa)
        return grad_x

    def output_shape(self, input_shape):
        return tuple(input_shape)

    def parameters(self) -> Dict[str, GradPair]:
        return {} if self.kappa is None else {"kappa": self.kappa}
