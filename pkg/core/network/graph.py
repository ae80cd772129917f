import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from core.base.layer import BaseLayer
from core.engine.tensor import GradPair, Tensor, as_tensor
from core.errors import MissingContextError, ShapeError
from core.network.layers import AvgPoolLayer, ConvLayer, LinearLayer, SpikingLayer, TNormLayer
from core.protocol import LayerKind, NetworkSpec, NeuronKind, RasterLayer, SpikeRaster

logger = logging.getLogger("lifb")


@dataclass
class ForwardPass:
    """Logits, spike record and whatever backward needs from one forward call."""
    logits: Tensor
    raster: SpikeRaster
    ctxs: List[Any] = field(default_factory=list)
    # Emissions of every spiking layer, keyed by layer name, [T, B, ...].
    emissions: Dict[str, Tensor] = field(default_factory=dict)
    steps: int = 1


class NetworkGraph:
    """
    A temporally unrolled spiking network built from a `NetworkSpec`.

    The analog input is injected as current at every timestep (direct coding)
    and the logits are the temporal mean of the final linear layer (rate
    decoding).
    """

    def __init__(self, spec: NetworkSpec, seed: int = 0, rng: Optional[np.random.Generator] = None):
        self.spec = spec
        self.training = False
        rng = rng if rng is not None else np.random.default_rng(seed)
        self.layers: List[BaseLayer] = []
        # Per-sample output shape of every layer.
        self.shapes: List[Tuple[int, ...]] = []
        shape = tuple(spec.input_shape)
        for index, layer_spec in enumerate(spec.layers):
            name = f"{index}.{layer_spec.kind.value}"
            layer = self._build_layer(name, layer_spec, shape, rng)
            shape = layer.output_shape(shape)
            self.layers.append(layer)
            self.shapes.append(tuple(shape))
        self.output_size = shape[0]

    @staticmethod
    def _build_layer(name, layer_spec, shape, rng) -> BaseLayer:
        kind = layer_spec.kind
        if kind == LayerKind.LINEAR:
            return LinearLayer(name, int(np.prod(shape)), layer_spec.size, rng)
        if kind == LayerKind.CONV:
            if len(shape) != 3:
                raise ShapeError(f"{name}: conv needs a [C, H, W] input, got {shape}")
            return ConvLayer(name, shape[0], layer_spec.size, layer_spec.kernel_size, layer_spec.padding, rng)
        if kind == LayerKind.AVGPOOL:
            if len(shape) != 3 or min(shape[1:]) < layer_spec.pool:
                raise ShapeError(f"{name}: cannot pool {shape} with window {layer_spec.pool}")
            return AvgPoolLayer(name, layer_spec.pool)
        if kind == LayerKind.TNORM:
            return TNormLayer(name, shape[0], layer_spec.momentum, layer_spec.eps)
        return SpikingLayer(
            name,
            layer_spec.neuron,
            layer_spec.params,
            shape[0],
            kappa_init=layer_spec.kappa_init,
            kappa_trainable=layer_spec.kappa_trainable,
            pair_threshold=layer_spec.pair_threshold,
            pair_trainable=layer_spec.pair_trainable,
        )

    @property
    def steps(self) -> int:
        return self.spec.steps

    def train(self) -> "NetworkGraph":
        self.training = True
        return self

    def eval(self) -> "NetworkGraph":
        self.training = False
        return self

    def set_relaxed(self, relaxed: bool):
        """Replaces every Heaviside emission by its surrogate primitive (gradient checking only)."""
        for layer in self.spiking_layers():
            layer.relaxed = relaxed

    def spiking_layers(self) -> List[SpikingLayer]:
        return [layer for layer in self.layers if isinstance(layer, SpikingLayer)]

    def parameters(self) -> Dict[str, GradPair]:
        named = {}
        for layer in self.layers:
            for key, pair in layer.parameters().items():
                named[f"{layer.name}.{key}"] = pair
        return named

    def buffers(self) -> Dict[str, Tensor]:
        named = {}
        for layer in self.layers:
            for key, buffer in layer.buffers().items():
                named[f"{layer.name}.{key}"] = buffer
        return named

    def zero_grad(self):
        for pair in self.parameters().values():
            pair.zero_grad()

    def parameter_count(self) -> int:
        return int(sum(pair.value.size for pair in self.parameters().values()))

    def forward(self, x: Tensor, keep_context: Optional[bool] = None, steps: Optional[int] = None) -> ForwardPass:
        """
        Runs x[B, *input_shape] through T timesteps.

        Contexts are kept by default in training mode only; pass
        keep_context=True to backpropagate through an evaluation-mode pass.
        """
        x = as_tensor(x)
        if tuple(x.shape[1:]) != tuple(self.spec.input_shape):
            raise ShapeError(f"input has per-sample shape {tuple(x.shape[1:])}, expected {tuple(self.spec.input_shape)}")
        keep_context = self.training if keep_context is None else keep_context
        steps = self.steps if steps is None else steps
        h = np.repeat(x[np.newaxis], steps, axis=0)
        return self.forward_currents(h, keep_context)

    def forward_currents(self, h: Tensor, keep_context: bool = True) -> ForwardPass:
        """Forward from an explicit per-timestep input h[T, B, ...]."""
        h = as_tensor(h)
        ctxs, raster, emissions = [], SpikeRaster(), {}
        for layer in self.layers:
            if isinstance(layer, SpikingLayer):
                h, ctx = layer.forward(h, self.training, keep_context)
                kappa = None if layer.kappa is None else layer.kappa.value.copy()
                raster.layers.append(RasterLayer(layer.name, layer.kind, ctx.codes, kappa))
                emissions[layer.name] = h
            else:
                h, ctx = layer.forward(h, self.training)
            ctxs.append(ctx if keep_context else None)
        return ForwardPass(
            logits=h.mean(axis=0),
            raster=raster,
            ctxs=ctxs if keep_context else [],
            emissions=emissions,
            steps=h.shape[0],
        )

    def backward(self, forward_pass: ForwardPass, grad_logits: Tensor) -> Tensor:
        """
        BPTT through a kept forward pass. Accumulates into every GradPair and
        returns the gradient with respect to the per-timestep input.
        """
        if len(forward_pass.ctxs) != len(self.layers):
            raise MissingContextError("backward needs a forward pass run with keep_context=True")
        grad_logits = as_tensor(grad_logits)
        if grad_logits.shape != forward_pass.logits.shape:
            raise ShapeError(
                f"grad_logits shape {tuple(grad_logits.shape)} does not match logits {tuple(forward_pass.logits.shape)}"
            )
        steps = forward_pass.steps
        grad = np.repeat(grad_logits[np.newaxis] / steps, steps, axis=0)
        for layer, ctx in zip(reversed(self.layers), reversed(forward_pass.ctxs)):
            grad = layer.backward(ctx, grad)
        return grad

    def fan_out(self) -> Dict[str, int]:
        """Downstream synapses per emitting neuron of every spiking layer."""
        fan = {}
        for index, layer in enumerate(self.layers):
            if not isinstance(layer, SpikingLayer):
                continue
            for follower in self.layers[index + 1:]:
                if isinstance(follower, ConvLayer):
                    fan[layer.name] = follower.out_channels * follower.kernel_size ** 2
                    break
                if isinstance(follower, LinearLayer):
                    fan[layer.name] = follower.out_features
                    break
        return fan

    def summary(self) -> List[Tuple[str, str, int]]:
        return [
            (layer.name, layer.layer_type, int(sum(p.value.size for p in layer.parameters().values())))
            for layer in self.layers
        ]

    def threshold_units(self) -> int:
        """Number of spike-emitting threshold units; a decoupled neuron counts as two."""
        units = 0
        for layer, shape in zip(self.layers, self.shapes):
            if isinstance(layer, SpikingLayer):
                units += int(np.prod(shape)) * (2 if layer.kind == NeuronKind.DECOUPLED else 1)
        return units
