import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from core.engine.tensor import Tensor, as_tensor
from core.errors import StructureMismatchError
from core.network.graph import NetworkGraph
from core.network.layers import SpikingLayer
from core.protocol import LayerKind, NetworkSpec, NeuronKind

logger = logging.getLogger("lifb")


@dataclass
class EquivalenceReport:
    """Deviation between a burst network and its decoupled image on one input batch."""
    max_logit_deviation: float
    layer_deviation: Dict[str, float] = field(default_factory=dict)
    samples: int = 0
    steps: int = 0

    @property
    def passed(self) -> bool:
        return self.max_logit_deviation == 0.0 and all(value == 0.0 for value in self.layer_deviation.values())


def has_burst_layers(spec: NetworkSpec) -> bool:
    return NeuronKind.LIFB in spec.neuron_kinds()


def _decoupled_spec(spec: NetworkSpec, trainable: bool) -> NetworkSpec:
    layers = []
    for layer in spec.layers:
        if layer.kind == LayerKind.NEURON and layer.neuron == NeuronKind.LIFB:
            layer = layer.model_copy(
                update={
                    "neuron": NeuronKind.DECOUPLED,
                    "pair_threshold": layer.params.v_h if layer.pair_threshold is None else layer.pair_threshold,
                    "pair_trainable": trainable,
                }
            )
        layers.append(layer)
    return spec.model_copy(update={"layers": layers, "name": f"{spec.name}-decoupled"})


def decouple_network(net: NetworkGraph) -> NetworkGraph:
    """
    Rewrites every LIFB layer of `net` as a shared-membrane pair of binary
    threshold units with output weights 1 and kappa - 1.

    All weights, normalization statistics, thresholds and kappa values are
    copied; nothing is retrained. A network without LIFB layers is returned
    unchanged.
    """
    if not has_burst_layers(net.spec):
        logger.warning(f"network '{net.spec.name}' has no LIFB layers; nothing to decouple")
        return net

    decoupled = NetworkGraph(_decoupled_spec(net.spec, trainable=False))
    for source, target in zip(net.layers, decoupled.layers):
        if isinstance(source, SpikingLayer) and source.kind == NeuronKind.LIFB:
            kappa = source.kappa.value
            target.kappa.value[0] = np.ones_like(kappa)
            target.kappa.value[1] = kappa - 1.0
            continue
        for key, pair in source.parameters().items():
            target.parameters()[key].value[...] = pair.value
            target.parameters()[key].trainable = pair.trainable
        for key, buffer in source.buffers().items():
            target.buffers()[key][...] = buffer
    decoupled.training = net.training
    logger.info(f"decoupled {net.spec.neuron_kinds().count(NeuronKind.LIFB)} LIFB layers of '{net.spec.name}'")
    return decoupled


def check_same_structure(net: NetworkGraph, other: NetworkGraph):
    if len(net.layers) != len(other.layers):
        raise StructureMismatchError(f"networks have {len(net.layers)} and {len(other.layers)} layers")
    if tuple(net.spec.input_shape) != tuple(other.spec.input_shape):
        raise StructureMismatchError("networks take different input shapes")
    for left, right in zip(net.layers, other.layers):
        if left.layer_type != right.layer_type or left.name != right.name:
            raise StructureMismatchError(f"layer {left.name} ({left.layer_type}) vs {right.name} ({right.layer_type})")
        if isinstance(left, SpikingLayer):
            continue
        for key, pair in left.parameters().items():
            if right.parameters()[key].shape != pair.shape:
                raise StructureMismatchError(f"{left.name}.{key} shapes differ: {pair.shape} vs {right.parameters()[key].shape}")


def verify_equivalence(
    net: NetworkGraph, decoupled_net: NetworkGraph, inputs: Tensor, steps: Optional[int] = None
) -> EquivalenceReport:
    """Runs both networks in evaluation mode and measures max |difference| of logits and emissions."""
    check_same_structure(net, decoupled_net)
    inputs = as_tensor(inputs)
    modes = (net.training, decoupled_net.training)
    net.eval()
    decoupled_net.eval()
    try:
        reference = net.forward(inputs, keep_context=False, steps=steps)
        candidate = decoupled_net.forward(inputs, keep_context=False, steps=steps)
    finally:
        net.training, decoupled_net.training = modes

    layer_deviation = {
        name: float(np.max(np.abs(emission - candidate.emissions[name]))) if emission.size else 0.0
        for name, emission in reference.emissions.items()
    }
    report = EquivalenceReport(
        max_logit_deviation=float(np.max(np.abs(reference.logits - candidate.logits))),
        layer_deviation=layer_deviation,
        samples=inputs.shape[0],
        steps=reference.steps,
    )
    logger.debug(f"equivalence check T={report.steps}: max deviation {report.max_logit_deviation!r}")
    return report


def decouple_scratch_baseline(netspec: NetworkSpec, seed: int = 0) -> NetworkGraph:
    """
    Decoupled topology with fresh initialization and trainable pair output
    weights, starting at (1, 0), for training from scratch.
    """
    spec = _decoupled_spec(netspec, trainable=True)
    layers = [
        layer.model_copy(update={"kappa_init": 1.0}) if layer.neuron == NeuronKind.DECOUPLED else layer
        for layer in spec.layers
    ]
    return NetworkGraph(spec.model_copy(update={"layers": layers, "name": f"{netspec.name}-scratch"}), seed=seed)
