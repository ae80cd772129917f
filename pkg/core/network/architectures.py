from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core.protocol import LayerKind, LayerSpec, NetworkSpec, NeuronKind, NeuronParams

# Layer strings use the usual shorthand: "8C3" is a 3x3 conv with 8 output
# channels, "AP2" a 2x2 average pool. Full-size SNN6 is
# 64C3-128C3-AP2-256C3-AP2-512C3-AP2-512C3-AP2-FC; the shipped variant divides
# every width by `width_divisor`.
SNN6_LAYOUT = ("64C3", "128C3", "AP2", "256C3", "AP2", "512C3", "AP2", "512C3", "AP2")


def _neuron_layer(kind: NeuronKind, params: NeuronParams, kappa_init: float, kappa_trainable: bool, **pair) -> LayerSpec:
    return LayerSpec(
        kind=LayerKind.NEURON,
        neuron=kind,
        params=params,
        kappa_init=kappa_init,
        kappa_trainable=kappa_trainable,
        **pair,
    )


def snn6_small(
    input_shape: Tuple[int, int, int],
    classes: int,
    neuron: NeuronKind = NeuronKind.LIFB,
    params: Optional[NeuronParams] = None,
    steps: int = 2,
    kappa_init: float = 1.0,
    kappa_trainable: bool = True,
    width_divisor: int = 8,
    **pair,
) -> NetworkSpec:
    """
    Conv -> tnorm -> neuron blocks with average pooling, then a linear readout.

    A pool is skipped once the feature map is smaller than its window, so the
    same layout serves 8x8 and 28x28 inputs.
    """
    params = params or NeuronParams()
    layers: List[LayerSpec] = []
    height = min(input_shape[1:])
    for token in SNN6_LAYOUT:
        if token.startswith("AP"):
            size = int(token[2:])
            if height >= size:
                layers.append(LayerSpec(kind=LayerKind.AVGPOOL, pool=size))
                height //= size
            continue
        channels, kernel = token.split("C")
        layers.append(
            LayerSpec(
                kind=LayerKind.CONV,
                size=max(1, int(channels) // width_divisor),
                kernel_size=int(kernel),
                padding=int(kernel) // 2,
            )
        )
        layers.append(LayerSpec(kind=LayerKind.TNORM))
        layers.append(_neuron_layer(neuron, params, kappa_init, kappa_trainable, **pair))
    layers.append(LayerSpec(kind=LayerKind.LINEAR, size=classes))
    return NetworkSpec(name="snn6-small", input_shape=tuple(input_shape), classes=classes, steps=steps, layers=layers)


def mlp_snn(
    input_shape: Sequence[int],
    classes: int,
    neuron: NeuronKind = NeuronKind.LIFB,
    params: Optional[NeuronParams] = None,
    steps: int = 2,
    kappa_init: float = 1.0,
    kappa_trainable: bool = True,
    hidden: int = 64,
    **pair,
) -> NetworkSpec:
    """Linear-tnorm-neuron twice, then a linear readout."""
    params = params or NeuronParams()
    layers = []
    for _ in range(2):
        layers.append(LayerSpec(kind=LayerKind.LINEAR, size=hidden))
        layers.append(LayerSpec(kind=LayerKind.TNORM))
        layers.append(_neuron_layer(neuron, params, kappa_init, kappa_trainable, **pair))
    layers.append(LayerSpec(kind=LayerKind.LINEAR, size=classes))
    return NetworkSpec(name="mlp-snn", input_shape=tuple(input_shape), classes=classes, steps=steps, layers=layers)


ARCHITECTURES: Dict[str, Callable[..., NetworkSpec]] = {
    "snn6-small": snn6_small,
    "mlp-snn": mlp_snn,
}


def build_spec(arch: str, input_shape: Sequence[int], classes: int, **kwargs) -> NetworkSpec:
    try:
        builder = ARCHITECTURES[arch]
    except KeyError:
        raise ValueError(f"unknown architecture '{arch}', choose from {sorted(ARCHITECTURES)}") from None
    if arch == "snn6-small" and len(input_shape) != 3:
        raise ValueError(f"snn6-small needs [C, H, W] inputs, got {tuple(input_shape)}")
    if arch == "mlp-snn":
        kwargs.pop("width_divisor", None)
    else:
        kwargs.pop("hidden", None)
    return builder(tuple(input_shape), classes, **kwargs)
