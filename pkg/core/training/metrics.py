from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from core.network.graph import ForwardPass, NetworkGraph
from core.network.layers import SpikingLayer
from core.protocol import NeuronKind, RasterCode

KAPPA_HISTOGRAM_BINS = 10


@dataclass
class FiringCounts:
    """Running rest/regular/burst tallies of one spiking layer."""
    total: int = 0
    regular: int = 0
    burst: int = 0
    nonzero: int = 0

    def add(self, codes: np.ndarray):
        self.total += codes.size
        self.burst += int(np.count_nonzero(codes == RasterCode.BURST))
        self.regular += int(np.count_nonzero(np.abs(codes) == RasterCode.REGULAR))
        self.nonzero += int(np.count_nonzero(codes))

    def fractions(self) -> Dict[str, float]:
        if self.total == 0:
            return {"rest": 1.0, "regular": 0.0, "burst": 0.0}
        return {
            "rest": (self.total - self.regular - self.burst) / self.total,
            "regular": self.regular / self.total,
            "burst": self.burst / self.total,
        }


@dataclass
class KappaSummary:
    min: float
    max: float
    mean: float
    std: float
    histogram: List[int]
    edges: List[float]

    @classmethod
    def of(cls, values: np.ndarray) -> "KappaSummary":
        counts, edges = np.histogram(values, bins=KAPPA_HISTOGRAM_BINS)
        return cls(
            min=float(values.min()),
            max=float(values.max()),
            mean=float(values.mean()),
            std=float(values.std()),
            histogram=[int(count) for count in counts],
            edges=[float(edge) for edge in edges],
        )


def burst_values(layer: SpikingLayer) -> Optional[np.ndarray]:
    """Per-channel value a burst emits: kappa for LIFB, w_a + w_b for a decoupled pair."""
    if layer.kappa is None:
        return None
    if layer.kind == NeuronKind.LIFB:
        return layer.kappa.value.copy()
    return layer.kappa.value[0] + layer.kappa.value[1]


def kappa_distribution(net: NetworkGraph) -> Dict[str, KappaSummary]:
    summaries = {}
    for layer in net.spiking_layers():
        values = burst_values(layer)
        if values is not None:
            summaries[layer.name] = KappaSummary.of(values)
    return summaries


@dataclass
class EvalMetrics:
    """
    Attributes:
        accuracy: Top-1 accuracy in [0, 1].
        loss: Mean cross-entropy.
        firing: rest/regular/burst fractions per spiking layer.
        synops: Accumulate operations per sample (nonzero emissions x downstream fan-out).
        kappa: Burst-value distribution per burst-capable layer.
        samples: Number of evaluated samples.
    """
    accuracy: float
    loss: float
    firing: Dict[str, Dict[str, float]] = field(default_factory=dict)
    synops: float = 0.0
    kappa: Dict[str, KappaSummary] = field(default_factory=dict)
    samples: int = 0


class MetricAccumulator:

    def __init__(self, net: NetworkGraph):
        self.fan_out = net.fan_out()
        self.counts: Dict[str, FiringCounts] = {layer.name: FiringCounts() for layer in net.spiking_layers()}
        self.loss_sum = 0.0
        self.correct = 0
        self.samples = 0

    def add(self, forward_pass: ForwardPass, labels: np.ndarray, loss: float):
        batch = labels.shape[0]
        self.loss_sum += loss * batch
        self.correct += int(np.count_nonzero(forward_pass.logits.argmax(axis=1) == labels))
        self.samples += batch
        for layer in forward_pass.raster.layers:
            self.counts[layer.name].add(layer.codes)

    @property
    def accuracy(self) -> float:
        return self.correct / self.samples if self.samples else 0.0

    @property
    def loss(self) -> float:
        return self.loss_sum / self.samples if self.samples else 0.0

    def result(self, net: NetworkGraph) -> EvalMetrics:
        synops = sum(self.counts[name].nonzero * fan for name, fan in self.fan_out.items())
        return EvalMetrics(
            accuracy=self.accuracy,
            loss=self.loss,
            firing={name: counts.fractions() for name, counts in self.counts.items()},
            synops=synops / self.samples if self.samples else 0.0,
            kappa=kappa_distribution(net),
            samples=self.samples,
        )
