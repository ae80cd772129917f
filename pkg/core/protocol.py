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

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

# Domain records shared by every module.
#
# ---- Conventions ----
# Tensors are numpy float64 arrays. Time-unrolled activations are laid out as
# [T, B, C, ...] (conv) or [T, B, F] (fully connected); channel axis is 2.
# Emissions are the values a neuron layer passes downstream: {0, 1} for LIF,
# {0, 1, kappa} for LIFB, {-1, 0, 1} for PosNeg.
#
# ---- Raster codes ----
#   0 rest, 1 regular spike, 2 burst spike, -1 negative spike (PosNeg only)


class NeuronKind(str, Enum):
    """Spiking neuron models understood by the network builder"""
    LIF = "lif"
    LIFB = "lifb"
    POSNEG = "posneg"
    DECOUPLED = "decoupled"  # LIFB rewritten as two binary threshold units


class LayerKind(str, Enum):
    CONV = "conv"
    LINEAR = "linear"
    AVGPOOL = "avgpool"
    TNORM = "tnorm"
    NEURON = "neuron"


class RasterCode(int, Enum):
    NEGATIVE = -1
    REST = 0
    REGULAR = 1
    BURST = 2


class NeuronParams(BaseModel):
    """
    Scalar dynamics of a spiking layer.

    Attributes:
        tau: Membrane time constant in simulation steps; the decay factor is 1 - 1/tau.
        v_th: Firing threshold.
        v_h: Burst threshold (LIFB); defaults to 2 * v_th.
        v_rst: Reset (and initial) potential.
        surrogate: Name of the surrogate gradient registered in core.engine.surrogate.
        surrogate_width: Half-width `a` of the surrogate window.
    """

    model_config = ConfigDict(frozen=True)

    tau: float = 2.0
    v_th: float = 0.5
    v_h: float = 1.0
    v_rst: float = 0.0
    surrogate: str = "rectangular"
    surrogate_width: float = 0.5

    @model_validator(mode="before")
    @classmethod
    def _default_burst_threshold(cls, data):
        if isinstance(data, dict) and data.get("v_h") is None:
            data = dict(data)
            data["v_h"] = 2.0 * float(data.get("v_th", cls.model_fields["v_th"].default))
        return data

    @model_validator(mode="after")
    def _check(self) -> "NeuronParams":
        if not self.tau > 1.0:
            raise ValueError(f"tau must be > 1 so that 1 - 1/tau lies in (0, 1), got {self.tau}")
        if not self.v_h > self.v_th > self.v_rst:
            raise ValueError(
                f"thresholds must satisfy v_h > v_th > v_rst, got v_h={self.v_h}, "
                f"v_th={self.v_th}, v_rst={self.v_rst}"
            )
        if not self.surrogate_width > 0:
            raise ValueError(f"surrogate_width must be > 0, got {self.surrogate_width}")
        return self

    @property
    def decay(self) -> float:
        return 1.0 / self.tau


class TCurrentParams(BaseModel):
    """
    Calcium T-current constants of the original (ODE) LIFB model.

    `v_h` here is the T-current gate threshold: the current is active and the
    deactivation variable h decays while v > v_h; h recovers while v < v_h.
    Unset values resolve against the membrane threshold in `resolve`.
    """

    model_config = ConfigDict(frozen=True)

    g: float = 2.0
    v_T: Optional[float] = None
    v_h: Optional[float] = None
    tau_plus: float = 20.0
    tau_minus: float = 5.0
    h0: float = Field(default=1.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _check(self) -> "TCurrentParams":
        if self.tau_plus <= 0 or self.tau_minus <= 0:
            raise ValueError("tau_plus and tau_minus must be positive")
        if self.g < 0:
            raise ValueError(f"conductance g must be non-negative, got {self.g}")
        return self

    def resolve(self, v_th: float) -> "TCurrentParams":
        return self.model_copy(
            update={
                "v_T": 1.5 * v_th if self.v_T is None else self.v_T,
                "v_h": 0.1 * v_th if self.v_h is None else self.v_h,
            }
        )


class LayerSpec(BaseModel):
    """
    One entry of a network description.

    `size` is the output channel count (conv) or feature count (linear). Neuron
    layers carry their model tag, dynamics and burst-intensity policy; their
    channel count is inferred from the preceding layer.
    """

    kind: LayerKind
    size: Optional[int] = None
    kernel_size: int = 3
    padding: int = 1
    pool: int = 2
    neuron: Optional[NeuronKind] = None
    params: Optional[NeuronParams] = None
    kappa_init: float = 1.0
    kappa_trainable: bool = True
    # Second readout threshold of a decoupled pair; None means params.v_h.
    pair_threshold: Optional[float] = None
    pair_trainable: bool = False
    eps: float = 1e-5
    momentum: float = 0.1

    @model_validator(mode="before")
    @classmethod
    def _default_params(cls, data):
        if isinstance(data, dict) and data.get("kind") in (LayerKind.NEURON, "neuron"):
            if data.get("params") is None:
                data = dict(data)
                data["params"] = NeuronParams()
        return data

    @model_validator(mode="after")
    def _check(self) -> "LayerSpec":
        if self.kind in (LayerKind.CONV, LayerKind.LINEAR) and (self.size is None or self.size < 1):
            raise ValueError(f"{self.kind.value} layer needs a positive size")
        if self.kind == LayerKind.NEURON and self.neuron is None:
            raise ValueError("neuron layer needs a neuron model tag")
        return self


class NetworkSpec(BaseModel):
    """Ordered layers, per-sample input shape, class count and simulation length T."""

    name: str = "custom"
    input_shape: Tuple[int, ...]
    classes: int
    steps: int = Field(default=2, ge=1)
    layers: List[LayerSpec]

    @model_validator(mode="after")
    def _check(self) -> "NetworkSpec":
        if not self.layers or self.layers[-1].kind != LayerKind.LINEAR:
            raise ValueError("the final layer must be linear (logits are its temporal mean)")
        if self.layers[-1].size != self.classes:
            raise ValueError(
                f"final linear layer has {self.layers[-1].size} outputs but classes={self.classes}"
            )
        return self

    def neuron_kinds(self) -> List[NeuronKind]:
        return [layer.neuron for layer in self.layers if layer.kind == LayerKind.NEURON]


@dataclass
class RasterLayer:
    """Emission codes of one neuron layer, laid out [T, B, ...]."""
    name: str
    neuron: NeuronKind
    codes: np.ndarray
    kappa: Optional[np.ndarray] = None

    def per_neuron(self) -> np.ndarray:
        """Codes reshaped to [neurons, T] for sample-major neuron indexing."""
        steps = self.codes.shape[0]
        return self.codes.reshape(steps, -1).T


@dataclass
class SpikeRaster:
    """
    Per-layer, per-neuron, per-timestep record of emissions.

    Burst codes only appear for LIFB and decoupled layers.
    """
    layers: List[RasterLayer] = field(default_factory=list)

    def firing_fractions(self) -> Dict[str, Dict[str, float]]:
        stats = {}
        for layer in self.layers:
            total = layer.codes.size
            burst = int(np.count_nonzero(layer.codes == RasterCode.BURST))
            regular = int(np.count_nonzero(np.abs(layer.codes) == RasterCode.REGULAR))
            stats[layer.name] = {
                "rest": (total - burst - regular) / total if total else 1.0,
                "regular": regular / total if total else 0.0,
                "burst": burst / total if total else 0.0,
            }
        return stats

    @staticmethod
    def merge(shards: List["SpikeRaster"]) -> "SpikeRaster":
        """Concatenates shard rasters along the batch axis in shard order."""
        if not shards:
            return SpikeRaster()
        merged = []
        for index, first in enumerate(shards[0].layers):
            codes = np.concatenate([shard.layers[index].codes for shard in shards], axis=1)
            merged.append(RasterLayer(first.name, first.neuron, codes, first.kappa))
        return SpikeRaster(merged)


@dataclass
class CapacityReport:
    """
    Exact and closed-form information capacity of a spike-train state set.

    Attributes:
        t: Sequence length.
        n: Number of spike states per step.
        alphabet: The ordered spike values.
        exact_count: Number of threshold functions on the cube (None when over budget).
        bound: Closed-form n-state upper bound on the capacity in bits.
        binomial_bound: Affine hyperplane-region bound in bits with m = n**t.
    """
    t: int
    n: int
    alphabet: Tuple[float, ...]
    exact_count: Optional[int]
    bound: float
    binomial_bound: float

    @property
    def exact_capacity(self) -> Optional[float]:
        if self.exact_count is None:
            return None
        return math.log2(self.exact_count)

    @property
    def satisfied(self) -> bool:
        if self.exact_count is None:
            return True
        return self.exact_capacity <= self.bound
