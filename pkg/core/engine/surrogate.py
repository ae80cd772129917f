"""
Surrogate gradients for the Heaviside step.

Every surrogate exposes a `derivative` (used as dH/du during backward) and its
antiderivative `primitive` (used by the relaxed forward in gradient checks).
New shapes register under a name and are selected through NeuronParams.surrogate.
"""

from typing import Dict, Type

import numpy as np

from core.engine.tensor import Tensor


class Surrogate:
    name: str = "base"

    def __init__(self, width: float):
        if not width > 0:
            raise ValueError(f"surrogate half-width must be > 0, got {width}")
        self.width = float(width)

    def derivative(self, u: Tensor, threshold: float) -> Tensor:
        raise NotImplementedError

    def primitive(self, u: Tensor, threshold: float) -> Tensor:
        raise NotImplementedError


class Rectangular(Surrogate):
    """(1 / 2a) * 1[|u - threshold| < a]; the primitive is the clipped ramp."""

    name = "rectangular"

    def derivative(self, u: Tensor, threshold: float) -> Tensor:
        inside = np.abs(u - threshold) < self.width
        return inside * (1.0 / (2.0 * self.width))

    def primitive(self, u: Tensor, threshold: float) -> Tensor:
        return np.clip((u - threshold) / (2.0 * self.width) + 0.5, 0.0, 1.0)


class Sigmoid(Surrogate):
    """Logistic surrogate with slope 4/(2a), matching the rectangular window's peak height."""

    name = "sigmoid"

    @property
    def slope(self) -> float:
        return 2.0 / self.width

    def primitive(self, u: Tensor, threshold: float) -> Tensor:
        return 1.0 / (1.0 + np.exp(-self.slope * (u - threshold)))

    def derivative(self, u: Tensor, threshold: float) -> Tensor:
        p = self.primitive(u, threshold)
        return self.slope * p * (1.0 - p)


SURROGATES: Dict[str, Type[Surrogate]] = {
    Rectangular.name: Rectangular,
    Sigmoid.name: Sigmoid,
}


def get_surrogate(name: str, width: float) -> Surrogate:
    try:
        return SURROGATES[name](width)
    except KeyError:
        raise ValueError(f"unknown surrogate '{name}', choose from {sorted(SURROGATES)}") from None


def surrogate_grad(u: Tensor, threshold: float, a: float) -> Tensor:
    """Rectangular surrogate dH/du evaluated at u."""
    return Rectangular(a).derivative(np.asarray(u, dtype=float), threshold)
