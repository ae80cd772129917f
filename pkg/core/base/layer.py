from abc import ABC, abstractmethod
from typing import Any, Dict, Tuple

from core.engine.tensor import GradPair, Tensor


class BaseLayer(ABC):
    """
    A stateless-between-calls building block of a time-unrolled network.

    Inputs and outputs are laid out [T, B, ...]. `forward` returns the output
    and an opaque context; `backward` consumes that context, accumulates into
    the layer's GradPairs and returns the gradient with respect to the input.
    """

    layer_type: str = "BaseLayer"

    def __init__(self, name: str):
        self.name = name

    @abstractmethod
    def forward(self, x: Tensor, training: bool) -> Tuple[Tensor, Any]:
        ...

    @abstractmethod
    def backward(self, ctx: Any, grad_out: Tensor) -> Tensor:
        ...

    @abstractmethod
    def output_shape(self, input_shape: Tuple[int, ...]) -> Tuple[int, ...]:
        """Per-sample output shape for a per-sample input shape."""

    def parameters(self) -> Dict[str, GradPair]:
        return {}

    def buffers(self) -> Dict[str, Tensor]:
        return {}

    def __repr__(self):
        return f"{self.layer_type}({self.name})"
