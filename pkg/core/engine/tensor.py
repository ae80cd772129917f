"""Dense tensor substrate: numpy float64 arrays plus gradient accumulators."""

import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from core.errors import ShapeError

# 32-bit is a build-wide opt-in; every bit-exactness claim assumes 64-bit.
DTYPE = np.float32 if os.getenv("LIFB_FLOAT32") == "1" else np.float64

Tensor = np.ndarray


def as_tensor(value) -> Tensor:
    """Returns a C-contiguous array of the engine dtype (no copy when already conforming)."""
    return np.ascontiguousarray(value, dtype=DTYPE)


def zeros(shape: Sequence[int]) -> Tensor:
    return np.zeros(tuple(shape), dtype=DTYPE)


def check_same_shape(a_name: str, a: Tensor, b_name: str, b: Tensor):
    if a.shape != b.shape:
        raise ShapeError(f"{a_name} shape {tuple(a.shape)} does not match {b_name} shape {tuple(b.shape)}")


@dataclass
class GradPair:
    """
    A trainable value and its accumulated gradient.

    `accumulate` adds into `grad`; backward passes never overwrite it, so two
    backward calls sum. `zero_grad` resets the accumulator.
    """
    value: Tensor
    grad: Tensor = field(default=None)
    trainable: bool = True
    # kappa parameters take the burst-intensity learning rate and no weight decay
    is_kappa: bool = False

    def __post_init__(self):
        self.value = as_tensor(self.value)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        check_same_shape("value", self.value, "grad", self.grad)

    @property
    def shape(self):
        return self.value.shape

    def accumulate(self, grad: Tensor):
        check_same_shape("grad", grad, "value", self.value)
        self.grad += grad

    def zero_grad(self):
        self.grad[...] = 0.0

    def copy(self) -> "GradPair":
        return GradPair(self.value.copy(), self.grad.copy(), self.trainable, self.is_kappa)
