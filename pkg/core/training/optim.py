from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from core.engine.tensor import GradPair, Tensor

# Both weights and kappa follow
#
#   delta <- mu * delta + eps * grad
#   theta <- theta - delta
#
# Weights may add weight_decay * theta to their gradient; kappa never does and
# is never clipped or projected.


def kappa_update(kappa: Tensor, delta: Tensor, grad: Tensor, lr: float, momentum: float) -> Tuple[Tensor, Tensor]:
    """One momentum descent step on a burst-intensity vector; returns (kappa', delta')."""
    delta = momentum * delta + lr * grad
    return kappa - delta, delta


def step_decay(base_lr: float, epoch: int, epochs: int) -> float:
    """x0.1 from half of the run, x0.01 from three quarters."""
    if epochs <= 0:
        return base_lr
    if epoch >= 0.75 * epochs:
        return base_lr * 0.01
    if epoch >= 0.5 * epochs:
        return base_lr * 0.1
    return base_lr


@dataclass
class OptimState:
    """
    Hyperparameters and zero-initialized momentum buffers.

    Attributes:
        lr: Current weight learning rate.
        kappa_lr: Current burst-intensity learning rate.
        momentum: Weight momentum.
        kappa_momentum: Burst-intensity momentum.
        weight_decay: L2 coefficient for weights only.
        buffers: Momentum buffer per parameter name.
        steps: Number of updates applied.
    """
    lr: float
    kappa_lr: float
    momentum: float = 0.9
    kappa_momentum: float = 0.9
    weight_decay: float = 0.0
    buffers: Dict[str, Tensor] = field(default_factory=dict)
    steps: int = 0


class MomentumSGD:

    def __init__(
        self,
        parameters: Dict[str, GradPair],
        lr: float,
        kappa_lr: Optional[float] = None,
        momentum: float = 0.9,
        kappa_momentum: float = 0.9,
        weight_decay: float = 0.0,
    ):
        self.parameters = parameters
        self.base_lr = lr
        self.base_kappa_lr = lr if kappa_lr is None else kappa_lr
        self.state = OptimState(
            lr=lr,
            kappa_lr=self.base_kappa_lr,
            momentum=momentum,
            kappa_momentum=kappa_momentum,
            weight_decay=weight_decay,
            buffers={name: np.zeros_like(pair.value) for name, pair in parameters.items()},
        )

    def schedule(self, epoch: int, epochs: int):
        self.state.lr = step_decay(self.base_lr, epoch, epochs)
        self.state.kappa_lr = step_decay(self.base_kappa_lr, epoch, epochs)

    def step(self):
        state = self.state
        for name, pair in self.parameters.items():
            if not pair.trainable:
                continue
            delta = state.buffers[name]
            if pair.is_kappa:
                pair.value[...], state.buffers[name] = kappa_update(
                    pair.value, delta, pair.grad, state.kappa_lr, state.kappa_momentum
                )
                continue
            grad = pair.grad
            if state.weight_decay:
                grad = grad + state.weight_decay * pair.value
            delta = state.momentum * delta + state.lr * grad
            pair.value -= delta
            state.buffers[name] = delta
        state.steps += 1

    def zero_grad(self):
        for pair in self.parameters.values():
            pair.zero_grad()

    def hyperparameters(self) -> Dict[str, float]:
        state = self.state
        return {
            "lr": state.lr,
            "kappa_lr": state.kappa_lr,
            "base_lr": self.base_lr,
            "base_kappa_lr": self.base_kappa_lr,
            "momentum": state.momentum,
            "kappa_momentum": state.kappa_momentum,
            "weight_decay": state.weight_decay,
            "steps": state.steps,
        }

    def load(self, hyperparameters: Dict[str, float], buffers: Dict[str, Tensor]):
        self.base_lr = hyperparameters["base_lr"]
        self.base_kappa_lr = hyperparameters["base_kappa_lr"]
        self.state.lr = hyperparameters["lr"]
        self.state.kappa_lr = hyperparameters["kappa_lr"]
        self.state.momentum = hyperparameters["momentum"]
        self.state.kappa_momentum = hyperparameters["kappa_momentum"]
        self.state.weight_decay = hyperparameters["weight_decay"]
        self.state.steps = int(hyperparameters["steps"])
        for name, buffer in buffers.items():
            if name in self.state.buffers:
                self.state.buffers[name] = buffer.copy()
