from typing import Tuple

import numpy as np

from core.engine.tensor import Tensor, as_tensor
from core.errors import ShapeError


def cross_entropy_loss(logits: Tensor, labels) -> Tuple[float, Tensor]:
    """Mean softmax cross-entropy over the batch and its gradient with respect to the logits."""
    logits = as_tensor(logits)
    labels = np.asarray(labels, dtype=np.int64)
    if logits.ndim != 2 or labels.shape != (logits.shape[0],):
        raise ShapeError(f"logits {tuple(logits.shape)} and labels {tuple(labels.shape)} do not conform")
    classes = logits.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        raise ValueError(f"labels must lie in [0, {classes}), got range [{labels.min()}, {labels.max()}]")

    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    batch = logits.shape[0]
    rows = np.arange(batch)
    loss = float(-log_probs[rows, labels].mean())

    grad = np.exp(log_probs)
    grad[rows, labels] -= 1.0
    return loss, grad / batch
