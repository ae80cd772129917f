from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from core.engine.tensor import DTYPE, Tensor, as_tensor
from core.errors import ShapeError


@dataclass
class LabeledDataset:
    """
    Samples with integer class labels.

    Attributes:
        images: Samples laid out [N, C, H, W] (image tasks) or [N, D] (vector tasks).
        labels: Integer labels in [0, classes).
        classes: Number of classes.
        split: Free-form split tag such as "train" or "val".
    """
    images: Tensor
    labels: np.ndarray
    classes: int
    split: str = "train"

    def __post_init__(self):
        self.images = as_tensor(self.images)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.ndim != 1 or self.images.shape[0] != self.labels.shape[0]:
            raise ShapeError(
                f"{self.images.shape[0]} samples but labels have shape {tuple(self.labels.shape)}"
            )
        if self.classes < 1:
            raise ValueError(f"classes must be >= 1, got {self.classes}")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.classes):
            raise ValueError(
                f"labels must lie in [0, {self.classes}), got [{self.labels.min()}, {self.labels.max()}]"
            )

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def sample_shape(self) -> Tuple[int, ...]:
        return tuple(self.images.shape[1:])

    def subset(self, indices: Sequence[int], split: Optional[str] = None) -> "LabeledDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.images[indices], self.labels[indices], self.classes, split or self.split)

    def head(self, count: int) -> "LabeledDataset":
        return self.subset(np.arange(min(count, len(self))))

    def channel_stats(self) -> Tuple[Tensor, Tensor]:
        """Per-channel mean and std over samples and spatial positions."""
        axes = tuple(axis for axis in range(self.images.ndim) if axis != 1)
        mean = self.images.mean(axis=axes)
        std = self.images.std(axis=axes)
        return mean, np.where(std > 0, std, 1.0)

    def normalized(self, mean: Tensor, std: Tensor) -> "LabeledDataset":
        shape = (1, -1) + (1,) * (self.images.ndim - 2)
        images = (self.images - mean.reshape(shape)) / std.reshape(shape)
        return LabeledDataset(images.astype(DTYPE), self.labels, self.classes, self.split)
