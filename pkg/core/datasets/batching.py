from typing import Iterator, List, Optional, Tuple

import numpy as np

from core.datasets.dataset import LabeledDataset
from core.engine.tensor import Tensor


def batch_order(size: int, seed: int, epoch: int, shuffle: bool) -> np.ndarray:
    if not shuffle:
        return np.arange(size)
    return np.random.default_rng([seed, epoch]).permutation(size)


def batches(
    dataset: LabeledDataset, batch_size: int, seed: int = 0, shuffle: bool = True, epoch: int = 0
) -> Iterator[Tuple[Tensor, np.ndarray]]:
    """
    Yields (images, labels) covering the dataset exactly once.

    The order depends only on (seed, epoch); the last partial batch is kept.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    order = batch_order(len(dataset), seed, epoch, shuffle)
    for start in range(0, len(dataset), batch_size):
        index = order[start:start + batch_size]
        yield dataset.images[index], dataset.labels[index]


def augment(images: Tensor, rng: np.random.Generator, crop_padding: int = 0, flip: bool = False) -> Tensor:
    """Random horizontal flip and zero-padded random crop of an [N, C, H, W] batch."""
    if images.ndim != 4 or (crop_padding == 0 and not flip):
        return images
    out = images.copy()
    if flip:
        mirrored = rng.random(out.shape[0]) < 0.5
        out[mirrored] = out[mirrored, :, :, ::-1]
    if crop_padding > 0:
        pad = crop_padding
        padded = np.pad(out, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
        height, width = out.shape[2:]
        shifts = rng.integers(0, 2 * pad + 1, size=(out.shape[0], 2))
        for index, (dy, dx) in enumerate(shifts):
            out[index] = padded[index, :, dy:dy + height, dx:dx + width]
    return out


def normalize_splits(train: LabeledDataset, *others: LabeledDataset) -> List[LabeledDataset]:
    """Normalizes every split with per-channel statistics of the training split."""
    mean, std = train.channel_stats()
    return [split.normalized(mean, std) for split in (train,) + others]


def split_dataset(dataset: LabeledDataset, val_fraction: float, seed: int = 0) -> Tuple[LabeledDataset, LabeledDataset]:
    """Seeded train/val split; the validation part gets round(N * val_fraction) samples."""
    if not 0.0 < val_fraction < 1.0:
        raise ValueError(f"val_fraction must lie in (0, 1), got {val_fraction}")
    order = np.random.default_rng(seed).permutation(len(dataset))
    cut = len(dataset) - int(round(len(dataset) * val_fraction))
    return dataset.subset(order[:cut], "train"), dataset.subset(order[cut:], "val")
