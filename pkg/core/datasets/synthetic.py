import numpy as np

from core.datasets.dataset import LabeledDataset


def synth_gaussians(n: int, d: int = 2, seed: int = 0, separation: float = 6.0) -> LabeledDataset:
    """
    Two unit-variance Gaussian classes whose means are `separation` apart
    along the first axis; n // 2 samples per class.
    """
    if n < 4:
        raise ValueError(f"need at least 2 samples per class, got n={n}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    per_class = n // 2
    labels = np.repeat(np.arange(2), per_class)
    offset = np.zeros(d)
    offset[0] = separation / 2.0
    samples = rng.standard_normal((2 * per_class, d))
    samples += np.where(labels[:, np.newaxis] == 1, offset, -offset)
    order = rng.permutation(2 * per_class)
    return LabeledDataset(samples[order], labels[order], classes=2, split="synthetic")


def synth_bars(n: int, seed: int = 0, size: int = 8, noise: float = 0.1) -> LabeledDataset:
    """
    size x size images holding one horizontal (class 0) or vertical (class 1)
    bar at a random offset, plus Gaussian pixel noise. Exactly n / 2 per class.
    """
    if n < 4 or n % 2:
        raise ValueError(f"n must be even and >= 4, got {n}")
    rng = np.random.default_rng(seed)
    per_class = n // 2
    images = np.zeros((n, 1, size, size))
    positions = rng.integers(0, size, size=n)
    for index in range(n):
        if index < per_class:
            images[index, 0, positions[index], :] = 1.0
        else:
            images[index, 0, :, positions[index]] = 1.0
    images += noise * rng.standard_normal(images.shape)
    labels = np.repeat(np.arange(2), per_class)
    order = rng.permutation(n)
    return LabeledDataset(images[order], labels[order], classes=2, split="synthetic")
