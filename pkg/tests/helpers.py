import logging
import struct
from typing import Callable, List, Sequence

import numpy as np


class CLOSE_IN_VALUE:
    """Compares equal to anything within `tolerance` of `value`."""

    def __init__(self, value: float, tolerance: float = 0.0) -> None:
        self.value = value
        self.tolerance = tolerance

    def __eq__(self, other) -> bool:
        return (self.value - self.tolerance) <= other <= (self.value + self.tolerance)

    def __repr__(self):
        return f"{self.value}±{self.tolerance}"


def numeric_grad(f: Callable[[], float], x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of the scalar f() with respect to every entry of x (perturbed in place)."""
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        index = it.multi_index
        original = x[index]
        x[index] = original + h
        plus = f()
        x[index] = original - h
        minus = f()
        x[index] = original
        grad[index] = (plus - minus) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / scale)


def perceptron_separable(points: Sequence[Sequence[float]], labels: Sequence[int], epochs: int = 1000) -> bool:
    """Independent separability oracle: a bias-augmented perceptron that must classify with margin."""
    x = np.hstack([np.asarray(points, dtype=float), np.ones((len(points), 1))])
    y = np.where(np.asarray(labels) == 1, 1.0, -1.0)
    w = np.zeros(x.shape[1])
    for _ in range(epochs):
        mistakes = 0
        for xi, yi in zip(x, y):
            if yi * (xi @ w) <= 0.0:
                w += yi * xi
                mistakes += 1
        if mistakes == 0:
            return True
    return False


def idx_fixture(dims: Sequence[int], payload: bytes) -> bytes:
    """IDX bytes built by hand: two zero bytes, type 0x08, ndim, big-endian dims, payload."""
    return b"\x00\x00\x08" + bytes([len(dims)]) + b"".join(struct.pack(">I", d) for d in dims) + payload


class ListHandler(logging.Handler):
    """Collects records of the package logger for assertions."""

    def __init__(self):
        super().__init__(level=logging.DEBUG)
        self.records: List[logging.LogRecord] = []

    def emit(self, record):
        self.records.append(record)

    def messages(self, level: int = logging.WARNING) -> List[str]:
        return [record.getMessage() for record in self.records if record.levelno >= level]

    def __enter__(self):
        logger = logging.getLogger("lifb")
        self._level = logger.level
        logger.addHandler(self)
        logger.setLevel(logging.DEBUG)
        return self

    def __exit__(self, *exc):
        logger = logging.getLogger("lifb")
        logger.removeHandler(self)
        logger.setLevel(self._level)
