import logging
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.capacity.cube import DEFAULT_POINT_BUDGET, StateCube
from core.capacity.simplex import separable
from core.utils.misc import resolve_threads

logger = logging.getLogger("lifb")

CHUNK = 1 << 12


def is_threshold_function(cube: StateCube, labels: Sequence[int]) -> bool:
    """True iff some affine form is > 0 exactly on the points labeled 1."""
    if len(labels) != cube.size:
        raise ValueError(f"expected {cube.size} labels, got {len(labels)}")
    return separable(cube.exact_points(), [int(label) for label in labels])


def _label_block(size: int, start: int, stop: int) -> np.ndarray:
    """
    Labels [stop - start, size] of the labelings that put point 0 at 0.

    Index k encodes the labels of points 1..size-1 in its bits.
    """
    ks = np.arange(start, stop, dtype=np.int64)[:, np.newaxis]
    shifts = np.arange(size - 1, dtype=np.int64)[np.newaxis, :]
    labels = np.zeros((stop - start, size), dtype=np.int8)
    labels[:, 1:] = (ks >> shifts) & 1
    return labels


def unate_filter(cube: StateCube, labels: np.ndarray) -> np.ndarray:
    """
    Keeps labelings that are monotone along every axis in one direction.

    Every threshold function passes: the sign of its weight on an axis fixes
    the direction along all fibres of that axis.
    """
    order = cube.value_order()
    grid = labels.reshape((labels.shape[0],) + (cube.n,) * cube.t)
    keep = np.ones(labels.shape[0], dtype=bool)
    for axis in range(1, cube.t + 1):
        grid = np.take(grid, order, axis=axis)
    for axis in range(1, cube.t + 1):
        steps = np.diff(grid, axis=axis).reshape(labels.shape[0], -1)
        rising = (steps >= 0).all(axis=1)
        falling = (steps <= 0).all(axis=1)
        keep &= rising | falling
    return keep


def _count_chunk(args: Tuple[Tuple[float, ...], int, int, int]) -> int:
    alphabet, t, start, stop = args
    cube = StateCube(t=t, alphabet=alphabet)
    labels = _label_block(cube.size, start, stop)
    candidates = labels[unate_filter(cube, labels)]
    points = cube.exact_points()
    return sum(1 for row in candidates if separable(points, row.tolist()))


def count_threshold_functions(
    cube: StateCube,
    allow_large: bool = False,
    threads: Optional[int] = None,
    budget: int = DEFAULT_POINT_BUDGET,
) -> int:
    """
    Number of threshold functions on the cube.

    Each labeling and its complement are both separable or both not, so
    only labelings with point 0 at 0 are decided and the result doubled.
    """
    cube.check_budget(allow_large, budget)
    half = 1 << (cube.size - 1)
    chunks: List[Tuple[Tuple[float, ...], int, int, int]] = [
        (cube.alphabet, cube.t, start, min(start + CHUNK, half)) for start in range(0, half, CHUNK)
    ]
    threads = resolve_threads(1) if threads is None else max(1, threads)
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            partial = list(pool.map(_count_chunk, chunks))
    else:
        partial = [_count_chunk(chunk) for chunk in chunks]
    count = 2 * sum(partial)
    logger.debug(f"cube n={cube.n} t={cube.t}: {count} threshold functions over {cube.labelings} labelings")
    return count
