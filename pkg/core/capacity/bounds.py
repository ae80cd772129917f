import math
from dataclasses import dataclass


def _check_t(t: int):
    if t < 1:
        raise ValueError(f"sequence length t must be >= 1, got {t}")


def capacity_bound_binary(t: int) -> float:
    """Capacity bound of binary spike trains of length t: 1 + t^2 - t*log2(t/e)."""
    _check_t(t)
    return 1.0 + t * t - t * math.log2(t / math.e)


def capacity_bound_nstate(t: int, n: int) -> float:
    """Capacity bound of n-state spike trains: 1 + t^2*log2(n) - t*log2(t/e)."""
    _check_t(t)
    if n < 2:
        raise ValueError(f"number of states must be >= 2, got {n}")
    return 1.0 + t * t * math.log2(n) - t * math.log2(t / math.e)


@dataclass(frozen=True)
class GeneralBound:
    """
    Region-counting bounds for m points in t dimensions, in bits.

    homogeneous: log2(2 * sum_{k<t} C(m-1, k)), regions cut by hyperplanes through the origin.
    affine: log2(2 * sum_{k<=t} C(m-1, k)), the same count with a bias term.
    relaxed: 1 + t*log2(e*m/t).
    """
    m: int
    t: int
    homogeneous: float
    affine: float
    relaxed: float


def capacity_bound_general(m: int, t: int) -> GeneralBound:
    _check_t(t)
    if m < 1:
        raise ValueError(f"set size m must be >= 1, got {m}")
    homogeneous = sum(math.comb(m - 1, k) for k in range(t))
    affine = homogeneous + math.comb(m - 1, t)
    return GeneralBound(
        m=m,
        t=t,
        homogeneous=math.log2(2 * homogeneous),
        affine=math.log2(2 * affine),
        relaxed=1.0 + t * math.log2(math.e * m / t),
    )
