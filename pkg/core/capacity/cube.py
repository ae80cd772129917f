import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import BudgetExceededError

# Exact counting visits 2 ** (n ** t) labelings.
DEFAULT_POINT_BUDGET = 16


def make_alphabet(n: int, kappa_values: Sequence[float] = ()) -> Tuple[float, ...]:
    """
    Spike values of an n-state neuron: rest 0, regular 1, then burst values.

    Missing burst values are filled with the smallest unused integers >= 2.
    """
    if n < 2:
        raise ValueError(f"a spike alphabet needs at least 2 states, got n={n}")
    values = [0.0, 1.0]
    for kappa in list(kappa_values)[: n - 2]:
        kappa = float(kappa)
        if kappa in values:
            raise ValueError(f"burst value {kappa} collapses onto an existing state of {values}")
        values.append(kappa)
    filler = 2
    while len(values) < n:
        if float(filler) not in values:
            values.append(float(filler))
        filler += 1
    return tuple(values)


@dataclass
class StateCube:
    """
    All n ** t spike trains of length t over an ordered alphabet.

    Points are enumerated in lexicographic order of alphabet indices, so point
    0 is the all-first-value train.
    """
    t: int
    alphabet: Tuple[float, ...]
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.alphabet = tuple(float(value) for value in self.alphabet)
        if self.t < 1:
            raise ValueError(f"sequence length t must be >= 1, got {self.t}")
        if len(self.alphabet) < 2:
            raise ValueError("a state cube needs at least two spike values")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError(f"spike values must be pairwise distinct, got {self.alphabet}")
        self.points = np.array(list(itertools.product(self.alphabet, repeat=self.t)), dtype=np.float64)

    @property
    def n(self) -> int:
        return len(self.alphabet)

    @property
    def size(self) -> int:
        return self.n ** self.t

    @property
    def labelings(self) -> int:
        return 2 ** self.size

    def exact_points(self) -> List[List[Fraction]]:
        return [[Fraction(value) for value in point] for point in self.points]

    def within_budget(self, budget: int = DEFAULT_POINT_BUDGET) -> bool:
        return self.size <= budget

    def check_budget(self, allow_large: bool = False, budget: int = DEFAULT_POINT_BUDGET):
        if not allow_large and not self.within_budget(budget):
            raise BudgetExceededError(
                f"cube with n={self.n}, t={self.t} has {self.size} points "
                f"({self.labelings} labelings); the limit is {budget} points, pass --allow-large to override"
            )

    def value_order(self) -> np.ndarray:
        """Permutation sorting the alphabet increasingly."""
        return np.argsort(np.asarray(self.alphabet))

    @classmethod
    def from_states(cls, t: int, n: int, kappa_values: Optional[Sequence[float]] = None) -> "StateCube":
        return cls(t=t, alphabet=make_alphabet(n, kappa_values or ()))
