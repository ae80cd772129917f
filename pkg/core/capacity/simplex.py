from fractions import Fraction
from typing import List, Sequence

# Phase-1 simplex over exact rationals with Bland's rule.
#
# Decides whether some affine form f(x) = <a, x> + b puts every positive
# point at f >= 1 and every negative point at f <= 0. The free variables a
# and b are split into nonnegative parts; negative rows start with their slack
# basic, positive rows with an artificial. Artificials leave the basis for
# good once they are pivoted out.

ZERO = Fraction(0)
ONE = Fraction(1)


class Tableau:

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int], artificial_from: int):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.artificial_from = artificial_from
        self.width = len(rows[0]) if rows else 0
        self.cost = [ZERO] * self.width
        self.objective = ZERO
        for i, var in enumerate(basis):
            if var >= artificial_from:
                for j in range(self.width):
                    self.cost[j] -= rows[i][j]
                self.objective += rhs[i]
        for j in range(artificial_from, self.width):
            self.cost[j] = ZERO

    def pivot(self, i: int, j: int):
        row = self.rows[i]
        piv = row[j]
        if piv != ONE:
            self.rows[i] = row = [value / piv for value in row]
            self.rhs[i] /= piv
        for k, other in enumerate(self.rows):
            if k == i:
                continue
            factor = other[j]
            if factor:
                self.rows[k] = [a - factor * b for a, b in zip(other, row)]
                self.rhs[k] -= factor * self.rhs[i]
        factor = self.cost[j]
        if factor:
            self.cost = [a - factor * b for a, b in zip(self.cost, row)]
            self.objective += factor * self.rhs[i]
        self.basis[i] = j

    def entering(self) -> int:
        for j in range(self.artificial_from):
            if self.cost[j] < 0:
                return j
        return -1

    def leaving(self, j: int) -> int:
        best, best_ratio = -1, None
        for i, row in enumerate(self.rows):
            if row[j] > 0:
                ratio = self.rhs[i] / row[j]
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and self.basis[i] < self.basis[best]
                ):
                    best, best_ratio = i, ratio
        return best

    def solve(self) -> bool:
        """Runs phase 1 to optimality; True iff the artificial sum reaches zero."""
        while self.objective > 0:
            j = self.entering()
            if j < 0:
                break
            i = self.leaving(j)
            if i < 0:
                # phase 1 is bounded below by zero
                break
            self.pivot(i, j)
        return self.objective == 0


def separable(points: Sequence[Sequence[Fraction]], labels: Sequence[int]) -> bool:
    """
    Exact strict linear separability of a labeled point set.

    Positive points must satisfy <a, x> + b > 0 and negative ones <= 0; on a
    finite set this is equivalent to the margin-1 system solved here.
    """
    if not points:
        return True
    dims = len(points[0])
    positives = [i for i, label in enumerate(labels) if label]
    if not positives:
        return True
    free = 2 * (dims + 1)
    slacks = len(points)
    artificial_from = free + slacks
    width = artificial_from + len(positives)

    rows, rhs, basis = [], [], []
    artificial = artificial_from
    for index, (point, label) in enumerate(zip(points, labels)):
        row = [ZERO] * width
        for d, value in enumerate(point):
            row[d] = value
            row[dims + 1 + d] = -value
        row[dims] = ONE
        row[2 * dims + 1] = -ONE
        if label:
            row[free + index] = -ONE
            row[artificial] = ONE
            basis.append(artificial)
            rhs.append(ONE)
            artificial += 1
        else:
            row[free + index] = ONE
            basis.append(free + index)
            rhs.append(ZERO)
        rows.append(row)
    return Tableau(rows, rhs, basis, artificial_from).solve()
