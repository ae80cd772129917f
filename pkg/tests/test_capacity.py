import csv
import io
import itertools
import math
import unittest

import numpy as np
import pytest

from core.capacity import (
    CURVE_HEADER,
    StateCube,
    capacity_bound_binary,
    capacity_bound_general,
    capacity_bound_nstate,
    capacity_curve,
    capacity_report,
    count_threshold_functions,
    curve_csv,
    is_threshold_function,
    make_alphabet,
    unate_filter,
)
from core.errors import BudgetExceededError
from tests.helpers import perceptron_separable

# Threshold functions on the binary cube of dimension t.
BINARY_COUNTS = {1: 4, 2: 14, 3: 104}


class StateCubeTestCase(unittest.TestCase):

    def test_points_are_lexicographic_and_distinct(self):
        cube = StateCube(t=2, alphabet=(0.0, 1.0, 1.5))
        self.assertEqual(cube.size, 9)
        self.assertEqual(cube.points.tolist()[:4], [[0.0, 0.0], [0.0, 1.0], [0.0, 1.5], [1.0, 0.0]])
        self.assertEqual(len({tuple(point) for point in cube.points.tolist()}), 9)

    def test_invalid_cubes(self):
        with self.assertRaises(ValueError):
            StateCube(t=0, alphabet=(0.0, 1.0))
        with self.assertRaises(ValueError):
            StateCube(t=2, alphabet=(0.0, 1.0, 1.0))

    def test_alphabet(self):
        self.assertEqual(make_alphabet(2), (0.0, 1.0))
        self.assertEqual(make_alphabet(4, [1.5]), (0.0, 1.0, 1.5, 2.0))
        self.assertEqual(make_alphabet(4, [2.0]), (0.0, 1.0, 2.0, 3.0))
        with self.assertRaises(ValueError):
            make_alphabet(1)
        with self.assertRaises(ValueError):
            make_alphabet(3, [1.0])

    def test_budget(self):
        cube = StateCube.from_states(3, 3)
        with self.assertRaises(BudgetExceededError) as error:
            count_threshold_functions(cube)
        self.assertIn("--allow-large", str(error.exception))
        self.assertTrue(StateCube.from_states(4, 2).within_budget())


class CountingTestCase(unittest.TestCase):

    def test_binary_golden_counts(self):
        for t, expected in BINARY_COUNTS.items():
            count = count_threshold_functions(StateCube.from_states(t, 2))
            self.assertEqual(count, expected)
            self.assertLessEqual(math.log2(count), capacity_bound_binary(t))

    def test_parity_is_not_a_threshold_function(self):
        cube = StateCube.from_states(2, 2)
        self.assertFalse(is_threshold_function(cube, [0, 1, 1, 0]))
        self.assertFalse(is_threshold_function(cube, [1, 0, 0, 1]))
        self.assertTrue(is_threshold_function(cube, [0, 1, 1, 1]))
        self.assertTrue(is_threshold_function(cube, [0, 0, 0, 0]))

    def test_label_count_must_match(self):
        with self.assertRaises(ValueError):
            is_threshold_function(StateCube.from_states(2, 2), [0, 1, 1])

    def test_three_states(self):
        # three collinear points: every prefix and suffix of the line
        self.assertEqual(count_threshold_functions(StateCube.from_states(1, 3, [1.5])), 6)
        self.assertEqual(count_threshold_functions(StateCube.from_states(2, 3, [2.0])), 58)
        # {0, 1, 1.5} has no collinear anti-diagonal, so two more cuts exist
        self.assertEqual(count_threshold_functions(StateCube.from_states(2, 3, [1.5])), 60)

    def test_complement_symmetry(self):
        cube = StateCube.from_states(2, 3, [1.5])
        for bits in itertools.product([0, 1], repeat=cube.size):
            if bits[0] == 0:
                complement = [1 - bit for bit in bits]
                self.assertEqual(is_threshold_function(cube, bits), is_threshold_function(cube, complement))

    def test_unate_filter_keeps_every_threshold_function(self):
        cube = StateCube.from_states(2, 3, [0.5])
        labels = np.array(list(itertools.product([0, 1], repeat=cube.size)), dtype=np.int8)
        keep = unate_filter(cube, labels)
        for row, kept in zip(labels, keep):
            if is_threshold_function(cube, row.tolist()):
                self.assertTrue(kept)


@pytest.mark.parametrize("t", [2, 3])
def test_simplex_agrees_with_perceptron(t):
    cube = StateCube.from_states(t, 2)
    points = cube.points.tolist()
    for bits in itertools.product([0, 1], repeat=cube.size):
        assert is_threshold_function(cube, bits) == perceptron_separable(points, bits)


@pytest.mark.parametrize("kappa, expected", [(0.5, 58), (2.0, 58), (1.5, 60), (3.0, 60)])
def test_count_depends_on_kappa_only_through_affine_class(kappa, expected):
    assert count_threshold_functions(StateCube(t=2, alphabet=(0.0, 1.0, kappa))) == expected


def test_count_matches_perceptron_on_uneven_grid():
    cube = StateCube(t=2, alphabet=(0.0, 1.0, 3.0))
    points = cube.points.tolist()
    separable = sum(
        perceptron_separable(points, bits) for bits in itertools.product([0, 1], repeat=cube.size)
    )
    assert separable == count_threshold_functions(cube) == 60


def test_count_is_invariant_under_affine_maps():
    assert count_threshold_functions(StateCube(t=3, alphabet=(-3.0, 4.5))) == 104


@pytest.mark.slow
def test_binary_four_dimensional_cube():
    cube = StateCube.from_states(4, 2)
    count = count_threshold_functions(cube, threads=2)
    assert count == 1882
    assert count == count_threshold_functions(cube, threads=1)


class BoundsTestCase(unittest.TestCase):

    def test_binary_values(self):
        self.assertAlmostEqual(capacity_bound_binary(1), 2 + math.log2(math.e), places=12)
        self.assertAlmostEqual(capacity_bound_binary(2), 5.8854, places=4)
        self.assertLessEqual(math.log2(14), capacity_bound_binary(2))
        with self.assertRaises(ValueError):
            capacity_bound_binary(0)

    def test_nstate_values(self):
        self.assertAlmostEqual(capacity_bound_nstate(2, 3), 1 + 4 * math.log2(3) + 2 * math.log2(math.e / 2), places=12)
        self.assertAlmostEqual(capacity_bound_nstate(2, 3), 8.2252, places=4)
        for t in range(1, 8):
            self.assertEqual(capacity_bound_nstate(t, 2), capacity_bound_binary(t))
            bounds = [capacity_bound_nstate(t, n) for n in range(2, 7)]
            self.assertEqual(bounds, sorted(set(bounds)))
        with self.assertRaises(ValueError):
            capacity_bound_nstate(2, 1)

    def test_general_values(self):
        single = capacity_bound_general(1, 1)
        self.assertEqual(single.homogeneous, 1.0)
        self.assertEqual(single.affine, 1.0)
        with self.assertRaises(ValueError):
            capacity_bound_general(0, 1)
        with self.assertRaises(ValueError):
            capacity_bound_general(4, 0)

    def test_binomial_sum_below_relaxed_bound(self):
        for m in range(1, 65):
            for t in range(1, min(m, 6) + 1):
                bound = capacity_bound_general(m, t)
                self.assertLessEqual(bound.homogeneous, bound.relaxed + 1e-12)
                self.assertLessEqual(bound.homogeneous, bound.affine)

    def test_exact_counts_respect_bounds(self):
        cubes = [StateCube.from_states(t, 2) for t in (1, 2, 3)]
        cubes += [StateCube.from_states(t, 3, [1.5]) for t in (1, 2)]
        for cube in cubes:
            report = capacity_report(cube)
            self.assertTrue(report.satisfied)
            self.assertLessEqual(report.exact_capacity, report.binomial_bound + 1e-12)


class CurveTestCase(unittest.TestCase):

    def test_bound_columns_are_monotone_in_states(self):
        reports = capacity_curve(5, [2, 3, 4], exact=False)
        for t in range(1, 6):
            row = [report.bound for report in reports if report.t == t]
            self.assertLess(row[0], row[1])
            self.assertLess(row[1], row[2])
        self.assertTrue(all(report.exact_count is None for report in reports))

    def test_binary_exact_column(self):
        reports = capacity_curve(3, [2])
        self.assertEqual([report.exact_count for report in reports], [4, 14, 104])

    def test_over_budget_rows_keep_bounds(self):
        reports = capacity_curve(3, [3], kappa=[1.5])
        self.assertEqual([report.exact_count for report in reports], [6, 60, None])
        self.assertTrue(reports[2].satisfied)
        self.assertGreater(reports[2].bound, 0)

    def test_csv_parses_with_header(self):
        text = curve_csv(capacity_curve(2, [2, 3]))
        rows = list(csv.reader(io.StringIO(text, newline="")))
        self.assertEqual(tuple(rows[0]), CURVE_HEADER)
        self.assertEqual(len(rows), 5)
        self.assertEqual(rows[1][:4], ["1", "2", "0.0 1.0", "4"])
        self.assertEqual(rows[1][-1], "true")
        self.assertTrue(text.endswith("\r\n"))

    def test_invalid_length(self):
        with self.assertRaises(ValueError):
            capacity_curve(0, [2])
