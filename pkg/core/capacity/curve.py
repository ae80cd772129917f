import logging
from typing import List, Optional, Sequence

from core.capacity.bounds import capacity_bound_general, capacity_bound_nstate
from core.capacity.counting import count_threshold_functions
from core.capacity.cube import DEFAULT_POINT_BUDGET, StateCube
from core.protocol import CapacityReport
from core.utils.misc import csv_text, format_float

logger = logging.getLogger("lifb")

CURVE_HEADER = (
    "t",
    "n",
    "alphabet",
    "exact_count",
    "exact_capacity",
    "bound",
    "binomial_bound",
    "satisfied",
)


def capacity_report(
    cube: StateCube, exact: bool = True, allow_large: bool = False, threads: Optional[int] = None
) -> CapacityReport:
    """Bounds for the cube plus its exact count when enumeration fits the budget."""
    count = None
    if exact and (allow_large or cube.within_budget(DEFAULT_POINT_BUDGET)):
        count = count_threshold_functions(cube, allow_large=allow_large, threads=threads)
    return CapacityReport(
        t=cube.t,
        n=cube.n,
        alphabet=cube.alphabet,
        exact_count=count,
        bound=capacity_bound_nstate(cube.t, cube.n),
        binomial_bound=capacity_bound_general(cube.size, cube.t).affine,
    )


def capacity_curve(
    t_max: int,
    n_list: Sequence[int],
    kappa: Sequence[float] = (),
    allow_large: bool = False,
    threads: Optional[int] = None,
    exact: bool = True,
) -> List[CapacityReport]:
    """
    One report per (t, n) for t = 1..t_max, ordered by t then by n.

    Cubes over the enumeration budget get bounds only unless allow_large is set.
    """
    if t_max < 1:
        raise ValueError(f"t_max must be >= 1, got {t_max}")
    reports = []
    for t in range(1, t_max + 1):
        for n in n_list:
            cube = StateCube.from_states(t, n, kappa)
            report = capacity_report(cube, exact=exact, allow_large=allow_large, threads=threads)
            if report.exact_count is None and exact:
                logger.info(f"t={t} n={n}: {cube.size} points exceed the enumeration budget, bounds only")
            reports.append(report)
    return reports


def curve_rows(reports: Sequence[CapacityReport]) -> List[list]:
    rows = []
    for report in reports:
        rows.append(
            [
                report.t,
                report.n,
                " ".join(format_float(value) for value in report.alphabet),
                "" if report.exact_count is None else report.exact_count,
                "" if report.exact_capacity is None else format_float(report.exact_capacity),
                format_float(report.bound),
                format_float(report.binomial_bound),
                "true" if report.satisfied else "false",
            ]
        )
    return rows


def curve_csv(reports: Sequence[CapacityReport]) -> str:
    return csv_text(CURVE_HEADER, curve_rows(reports))
