from .cube import DEFAULT_POINT_BUDGET, StateCube, make_alphabet
from .simplex import separable
from .counting import count_threshold_functions, is_threshold_function, unate_filter
from .bounds import GeneralBound, capacity_bound_binary, capacity_bound_general, capacity_bound_nstate
from .curve import CURVE_HEADER, capacity_curve, capacity_report, curve_csv
