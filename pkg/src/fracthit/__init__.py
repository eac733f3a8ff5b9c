"""Fractional and integral hitting sets for range spaces of bounded VC dimension."""

from .core import FractionalSolution, RangeSpaceInstance, check_feasibility
from .finite import FiniteInstance, load_instance, random_instance
from .mwu import compute_schedule, solve_fractional
from .nets import round_to_hitting_set
from .bg import bg_binary_search, bg_hitting_set

__version__ = "0.1.0"

__all__ = [
    "FiniteInstance",
    "FractionalSolution",
    "RangeSpaceInstance",
    "bg_binary_search",
    "bg_hitting_set",
    "check_feasibility",
    "compute_schedule",
    "load_instance",
    "random_instance",
    "round_to_hitting_set",
    "solve_fractional",
]
