"""Diameter-bounded clique partitioning: exact solvers and a learned edge-selection policy."""

from .instance import Instance, generate, load_instance, save_instance
from .objective import Partition, evaluate, near_pairs, optimality_gap, savings
from .environment import EnvState, replay, reset
from .exact import brute_force_reference, solve_exact_dp

__version__ = "0.1.0"
