"""Strictly nonblocking traffic grooming in WDM tree and star networks.

A permutation genetic algorithm decodes each chromosome by first-fit
grooming, optionally splitting demands into parts (dividing), into two
segments at an intermediate drop node (cutting), or both (synthesized).
"""

from .bounds import BoundsReport, bounds_report, link_loads, node_add_drop
from .decoder import GroomingSolution, SplitMode, decode, decode_fitness, load_solution, save_solution
from .evolution import Fitness, GaParams, compare_fitness, evolve, inversion_mutation, ox_crossover
from .experiment import ExperimentConfig, emit_plot_data, run_sweep
from .grooming import Fragment, GroomingState
from .topology import TreeTopology, build_topology, complete_binary, route, star
from .traffic import TrafficInstance, demand_index, generate_instance, load_instance, save_instance
from .verify import exhaustive_oracle, validate

__version__ = "0.1.0"

__all__ = [
    "BoundsReport", "bounds_report", "link_loads", "node_add_drop",
    "GroomingSolution", "SplitMode", "decode", "decode_fitness", "load_solution", "save_solution",
    "Fitness", "GaParams", "compare_fitness", "evolve", "inversion_mutation", "ox_crossover",
    "ExperimentConfig", "emit_plot_data", "run_sweep",
    "Fragment", "GroomingState",
    "TreeTopology", "build_topology", "complete_binary", "route", "star",
    "TrafficInstance", "demand_index", "generate_instance", "load_instance", "save_instance",
    "exhaustive_oracle", "validate",
]
