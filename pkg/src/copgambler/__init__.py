"""Cop-versus-unknown-gambler pursuit lab on connected graphs."""

from .exact import expected_capture_time
from .gambler import GamblerDistribution, from_weights, point_mass, uniform
from .graph import Graph, generate, parse_graph, spanning_tree
from .montecarlo import estimate_expected_capture
from .sweep import DEFAULT_C, StrategyConfig

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "GamblerDistribution",
    "DEFAULT_C",
    "StrategyConfig",
    "estimate_expected_capture",
    "expected_capture_time",
    "from_weights",
    "generate",
    "parse_graph",
    "point_mass",
    "spanning_tree",
    "uniform",
]
