"""Contrast subgraphs: vertex sets dense in one group of graphs and sparse in another."""

__version__ = "0.1.0"

from .contrast import AlphaSpec, ContrastResult, extract, extract_symmetric, resolve_alpha
from .errors import ContrastError
from .goqc import GoqcInstance, SolverConfig, SolverTrace, goqc_objective, local_search, solve
from .graphs import GraphGroup, ObservationGraph, TimeSeriesMatrix, correlation_graph, edge_count_induced, load_group
from .pipeline import EvalReport, FeatureTable, extract_rules, features_p1, features_p2, train_eval
from .summarize import DifferenceGraph, SummaryGraph, build_difference, build_summary, weighted_degrees
from .synth import PlantedSpec, brute_force, fixture_f2, planted_dataset

__all__ = [
    "AlphaSpec", "ContrastError", "ContrastResult", "DifferenceGraph", "EvalReport", "FeatureTable",
    "GoqcInstance", "GraphGroup", "ObservationGraph", "PlantedSpec", "SolverConfig", "SolverTrace",
    "SummaryGraph", "TimeSeriesMatrix", "brute_force", "build_difference", "build_summary",
    "correlation_graph", "edge_count_induced", "extract", "extract_rules", "extract_symmetric",
    "features_p1", "features_p2", "fixture_f2", "goqc_objective", "load_group", "local_search",
    "planted_dataset", "resolve_alpha", "solve", "train_eval", "weighted_degrees",
]
