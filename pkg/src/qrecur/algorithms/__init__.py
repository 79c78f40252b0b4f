"""Quantum algorithms assembled from simulator blocks, with classical post-processing."""
from .counting import count_problem, estimate_from_index, grover_operator, quantum_count
from .period import (
    Extraction,
    default_time_width,
    extract_period,
    lattice_period_circuit,
    lattice_period_distribution,
    lattice_period_gate_count,
    point_period_circuit,
    q_lattice_period,
    q_point_period,
)
from .results import SCHEMA_VERSION, CountResult, PeriodResult, SearchResult, dumps, envelope, strip_volatile
from .search import (
    GroverProblem,
    SearchError,
    grover_periodic_search,
    grover_return_search,
    optimal_iterations,
    oracle_marked_set,
    periodic_problem,
    predicted_success,
    return_problem,
    run_grover,
    success_probability,
)

__all__ = [
    "count_problem",
    "CountResult",
    "default_time_width",
    "dumps",
    "envelope",
    "estimate_from_index",
    "extract_period",
    "Extraction",
    "grover_operator",
    "grover_periodic_search",
    "grover_return_search",
    "GroverProblem",
    "lattice_period_circuit",
    "lattice_period_distribution",
    "lattice_period_gate_count",
    "optimal_iterations",
    "oracle_marked_set",
    "periodic_problem",
    "PeriodResult",
    "point_period_circuit",
    "predicted_success",
    "q_lattice_period",
    "q_point_period",
    "quantum_count",
    "return_problem",
    "run_grover",
    "SCHEMA_VERSION",
    "SearchError",
    "SearchResult",
    "strip_volatile",
    "success_probability",
]
