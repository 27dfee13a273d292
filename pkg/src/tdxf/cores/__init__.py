"""Concrete DP-cores and the shared table engine."""

from ..graphs import Graph, ProblemSpec
from .base import (
    Codec,
    DPCore,
    Overflow,
    PreservationReport,
    Tables,
    check_solution_preserving,
    enumerate_witness_trees,
    extract_solution,
    run_tables,
)
from .coloring import ColoringCore
from .cut import CutCore
from .dominating_set import DominatingSetCore
from .hamiltonian import HamiltonianCycleCore
from .independent_set import IndependentSetCore


def make_core(spec: ProblemSpec, graph: Graph, paper_literal: bool = False) -> DPCore:
    if spec.kind == "is":
        return IndependentSetCore(graph, spec)
    if spec.kind == "ds":
        return DominatingSetCore(graph, spec, paper_literal=paper_literal)
    if spec.kind == "cut":
        return CutCore(graph, spec)
    if spec.kind == "hc":
        return HamiltonianCycleCore(graph, spec, paper_literal=paper_literal)
    return ColoringCore(graph, spec)


def table_ceiling(spec: ProblemSpec, width: int, graph: Graph) -> int | None:
    """Analytic bound on any table size; ``None`` where only the regime is known."""
    k1 = width + 1
    if spec.kind == "is":
        return 2**k1 * (graph.n + 1)
    if spec.kind == "ds":
        return 3**k1 * (graph.n + 1)
    if spec.kind == "coloring":
        return spec.d**k1
    if spec.kind == "cut":
        return 2**k1 * (graph.m + 1) * 2 ** (k1 * (k1 - 1) // 2)
    return None
