"""The reference graph corpus and the problem instances run on each graph."""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

import networkx as nx

from .decomposition import build_heuristic_td
from .graphs import Graph, ProblemSpec, complete_graph, cycle_graph, path_graph

RANDOM_SEED = 20240917
RANDOM_COUNT = 25
MAX_RANDOM_WIDTH = 3


@dataclass(frozen=True)
class NamedGraph:
    name: str
    graph: Graph


def _from_nx(h) -> Graph:
    label = {v: i for i, v in enumerate(sorted(h.nodes()), start=1)}
    pairs = sorted(tuple(sorted((label[a], label[b]))) for a, b in h.edges())
    return Graph.from_pairs(len(label), pairs)


def atlas_graphs(max_n: int = 6) -> list[NamedGraph]:
    out = []
    for i, h in enumerate(nx.graph_atlas_g()):
        if 1 <= h.number_of_nodes() <= max_n and nx.is_connected(h):
            out.append(NamedGraph(f"atlas-{i}", _from_nx(h)))
    return out


def family_graphs(max_n: int = 8) -> list[NamedGraph]:
    out = []
    for n in range(1, max_n + 1):
        out.append(NamedGraph(f"path-{n}", path_graph(n)))
        if n >= 3:
            out.append(NamedGraph(f"cycle-{n}", cycle_graph(n)))
        out.append(NamedGraph(f"complete-{n}", complete_graph(n)))
    return out


def random_graphs(count: int = RANDOM_COUNT, seed: int = RANDOM_SEED) -> list[NamedGraph]:
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(5, 10)
        m = rng.randint(n - 1, min(2 * n, n * (n - 1) // 2))
        h = nx.gnm_random_graph(n, m, seed=rng.randrange(2**31))
        if not nx.is_connected(h):
            continue
        g = _from_nx(h)
        if build_heuristic_td(g).width <= MAX_RANDOM_WIDTH:
            out.append(NamedGraph(f"random-{len(out)}", g))
    return out


@lru_cache(maxsize=None)
def corpus() -> tuple[NamedGraph, ...]:
    seen = set()
    out = []
    for ng in atlas_graphs() + family_graphs() + random_graphs():
        key = (ng.graph.vertices, ng.graph.edge_list)
        if key in seen:
            continue
        seen.add(key)
        out.append(ng)
    return tuple(out)


def problem_specs(g: Graph) -> list[ProblemSpec]:
    specs = [ProblemSpec("is", l) for l in (0, 1, 2)]
    specs += [ProblemSpec("ds", l) for l in range(1, g.n + 1)]
    specs += [ProblemSpec("cut", l) for l in (1, 2)]
    specs.append(ProblemSpec("hc"))
    specs += [ProblemSpec("coloring", d=d) for d in (2, 3)]
    return specs


def instances() -> list[tuple[NamedGraph, ProblemSpec]]:
    return [(ng, spec) for ng in corpus() for spec in problem_specs(ng.graph)]
