"""Graphs, problem descriptions, solution tuples and the brute-force oracle.

Graphs are simple and immutable.  Vertices and edges carry natural-number
identifiers; the edge-list text format numbers them ``1..n`` and ``1..m``.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

DEFAULT_ORACLE_BUDGET = 2 ** 22
# the plain subset walk is used by "auto" only below this many candidates
SUBSET_WALK_LIMIT = 2 ** 14
BUDGET_ENV_VAR = "TDXF_ORACLE_BUDGET"


class GraphFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OracleBudgetExceeded(RuntimeError):
    """The instance is too large for exhaustive enumeration."""


@dataclass(frozen=True)
class Graph:
    vertices: tuple[int, ...]
    # (edge id, u, v) with u < v, sorted by edge id
    edge_list: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise ValueError("duplicate vertex identifier")
        seen_ids = set()
        seen_pairs = set()
        for e, u, v in self.edge_list:
            if e in seen_ids:
                raise ValueError(f"duplicate edge identifier {e}")
            if u == v:
                raise ValueError(f"self-loop on vertex {u}")
            if u not in vs or v not in vs:
                raise ValueError(f"edge {e} has an undeclared endpoint")
            pair = (min(u, v), max(u, v))
            if pair in seen_pairs:
                raise ValueError(f"parallel edge {pair}")
            seen_ids.add(e)
            seen_pairs.add(pair)
        object.__setattr__(
            self,
            "edge_list",
            tuple(sorted((e, min(u, v), max(u, v)) for e, u, v in self.edge_list)),
        )
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "Graph":
        """Vertices ``1..n``; edges numbered ``1..m`` in the given order."""
        return cls(
            tuple(range(1, n + 1)),
            tuple((i, u, v) for i, (u, v) in enumerate(pairs, start=1)),
        )

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edge_list)

    @cached_property
    def edges(self) -> tuple[int, ...]:
        return tuple(e for e, _, _ in self.edge_list)

    @cached_property
    def _endpoints(self) -> dict[int, tuple[int, int]]:
        return {e: (u, v) for e, u, v in self.edge_list}

    def endpoints(self, e: int) -> tuple[int, int]:
        return self._endpoints[e]

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.vertices}
        for _, u, v in self.edge_list:
            adj[u].add(v)
            adj[v].add(u)
        return {v: frozenset(s) for v, s in adj.items()}

    @cached_property
    def edge_between(self) -> dict[tuple[int, int], int]:
        return {(u, v): e for e, u, v in self.edge_list}

    def edge_id(self, u: int, v: int) -> int:
        return self.edge_between[(min(u, v), max(u, v))]


PROBLEM_KINDS = ("is", "ds", "cut", "hc", "coloring")
_KIND_ALIASES = {
    "independentset": "is",
    "independent_set": "is",
    "dominatingset": "ds",
    "dominating_set": "ds",
    "hamiltoniancycle": "hc",
    "hamiltonian_cycle": "hc",
    "dcoloring": "coloring",
    "color": "coloring",
}


@dataclass(frozen=True)
class ProblemSpec:
    kind: str
    threshold: int = 0
    d: int = 1

    def __post_init__(self):
        kind = _KIND_ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in PROBLEM_KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.threshold < 0:
            raise ValueError("threshold must be a natural number")
        if kind == "coloring" and self.d < 1:
            raise ValueError("d-coloring needs d >= 1")

    @property
    def arity(self) -> tuple[int, int]:
        if self.kind in ("is", "ds"):
            return (1, 0)
        if self.kind in ("cut", "hc"):
            return (0, 1)
        return (self.d, 0)

    def __str__(self) -> str:
        if self.kind in ("is", "ds", "cut"):
            return f"{self.kind}(l={self.threshold})"
        if self.kind == "coloring":
            return f"coloring(d={self.d})"
        return self.kind


@dataclass(frozen=True)
class SolutionTuple:
    vertex_sets: tuple[frozenset[int], ...] = ()
    edge_sets: tuple[frozenset[int], ...] = ()

    @classmethod
    def of_vertices(cls, *sets: Iterable[int]) -> "SolutionTuple":
        return cls(tuple(frozenset(s) for s in sets), ())

    @classmethod
    def of_edges(cls, *sets: Iterable[int]) -> "SolutionTuple":
        return cls((), tuple(frozenset(s) for s in sets))

    @property
    def components(self) -> tuple[frozenset[int], ...]:
        return self.vertex_sets + self.edge_sets

    def size(self) -> int:
        """Total number of listed elements, over all components."""
        return sum(len(s) for s in self.components)

    def sort_key(self) -> tuple:
        return tuple(tuple(sorted(s)) for s in self.components)

    def __repr__(self) -> str:
        parts = [sorted(s) for s in self.components]
        return f"SolutionTuple({parts})"


# -- edge-list text format ---------------------------------------------------


def parse_graph(text: str) -> Graph:
    n = m = None
    pairs: list[tuple[int, int]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        if tok[0] == "p":
            if n is not None:
                raise GraphFormatError("second header line", lineno)
            if len(tok) != 3:
                raise GraphFormatError(f"malformed header {line!r}", lineno)
            try:
                n, m = int(tok[1]), int(tok[2])
            except ValueError:
                raise GraphFormatError(f"malformed header {line!r}", lineno) from None
            if n < 0 or m < 0:
                raise GraphFormatError("negative counts in header", lineno)
            continue
        if tok[0] != "e" or len(tok) != 3:
            raise GraphFormatError(f"malformed line {line!r}", lineno)
        if n is None:
            raise GraphFormatError("edge line before header", lineno)
        try:
            u, v = int(tok[1]), int(tok[2])
        except ValueError:
            raise GraphFormatError(f"malformed line {line!r}", lineno) from None
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}", lineno)
        for x in (u, v):
            if not 1 <= x <= n:
                raise GraphFormatError(f"endpoint {x} out of range 1..{n}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(
                f"duplicate edge {key} (first at line {seen[key]})", lineno
            )
        seen[key] = lineno
        pairs.append((u, v))
    if n is None:
        raise GraphFormatError("missing 'p <n> <m>' header")
    if len(pairs) != m:
        raise GraphFormatError(f"header announces {m} edges, found {len(pairs)}")
    return Graph.from_pairs(n, pairs)


def serialize_graph(g: Graph) -> str:
    if g.vertices != tuple(range(1, g.n + 1)) or g.edges != tuple(range(1, g.m + 1)):
        raise ValueError("edge-list format needs vertices 1..n and edges 1..m")
    lines = [f"p {g.n} {g.m}"]
    lines += [f"e {u} {v}" for _, u, v in g.edge_list]
    return "\n".join(lines) + "\n"


# -- problem predicates ------------------------------------------------------


def _is_independent(g: Graph, xs: frozenset[int]) -> bool:
    return not any(u in xs and v in xs for _, u, v in g.edge_list)


def _is_cut_set(g: Graph, ys: frozenset[int]) -> bool:
    """Whether some bipartition has exactly ``ys`` as its crossing edges."""
    side: dict[int, int] = {}
    for start in g.vertices:
        if start in side:
            continue
        side[start] = 0
        stack = [start]
        while stack:
            a = stack.pop()
            for b in g.adjacency[a]:
                want = side[a] ^ (g.edge_id(a, b) in ys)
                if b not in side:
                    side[b] = want
                    stack.append(b)
                elif side[b] != want:
                    return False
    return True


def _is_hamiltonian_cycle(g: Graph, ys: frozenset[int]) -> bool:
    if g.n < 3 or len(ys) != g.n:
        return False
    deg = {v: 0 for v in g.vertices}
    adj: dict[int, list[int]] = {v: [] for v in g.vertices}
    for e in ys:
        u, v = g.endpoints(e)
        deg[u] += 1
        deg[v] += 1
        adj[u].append(v)
        adj[v].append(u)
    if any(d != 2 for d in deg.values()):
        return False
    start = g.vertices[0]
    seen = {start}
    stack = [start]
    while stack:
        a = stack.pop()
        for b in adj[a]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return len(seen) == g.n


def is_solution(g: Graph, spec: ProblemSpec, x: SolutionTuple) -> bool:
    d1, d2 = spec.arity
    if len(x.vertex_sets) != d1 or len(x.edge_sets) != d2:
        return False
    vs, es = set(g.vertices), set(g.edges)
    if any(not s <= vs for s in x.vertex_sets) or any(not s <= es for s in x.edge_sets):
        return False
    kind, ell = spec.kind, spec.threshold
    if kind == "is":
        xs = x.vertex_sets[0]
        return len(xs) >= ell and _is_independent(g, xs)
    if kind == "ds":
        xs = x.vertex_sets[0]
        if len(xs) > ell:
            return False
        return all(v in xs or g.adjacency[v] & xs for v in g.vertices)
    if kind == "cut":
        ys = x.edge_sets[0]
        return len(ys) >= ell and _is_cut_set(g, ys)
    if kind == "hc":
        return _is_hamiltonian_cycle(g, x.edge_sets[0])
    # ordered partition into d independent sets, parts may be empty
    parts = x.vertex_sets
    if sum(len(p) for p in parts) != g.n or frozenset().union(*parts) != vs:
        return False
    return all(_is_independent(g, p) for p in parts)


# -- brute-force oracle ------------------------------------------------------


def oracle_budget() -> int:
    raw = os.environ.get(BUDGET_ENV_VAR)
    return int(raw) if raw else DEFAULT_ORACLE_BUDGET


def _powerset(items: tuple[int, ...]) -> Iterator[frozenset[int]]:
    for r in range(len(items) + 1):
        for combo in itertools.combinations(items, r):
            yield frozenset(combo)


def subset_candidate_count(g: Graph, spec: ProblemSpec) -> int:
    d1, d2 = spec.arity
    return 2 ** (g.n * d1 + g.m * d2)


def structured_candidate_count(g: Graph, spec: ProblemSpec) -> int:
    if spec.kind in ("is", "ds"):
        return 2 ** g.n
    if spec.kind == "cut":
        return 2 ** g.n
    if spec.kind == "coloring":
        return spec.d ** g.n
    # Hamiltonian cycles through a fixed start vertex: at most (n-1)!/2 orders
    return max(1, math.factorial(max(g.n - 1, 0)) // 2)


def _subset_candidates(g: Graph, spec: ProblemSpec) -> Iterator[SolutionTuple]:
    d1, d2 = spec.arity
    factors = []
    if d1:
        factors += [list(_powerset(g.vertices))] * d1
    if d2:
        factors += [list(_powerset(g.edges))] * d2
    for combo in itertools.product(*factors):
        yield SolutionTuple(tuple(combo[:d1]), tuple(combo[d1:]))


def _hamiltonian_cycles(g: Graph) -> Iterator[frozenset[int]]:
    if g.n < 3:
        return
    start = g.vertices[0]
    path = [start]
    on_path = {start}

    def extend():
        a = path[-1]
        if len(path) == g.n:
            if start in g.adjacency[a] and path[1] < path[-1]:
                yield frozenset(
                    g.edge_id(path[i], path[(i + 1) % g.n]) for i in range(g.n)
                )
            return
        for b in sorted(g.adjacency[a]):
            if b not in on_path:
                path.append(b)
                on_path.add(b)
                yield from extend()
                path.pop()
                on_path.discard(b)

    yield from extend()


def _structured_candidates(g: Graph, spec: ProblemSpec) -> Iterator[SolutionTuple]:
    kind = spec.kind
    if kind in ("is", "ds"):
        for xs in _powerset(g.vertices):
            yield SolutionTuple((xs,), ())
    elif kind == "cut":
        for side in _powerset(g.vertices):
            ys = frozenset(e for e, u, v in g.edge_list if (u in side) != (v in side))
            yield SolutionTuple((), (ys,))
    elif kind == "hc":
        for ys in _hamiltonian_cycles(g):
            yield SolutionTuple((), (ys,))
    else:
        for colors in itertools.product(range(spec.d), repeat=g.n):
            parts = [set() for _ in range(spec.d)]
            for v, c in zip(g.vertices, colors):
                parts[c].add(v)
            yield SolutionTuple(tuple(frozenset(p) for p in parts), ())


def brute_force_solutions(
    g: Graph, spec: ProblemSpec, budget: int | None = None, method: str = "auto"
) -> frozenset[SolutionTuple]:
    """Exhaustively compute the solution set of ``spec`` on ``g``.

    ``method="subsets"`` walks the whole product of subset lattices and tests
    the predicate on each candidate.  ``method="structured"`` generates
    candidates straight from the problem definition (vertex subsets,
    bipartitions, cyclic vertex orders, colour maps) and re-tests each one.
    ``"auto"`` prefers the subset walk while it stays under
    ``SUBSET_WALK_LIMIT`` candidates and uses the structured walk beyond.
    """
    budget = oracle_budget() if budget is None else budget
    if method == "auto":
        if subset_candidate_count(g, spec) <= min(budget, SUBSET_WALK_LIMIT):
            method = "subsets"
        else:
            method = "structured"
    if method == "subsets":
        count, gen = subset_candidate_count(g, spec), _subset_candidates
    elif method == "structured":
        count, gen = structured_candidate_count(g, spec), _structured_candidates
    else:
        raise ValueError(f"unknown oracle method {method!r}")
    if count > budget:
        raise OracleBudgetExceeded(
            f"{spec} on n={g.n}, m={g.m}: {count} candidates exceed budget {budget}"
        )
    return frozenset(x for x in gen(g, spec) if is_solution(g, spec, x))


def solution_sizes(sols: Iterable[SolutionTuple]) -> list[int]:
    return sorted(x.size() for x in sols)


# -- small graph families ----------------------------------------------------


def path_graph(n: int) -> Graph:
    return Graph.from_pairs(n, [(i, i + 1) for i in range(1, n)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycles need at least 3 vertices")
    return Graph.from_pairs(n, [(i, i + 1) for i in range(1, n)] + [(1, n)])


def complete_graph(n: int) -> Graph:
    return Graph.from_pairs(n, list(itertools.combinations(range(1, n + 1), 2)))


def empty_graph() -> Graph:
    return Graph((), ())
