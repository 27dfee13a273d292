"""Tree decompositions: parsing, the min-fill heuristic, and nice normalisation.

A *raw* decomposition is any tree of bags (PACE ``.td`` style).  A *nice*
edge-introducing decomposition restricts node types to Leaf, IntroVertex,
ForgetVertex, IntroEdge and Join, has empty leaf and root bags, and introduces
every edge at exactly one IntroEdge node.

Nice nodes are numbered ``0..N-1`` in post-order (children before parents,
children in child order), so the root is always node ``N-1`` and a plain
ascending loop is a valid bottom-up schedule.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

from .graphs import Graph


class DecompositionFormatError(ValueError):
    pass


class InvalidDecomposition(ValueError):
    pass


# -- raw decompositions ------------------------------------------------------


@dataclass(frozen=True)
class RawDecomposition:
    bags: dict[int, frozenset[int]]
    tree_edges: tuple[tuple[int, int], ...]

    @property
    def width(self) -> int:
        if not self.bags:
            return -1
        return max(len(b) for b in self.bags.values()) - 1

    def neighbours(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {t: [] for t in self.bags}
        for a, b in self.tree_edges:
            adj[a].append(b)
            adj[b].append(a)
        for t in adj:
            adj[t].sort()
        return adj


def _tree_problems(nodes: Iterable[int], edges: Iterable[tuple[int, int]]) -> list[str]:
    nodes = list(nodes)
    edges = list(edges)
    if not nodes:
        return []
    problems = []
    node_set = set(nodes)
    adj: dict[int, list[int]] = {t: [] for t in nodes}
    for a, b in edges:
        if a not in node_set or b not in node_set:
            problems.append(f"tree edge ({a},{b}) references an unknown bag")
            continue
        adj[a].append(b)
        adj[b].append(a)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        t = stack.pop()
        for s in adj[t]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    if len(seen) != len(nodes):
        problems.append("the decomposition tree is disconnected")
    elif len(edges) != len(nodes) - 1:
        problems.append("the decomposition tree has a cycle")
    return problems


def _connected_occurrences(
    adj: dict[int, list[int]], holders: set[int]
) -> bool:
    start = next(iter(holders))
    seen = {start}
    stack = [start]
    while stack:
        t = stack.pop()
        for s in adj[t]:
            if s in holders and s not in seen:
                seen.add(s)
                stack.append(s)
    return len(seen) == len(holders)


def validate_raw(g: Graph, raw: RawDecomposition) -> list[str]:
    """Violated tree-decomposition conditions; empty iff ``raw`` is valid."""
    problems = _tree_problems(sorted(raw.bags), raw.tree_edges)
    if not raw.bags and g.n:
        problems.append("no bags for a non-empty graph")
        return problems
    verts = set(g.vertices)
    for t, bag in sorted(raw.bags.items()):
        for v in sorted(bag - verts):
            problems.append(f"bag {t} references unknown vertex {v}")
    occurs: dict[int, set[int]] = defaultdict(set)
    for t, bag in raw.bags.items():
        for v in bag:
            occurs[v].add(t)
    for v in g.vertices:
        if not occurs[v]:
            problems.append(f"condition 1: vertex {v} is in no bag")
    for e, u, v in g.edge_list:
        if not occurs[u] & occurs[v]:
            problems.append(f"condition 2: edge {e} ({u},{v}) is in no bag")
    if problems:
        return problems
    adj = raw.neighbours()
    for v in g.vertices:
        if not _connected_occurrences(adj, occurs[v]):
            problems.append(f"condition 3 (connectivity): bags holding vertex {v} are disconnected")
    return problems


def parse_td(text: str, g: Graph) -> RawDecomposition:
    header = None
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    verts = set(g.vertices)
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        try:
            if tok[0] == "s":
                if len(tok) != 5 or tok[1] != "td":
                    raise DecompositionFormatError(f"line {lineno}: malformed header")
                header = tuple(int(x) for x in tok[2:])
            elif tok[0] == "b":
                if header is None:
                    raise DecompositionFormatError(f"line {lineno}: bag before header")
                bid = int(tok[1])
                if bid in bags:
                    raise DecompositionFormatError(f"line {lineno}: duplicate bag id {bid}")
                bag = frozenset(int(x) for x in tok[2:])
                unknown = sorted(bag - verts)
                if unknown:
                    raise DecompositionFormatError(
                        f"line {lineno}: bag {bid} names unknown vertex {unknown[0]}"
                    )
                bags[bid] = bag
            else:
                if len(tok) != 2:
                    raise DecompositionFormatError(f"line {lineno}: malformed line {line!r}")
                edges.append((int(tok[0]), int(tok[1])))
        except ValueError as exc:
            if isinstance(exc, DecompositionFormatError):
                raise
            raise DecompositionFormatError(f"line {lineno}: malformed line {line!r}") from None
    if header is None:
        raise DecompositionFormatError("missing 's td' header")
    nbags, _, nverts = header
    if nbags != len(bags):
        raise DecompositionFormatError(f"header announces {nbags} bags, found {len(bags)}")
    if nverts != g.n:
        raise DecompositionFormatError(f"header announces {nverts} vertices, graph has {g.n}")
    tree = _tree_problems(sorted(bags), edges)
    if tree:
        raise DecompositionFormatError("; ".join(tree))
    return RawDecomposition(bags, tuple(edges))


def write_td(raw: RawDecomposition, g: Graph) -> str:
    lines = [f"s td {len(raw.bags)} {raw.width + 1} {g.n}"]
    for t in sorted(raw.bags):
        lines.append(" ".join(["b", str(t)] + [str(v) for v in sorted(raw.bags[t])]))
    for a, b in raw.tree_edges:
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"


def min_fill_order(g: Graph) -> list[int]:
    adj = {v: set(ns) for v, ns in g.adjacency.items()}
    order = []
    while adj:
        def fill(v):
            ns = sorted(adj[v])
            return sum(
                1 for i, a in enumerate(ns) for b in ns[i + 1:] if b not in adj[a]
            )
        v = min(adj, key=lambda x: (fill(x), x))
        order.append(v)
        _eliminate(adj, v)
    return order


def _eliminate(adj: dict[int, set[int]], v: int) -> set[int]:
    ns = adj.pop(v)
    for a in ns:
        adj[a].discard(v)
        adj[a] |= ns - {a}
    return ns


def decomposition_from_order(g: Graph, order: list[int]) -> RawDecomposition:
    """The elimination-tree decomposition of ``order``; bag ``i`` eliminates ``order[i-1]``."""
    adj = {v: set(ns) for v, ns in g.adjacency.items()}
    pos = {v: i for i, v in enumerate(order, start=1)}
    bags: dict[int, frozenset[int]] = {}
    edges: list[tuple[int, int]] = []
    for i, v in enumerate(order, start=1):
        ns = _eliminate(adj, v)
        bags[i] = frozenset(ns | {v})
        if ns:
            edges.append((i, min(pos[w] for w in ns)))
        elif i < len(order):
            edges.append((i, i + 1))
    return RawDecomposition(bags, tuple(edges))


def build_heuristic_td(g: Graph) -> RawDecomposition:
    if g.n == 0:
        return RawDecomposition({}, ())
    return decomposition_from_order(g, min_fill_order(g))


# -- nice decompositions -----------------------------------------------------

LEAF, INTRO, FORGET, EDGE, JOIN = "leaf", "intro", "forget", "edge", "join"
_KIND_NAMES = {
    LEAF: "Leaf",
    INTRO: "IntroVertex",
    FORGET: "ForgetVertex",
    EDGE: "IntroEdge",
    JOIN: "Join",
}


@dataclass(frozen=True)
class NodeKind:
    op: str
    arg: int | None = None

    def __str__(self) -> str:
        name = _KIND_NAMES[self.op]
        return name if self.arg is None else f"{name}({self.arg})"


@dataclass(frozen=True)
class AddressedTree:
    """Rooted tree on nodes ``0..N-1``; ``children[u]`` lists the children in order."""

    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.parent)

    @property
    def root(self) -> int:
        return self.size - 1

    @property
    def nodes(self) -> range:
        return range(self.size)

    def problems(self) -> list[str]:
        out = []
        roots = [u for u, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            out.append(f"expected one root, found {len(roots)}")
        for u, kids in enumerate(self.children):
            if len(set(kids)) != len(kids):
                out.append(f"node {u} lists a child twice")
            for c in kids:
                if not 0 <= c < self.size or self.parent[c] != u:
                    out.append(f"node {u} lists {c} as child but the parent link disagrees")
        for u, p in enumerate(self.parent):
            if p >= 0 and u not in self.children[p]:
                out.append(f"node {u} has parent {p} which does not list it")
        # every node must reach the root
        for u in self.nodes:
            seen = set()
            while u >= 0 and u not in seen:
                seen.add(u)
                u = self.parent[u]
            if u >= 0:
                out.append("parent links contain a cycle")
                break
        return out


@dataclass(frozen=True)
class NiceDecomposition:
    tree: AddressedTree
    bags: tuple[frozenset[int], ...]
    kinds: tuple[NodeKind, ...]
    xi: dict[int, int] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.tree.size

    @property
    def root(self) -> int:
        return self.tree.root

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def children(self, u: int) -> tuple[int, ...]:
        return self.tree.children[u]

    def parent(self, u: int) -> int:
        return self.tree.parent[u]

    @cached_property
    def top_down(self) -> tuple[int, ...]:
        """Nodes ordered so that every parent precedes its children."""
        return tuple(reversed(self.tree.nodes))


@dataclass(frozen=True)
class Violation:
    condition: str
    message: str

    def __str__(self) -> str:
        return f"[{self.condition}] {self.message}"


class _Builder:
    def __init__(self, g: Graph):
        self.g = g
        self.kinds: list[NodeKind] = []
        self.bags: list[frozenset[int]] = []
        self.kids: list[list[int]] = []
        self.introduced: set[int] = set()

    def node(self, kind: NodeKind, bag: frozenset[int], kids: list[int]) -> int:
        self.kinds.append(kind)
        self.bags.append(bag)
        self.kids.append(kids)
        return len(self.kinds) - 1

    def intro(self, cur: int, v: int) -> int:
        bag = self.bags[cur] | {v}
        cur = self.node(NodeKind(INTRO, v), bag, [cur])
        pending = sorted(
            self.g.edge_id(v, w)
            for w in self.g.adjacency[v]
            if w in bag and self.g.edge_id(v, w) not in self.introduced
        )
        for e in pending:
            self.introduced.add(e)
            cur = self.node(NodeKind(EDGE, e), bag, [cur])
        return cur

    def forget(self, cur: int, v: int) -> int:
        return self.node(NodeKind(FORGET, v), self.bags[cur] - {v}, [cur])

    def adapt(self, cur: int, target: frozenset[int]) -> int:
        for v in sorted(self.bags[cur] - target):
            cur = self.forget(cur, v)
        for v in sorted(target - self.bags[cur]):
            cur = self.intro(cur, v)
        return cur

    def finish(self, top: int) -> NiceDecomposition:
        # renumber in post-order
        order: list[int] = []
        stack = [(top, False)]
        while stack:
            u, done = stack.pop()
            if done:
                order.append(u)
                continue
            stack.append((u, True))
            for c in reversed(self.kids[u]):
                stack.append((c, False))
        new = {old: i for i, old in enumerate(order)}
        parent = [-1] * len(order)
        children = []
        for old in order:
            kids = tuple(new[c] for c in self.kids[old])
            for c in kids:
                parent[c] = new[old]
            children.append(kids)
        kinds = tuple(self.kinds[old] for old in order)
        xi = {k.arg: i for i, k in enumerate(kinds) if k.op == EDGE}
        return NiceDecomposition(
            AddressedTree(tuple(parent), tuple(children)),
            tuple(self.bags[old] for old in order),
            kinds,
            dict(sorted(xi.items())),
        )


def make_nice(g: Graph, raw: RawDecomposition) -> NiceDecomposition:
    problems = validate_raw(g, raw)
    if problems:
        raise InvalidDecomposition("; ".join(problems))
    b = _Builder(g)
    if g.n == 0:
        return b.finish(b.node(NodeKind(LEAF), frozenset(), []))

    adj = raw.neighbours()
    root = max(raw.bags)

    def build(t: int, parent: int | None) -> int:
        kids = [c for c in adj[t] if c != parent]
        target = raw.bags[t]
        if not kids:
            return b.adapt(b.node(NodeKind(LEAF), frozenset(), []), target)
        cur = None
        for c in kids:
            sub = b.adapt(build(c, t), target)
            cur = sub if cur is None else b.node(NodeKind(JOIN), target, [cur, sub])
        return cur

    top = b.adapt(build(root, None), frozenset())
    nd = b.finish(top)
    return nd


def nice_decomposition(g: Graph, raw: RawDecomposition | None = None) -> NiceDecomposition:
    """Normalise ``raw`` (default: the min-fill decomposition of ``g``)."""
    return make_nice(g, build_heuristic_td(g) if raw is None else raw)


def validate_nice(g: Graph, nd: NiceDecomposition) -> list[Violation]:
    out: list[Violation] = []
    n_nodes = nd.size
    if len(nd.bags) != n_nodes or len(nd.kinds) != n_nodes:
        return [Violation("shape", "bags/kinds do not cover the tree nodes")]
    for msg in nd.tree.problems():
        out.append(Violation("tree", msg))
    if out:
        return out
    verts = set(g.vertices)
    for u in nd.tree.nodes:
        kind, bag, kids = nd.kinds[u], nd.bags[u], nd.children(u)
        extra = bag - verts
        if extra:
            out.append(Violation("bag", f"node {u} holds unknown vertices {sorted(extra)}"))
        if kind.op == LEAF:
            if kids:
                out.append(Violation("leaf", f"Leaf node {u} has children"))
            if bag:
                out.append(Violation("empty-leaf", f"leaf node {u} has non-empty bag"))
        elif kind.op == JOIN:
            if len(kids) != 2:
                out.append(Violation("join", f"Join node {u} has {len(kids)} children"))
            elif not nd.bags[kids[0]] == nd.bags[kids[1]] == bag:
                out.append(Violation("join", f"Join node {u} children bags differ from its bag"))
        else:
            if len(kids) != 1:
                out.append(Violation(kind.op, f"{kind} node {u} has {len(kids)} children"))
                continue
            child_bag = nd.bags[kids[0]]
            if kind.op == INTRO:
                if kind.arg in child_bag or bag != child_bag | {kind.arg}:
                    out.append(Violation("intro-vertex", f"node {u} does not introduce exactly vertex {kind.arg}"))
            elif kind.op == FORGET:
                if kind.arg not in child_bag or bag != child_bag - {kind.arg}:
                    out.append(Violation("forget-vertex", f"node {u} does not forget exactly vertex {kind.arg}"))
            elif kind.op == EDGE:
                if bag != child_bag:
                    out.append(Violation("intro-edge", f"IntroEdge node {u} changes the bag"))
                if nd.xi.get(kind.arg) != u:
                    out.append(Violation("xi", f"IntroEdge node {u} introduces edge {kind.arg} but xi disagrees"))
    if nd.bags[nd.root]:
        out.append(Violation("empty-root", f"root node {nd.root} has non-empty bag"))
    # xi: injective, total, pointing at matching IntroEdge nodes
    edges = set(g.edges)
    targets: dict[int, int] = {}
    for e, u in sorted(nd.xi.items()):
        if e not in edges:
            out.append(Violation("xi", f"xi maps unknown edge {e}"))
            continue
        if not 0 <= u < n_nodes:
            out.append(Violation("xi", f"xi maps edge {e} outside the tree"))
            continue
        if u in targets:
            out.append(Violation("xi-injective", f"edges {targets[u]} and {e} share node {u}"))
        targets[u] = e
        if nd.kinds[u] != NodeKind(EDGE, e):
            out.append(Violation("xi", f"xi maps edge {e} to node {u} which is {nd.kinds[u]}"))
        a, b = g.endpoints(e)
        if a not in nd.bags[u] or b not in nd.bags[u]:
            out.append(Violation("condition-2", f"edge {e} endpoints not inside bag of node {u}"))
    for e in sorted(edges - set(nd.xi)):
        out.append(Violation("condition-2", f"edge {e} is never introduced"))
    intro_edge_nodes = [u for u in nd.tree.nodes if nd.kinds[u].op == EDGE]
    counts: dict[int, int] = defaultdict(int)
    for u in intro_edge_nodes:
        counts[nd.kinds[u].arg] += 1
    for e, c in sorted(counts.items()):
        if c > 1:
            out.append(Violation("edge-introduced-once", f"edge {e} is introduced {c} times"))
    occurs: dict[int, set[int]] = defaultdict(set)
    for u, bag in enumerate(nd.bags):
        for v in bag:
            occurs[v].add(u)
    adj = {u: list(nd.children(u)) + ([nd.parent(u)] if nd.parent(u) >= 0 else []) for u in nd.tree.nodes}
    for v in g.vertices:
        if not occurs[v]:
            out.append(Violation("condition-1", f"vertex {v} is in no bag"))
        elif not _connected_occurrences(adj, occurs[v]):
            out.append(Violation("condition-3", f"nodes holding vertex {v} are not connected"))
    return out


@dataclass(frozen=True)
class DesignatedIndex:
    nu: dict[int, int]
    eps: dict[int, int]

    @cached_property
    def vertex_at(self) -> dict[int, int]:
        return {u: v for v, u in self.nu.items()}

    @cached_property
    def edge_at(self) -> dict[int, int]:
        return {u: e for e, u in self.eps.items()}


def designated_index(nd: NiceDecomposition, g: Graph | None = None) -> DesignatedIndex:
    nu: dict[int, int] = {}
    for u, kind in enumerate(nd.kinds):
        if kind.op == FORGET:
            if kind.arg in nu:
                raise InvalidDecomposition(f"vertex {kind.arg} is forgotten twice")
            nu[kind.arg] = nd.children(u)[0]
    if g is not None:
        missing = [v for v in g.vertices if v not in nu]
        if missing:
            raise InvalidDecomposition(f"vertex {missing[0]} is never forgotten")
    return DesignatedIndex(dict(sorted(nu.items())), dict(nd.xi))


# -- .ntd text format --------------------------------------------------------


def write_ntd(nd: NiceDecomposition, g: Graph) -> str:
    lines = [f"s ntd {nd.size} {nd.width + 1} {g.n} {g.m}"]
    for u in nd.tree.nodes:
        kind = nd.kinds[u]
        arg = "-" if kind.arg is None else str(kind.arg)
        kids = " ".join(str(c) for c in nd.children(u))
        bag = " ".join(str(v) for v in sorted(nd.bags[u]))
        lines.append(f"n {u} {kind.op} {arg} [{kids}] {bag}".rstrip())
    return "\n".join(lines) + "\n"


def parse_ntd(text: str) -> NiceDecomposition:
    rows = []
    size = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("c"):
            continue
        try:
            if line.startswith("s "):
                size = int(line.split()[2])
                continue
            head, rest = line.split("[", 1)
            kids_txt, bag_txt = rest.split("]", 1)
            _, uid, op, arg = head.split()
            if op not in _KIND_NAMES:
                raise DecompositionFormatError(f"line {lineno}: unknown node kind {op!r}")
            rows.append((
                int(uid),
                NodeKind(op, None if arg == "-" else int(arg)),
                tuple(int(c) for c in kids_txt.split()),
                frozenset(int(v) for v in bag_txt.split()),
            ))
        except ValueError as exc:
            if isinstance(exc, DecompositionFormatError):
                raise
            raise DecompositionFormatError(f"line {lineno}: malformed line {line!r}") from None
    if size is None or len(rows) != size or [r[0] for r in rows] != list(range(size)):
        raise DecompositionFormatError("nodes must be listed as 0..N-1 after an 's ntd' header")
    parent = [-1] * size
    for uid, _, kids, _ in rows:
        for c in kids:
            parent[c] = uid
    kinds = tuple(r[1] for r in rows)
    xi = {k.arg: i for i, k in enumerate(kinds) if k.op == EDGE}
    return NiceDecomposition(
        AddressedTree(tuple(parent), tuple(r[2] for r in rows)),
        tuple(r[3] for r in rows),
        kinds,
        dict(sorted(xi.items())),
    )
