"""DP-core interface, the bottom-up table process and witness-tree backtracking."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

from ..decomposition import EDGE, FORGET, INTRO, JOIN, LEAF, DesignatedIndex, NiceDecomposition, designated_index
from ..graphs import Graph, OracleBudgetExceeded, ProblemSpec, SolutionTuple, brute_force_solutions


class Overflow(RuntimeError):
    """An enumeration exceeded its configured limit."""

    def __init__(self, limit: int, what: str = "items"):
        super().__init__(f"more than {limit} {what}")
        self.limit = limit


# -- canonical byte codec ----------------------------------------------------
# set:   1-byte length, then sorted 2-byte big-endian elements
# pairs: 1-byte length, then sorted (a,b) pairs with a<b, 4 bytes each
# int:   4-byte signed big-endian
# bit:   one byte 0/1


class Codec:
    def __init__(self, *fields: str):
        self.fields = fields
        self.decode = lru_cache(maxsize=None)(self._decode)

    def encode(self, *values) -> bytes:
        out = bytearray()
        for kind, val in zip(self.fields, values, strict=True):
            if kind == "set":
                items = sorted(val)
                out.append(len(items))
                for x in items:
                    out += x.to_bytes(2, "big")
            elif kind == "pairs":
                items = sorted((min(p), max(p)) for p in val)
                out.append(len(items))
                for a, b in items:
                    out += a.to_bytes(2, "big") + b.to_bytes(2, "big")
            elif kind == "int":
                out += struct.pack(">i", val)
            elif kind == "bit":
                out.append(1 if val else 0)
            else:
                raise ValueError(kind)
        return bytes(out)

    def _decode(self, w: bytes) -> tuple:
        vals = []
        i = 0
        for kind in self.fields:
            if kind == "set":
                k = w[i]
                vals.append(frozenset(int.from_bytes(w[i + 1 + 2 * j:i + 3 + 2 * j], "big") for j in range(k)))
                i += 1 + 2 * k
            elif kind == "pairs":
                k = w[i]
                ps = []
                for j in range(k):
                    o = i + 1 + 4 * j
                    ps.append((int.from_bytes(w[o:o + 2], "big"), int.from_bytes(w[o + 2:o + 4], "big")))
                vals.append(frozenset(ps))
                i += 1 + 4 * k
            elif kind == "int":
                vals.append(struct.unpack(">i", w[i:i + 4])[0])
                i += 4
            else:
                vals.append(w[i])
                i += 1
        if i != len(w):
            raise ValueError(f"trailing bytes in witness {w.hex()}")
        return tuple(vals)


# -- the interface ------------------------------------------------------------


class DPCore:
    """Six transition components over canonical byte witnesses plus membership.

    Subclasses implement the per-witness components.  ``vertex_components`` and
    ``edge_components`` give the solution-tuple arity.
    """

    name = "core"
    vertex_components = 0
    edge_components = 0
    paper_literal = False

    def __init__(self, graph: Graph, spec: ProblemSpec):
        self.graph = graph
        self.spec = spec

    # components on single witnesses
    def leaf(self) -> set[bytes]:
        raise NotImplementedError

    def intro_vertex(self, v: int, w: bytes) -> set[bytes]:
        raise NotImplementedError

    def intro_edge(self, v: int, v2: int, w: bytes) -> set[bytes]:
        raise NotImplementedError

    def forget_vertex(self, v: int, w: bytes) -> set[bytes]:
        raise NotImplementedError

    def join(self, w1: bytes, w2: bytes) -> set[bytes]:
        raise NotImplementedError

    def final(self, w: bytes) -> bool:
        raise NotImplementedError

    def membership(self, component: int, element: int, w: bytes) -> int:
        """Bit for vertex component ``component`` (< d1) or edge component (>= d1)."""
        raise NotImplementedError

    def join_key(self, w: bytes):
        """Witnesses with different keys never join; ``None`` disables bucketing."""
        return None

    def describe(self, w: bytes) -> str:
        return w.hex()

    # alphabet
    @property
    def arity(self) -> tuple[int, int]:
        return (self.vertex_components, self.edge_components)

    @property
    def alphabet_size(self) -> int:
        return 2 ** (self.vertex_components + self.edge_components)

    def encode_symbol(self, bits: Sequence[int]) -> int:
        return sum(b << i for i, b in enumerate(bits))

    def decode_symbol(self, sym: int) -> tuple[int, ...]:
        k = self.vertex_components + self.edge_components
        return tuple((sym >> i) & 1 for i in range(k))

    # set-valued extension
    def apply_intro_vertex(self, v: int, ws: Iterable[bytes]) -> set[bytes]:
        return set().union(*(self.intro_vertex(v, w) for w in ws))

    def apply_intro_edge(self, v: int, v2: int, ws: Iterable[bytes]) -> set[bytes]:
        return set().union(*(self.intro_edge(v, v2, w) for w in ws))

    def apply_forget_vertex(self, v: int, ws: Iterable[bytes]) -> set[bytes]:
        return set().union(*(self.forget_vertex(v, w) for w in ws))

    def apply_join(self, ws1: Iterable[bytes], ws2: Iterable[bytes]) -> set[bytes]:
        ws2 = list(ws2)
        return set().union(*(self.join(a, b) for a in ws1 for b in ws2))


# -- table process --------------------------------------------------------------


@dataclass
class Tables:
    """Per-node tables plus the recorded (child witnesses -> witness) steps.

    ``gamma[u]`` is sorted by canonical bytes.  ``steps[u]`` lists every pair
    ``(antecedents, consequent)`` with antecedents in child order.
    """

    gamma: list[tuple[bytes, ...]]
    steps: list[list[tuple[tuple[bytes, ...], bytes]]]
    root: int
    finals: tuple[bytes, ...]

    @property
    def max_table_size(self) -> int:
        return max(len(t) for t in self.gamma)

    @property
    def accepted(self) -> bool:
        return bool(self.finals)

    @property
    def sizes(self) -> list[int]:
        return [len(t) for t in self.gamma]


def run_tables(core: DPCore, nd: NiceDecomposition) -> Tables:
    g = core.graph
    gamma: list[tuple[bytes, ...]] = [()] * nd.size
    steps: list[list] = [None] * nd.size
    for u in nd.tree.nodes:  # post-order: children first
        kind = nd.kinds[u]
        kids = nd.children(u)
        out: list[tuple[tuple[bytes, ...], bytes]] = []
        if kind.op == LEAF:
            out = [((), w) for w in core.leaf()]
        elif kind.op == JOIN:
            left, right = gamma[kids[0]], gamma[kids[1]]
            buckets: dict = {}
            for b in right:
                buckets.setdefault(core.join_key(b), []).append(b)
            for a in left:
                key = core.join_key(a)
                partners = right if key is None else buckets.get(key, ())
                for b in partners:
                    out += [((a, b), w) for w in core.join(a, b)]
        else:
            child = gamma[kids[0]]
            if kind.op == INTRO:
                fn = lambda w: core.intro_vertex(kind.arg, w)
            elif kind.op == FORGET:
                fn = lambda w: core.forget_vertex(kind.arg, w)
            elif kind.op == EDGE:
                a, b = g.endpoints(kind.arg)
                fn = lambda w: core.intro_edge(a, b, w)
            else:
                raise ValueError(kind)
            for w0 in child:
                out += [((w0,), w) for w in fn(w0)]
        out.sort()
        steps[u] = out
        gamma[u] = tuple(sorted({w for _, w in out}))
    root = nd.root
    finals = tuple(w for w in gamma[root] if core.final(w))
    return Tables(gamma, steps, root, finals)


# -- witness trees ------------------------------------------------------------------


def preimages(tables: Tables, u: int) -> dict[bytes, list[tuple[bytes, ...]]]:
    pre: dict[bytes, list] = {}
    for ants, w in tables.steps[u]:
        pre.setdefault(w, []).append(ants)
    return pre


def enumerate_witness_trees(
    core: DPCore, nd: NiceDecomposition, tables: Tables, limit: int | None = None
) -> Iterator[dict[int, bytes]]:
    """Every witness tree, root witness first in byte order; raises Overflow past ``limit``."""
    pre = [preimages(tables, u) for u in nd.tree.nodes]
    order = nd.top_down
    W: dict[int, bytes] = {}
    count = 0

    def go(i: int) -> Iterator[dict[int, bytes]]:
        nonlocal count
        if i == len(order):
            count += 1
            if limit is not None and count > limit:
                raise Overflow(limit, "witness trees")
            yield dict(W)
            return
        u = order[i]
        kids = nd.children(u)
        for ants in pre[u].get(W[u], ()):
            for c, w in zip(kids, ants):
                W[c] = w
            yield from go(i + 1)

    for w in tables.finals:
        W.clear()
        W[nd.root] = w
        yield from go(0)


def extract_solution(
    core: DPCore, nd: NiceDecomposition, tree: dict[int, bytes], index: DesignatedIndex | None = None
) -> SolutionTuple:
    idx = index or designated_index(nd)
    d1, d2 = core.arity
    vsets = tuple(
        frozenset(v for v, u in idx.nu.items() if core.membership(i, v, tree[u]))
        for i in range(d1)
    )
    esets = tuple(
        frozenset(e for e, u in idx.eps.items() if core.membership(d1 + j, e, tree[u]))
        for j in range(d2)
    )
    return SolutionTuple(vsets, esets)


@dataclass
class PreservationReport:
    sound: bool  # every witness tree extracts to a solution
    complete: bool  # every solution is extracted by some witness tree
    partial: bool = False
    witness_trees: int = 0
    solutions: int = 0
    unsound_example: SolutionTuple | None = None
    missing_example: SolutionTuple | None = None
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.sound and self.complete and not self.partial

    def to_json(self) -> dict:
        def sol(x):
            if x is None:
                return None
            return {"vertex_sets": [sorted(s) for s in x.vertex_sets], "edge_sets": [sorted(s) for s in x.edge_sets]}

        return {
            "sound": self.sound,
            "complete": self.complete,
            "partial": self.partial,
            "witness_trees": self.witness_trees,
            "solutions": self.solutions,
            "unsound_example": sol(self.unsound_example),
            "missing_example": sol(self.missing_example),
            "note": self.note,
        }


def check_solution_preserving(
    core: DPCore,
    nd: NiceDecomposition,
    g: Graph,
    spec: ProblemSpec,
    limit: int | None = 10**6,
    tables: Tables | None = None,
    oracle: set[SolutionTuple] | None = None,
) -> PreservationReport:
    tables = tables or run_tables(core, nd)
    sols = oracle if oracle is not None else brute_force_solutions(g, spec)
    idx = designated_index(nd, g)
    found: set[SolutionTuple] = set()
    rep = PreservationReport(True, True, solutions=len(sols))
    try:
        for tree in enumerate_witness_trees(core, nd, tables, limit):
            rep.witness_trees += 1
            x = extract_solution(core, nd, tree, idx)
            found.add(x)
            if x not in sols and rep.sound:
                rep.sound = False
                rep.unsound_example = x
    except Overflow as exc:
        rep.partial = True
        rep.note = str(exc)
    missing = sorted(sols - found, key=lambda s: s.sort_key())
    if missing and not rep.partial:
        rep.complete = False
        rep.missing_example = missing[0]
    return rep
