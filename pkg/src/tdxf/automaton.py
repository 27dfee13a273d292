"""Tree automata shaped like a fixed decomposition tree.

States of node ``u`` are the witnesses of the table at ``u`` (numbered in
canonical byte order); every recorded DP step becomes one transition whose
symbol is read off the consequent witness at designated nodes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from .cores.base import DPCore, Overflow, Tables
from .decomposition import AddressedTree, DesignatedIndex, NiceDecomposition, designated_index
from .graphs import SolutionTuple


class Transition(NamedTuple):
    ants: tuple[int, ...]  # one state index per child, in child order
    symbol: int
    cnq: int


@dataclass(frozen=True)
class Term:
    labels: tuple[int, ...]
    tree: AddressedTree | None = field(default=None, compare=False, hash=False)

    def nonzero(self) -> dict[int, int]:
        return {u: a for u, a in enumerate(self.labels) if a}


@dataclass(frozen=True)
class Trace:
    states: tuple[int, ...]


@dataclass
class TShapedAutomaton:
    tree: AddressedTree
    alphabet_size: int
    cells: list[tuple[bytes, ...]]  # Q_u, as witness labels
    finals: tuple[int, ...]  # state indices in Q_root
    delta: list[list[Transition]]

    @property
    def root(self) -> int:
        return self.tree.root

    @property
    def width(self) -> int:
        return max(len(c) for c in self.cells)

    @property
    def num_states(self) -> int:
        return sum(len(c) for c in self.cells)

    @property
    def num_transitions(self) -> int:
        return sum(len(d) for d in self.delta)

    @cached_property
    def transition_index(self) -> list[dict[Transition, int]]:
        return [{t: i for i, t in enumerate(ts)} for ts in self.delta]

    @cached_property
    def by_consequent(self) -> list[dict[int, list[int]]]:
        out = []
        for ts in self.delta:
            d: dict[int, list[int]] = {}
            for i, t in enumerate(ts):
                d.setdefault(t.cnq, []).append(i)
            out.append(d)
        return out

    @cached_property
    def useful(self) -> list[set[int]]:
        """Transitions that occur in at least one accepting trace."""
        nodes = self.tree.nodes
        reach = [set() for _ in nodes]
        for u in nodes:
            kids = self.tree.children[u]
            for t in self.delta[u]:
                if all(a in reach[c] for c, a in zip(kids, t.ants)):
                    reach[u].add(t.cnq)
        live = [set() for _ in nodes]
        used = [set() for _ in nodes]
        live[self.root] = {q for q in self.finals if q in reach[self.root]}
        for u in reversed(nodes):
            kids = self.tree.children[u]
            for i, t in enumerate(self.delta[u]):
                if t.cnq in live[u] and all(a in reach[c] for c, a in zip(kids, t.ants)):
                    used[u].add(i)
                    for c, a in zip(kids, t.ants):
                        live[c].add(a)
        return used

    def is_trace(self, term: Term, trace: Trace) -> bool:
        if len(trace.states) != self.tree.size:
            return False
        for u in self.tree.nodes:
            t = Transition(
                tuple(trace.states[c] for c in self.tree.children[u]), term.labels[u], trace.states[u]
            )
            if t not in self.transition_index[u]:
                return False
        return True

    def is_accepting(self, term: Term, trace: Trace) -> bool:
        return self.is_trace(term, trace) and trace.states[self.root] in self.finals

    def transitions_of(self, term: Term, trace: Trace) -> list[int]:
        """Per node, the index of the transition used by ``trace`` on ``term``."""
        out = []
        for u in self.tree.nodes:
            t = Transition(
                tuple(trace.states[c] for c in self.tree.children[u]), term.labels[u], trace.states[u]
            )
            out.append(self.transition_index[u][t])
        return out

    def dump(self, full: bool = False) -> str:
        lines = [
            f"automaton nodes={self.tree.size} states={self.num_states} transitions={self.num_transitions} "
            f"width={self.width} alphabet={self.alphabet_size} finals={len(self.finals)}"
        ]
        for u in self.tree.nodes:
            lines.append(f"node {u} cell={len(self.cells[u])} transitions={len(self.delta[u])}")
            if full:
                for q, w in enumerate(self.cells[u]):
                    lines.append(f"  state {q} {w.hex()}")
                for i, t in enumerate(self.delta[u]):
                    ants = ",".join(str(a) for a in t.ants)
                    lines.append(f"  delta {i} ({ants}) {t.symbol} -> {t.cnq}")
        return "\n".join(lines) + "\n"


def node_symbol(core: DPCore, idx: DesignatedIndex, u: int, bit_of) -> int:
    """Symbol at ``u``; ``bit_of(component, element)`` supplies the memberships."""
    d1, d2 = core.arity
    bits = [0] * (d1 + d2)
    v = idx.vertex_at.get(u)
    if v is not None:
        for i in range(d1):
            bits[i] = bit_of(i, v)
    e = idx.edge_at.get(u)
    if e is not None:
        for j in range(d2):
            bits[d1 + j] = bit_of(d1 + j, e)
    return core.encode_symbol(bits)


def characteristic_tree(
    nd: NiceDecomposition, x: SolutionTuple, core: DPCore, index: DesignatedIndex | None = None
) -> Term:
    idx = index or designated_index(nd)
    comps = x.components

    def bit(i, element):
        return int(element in comps[i])

    d1 = core.arity[0]
    for i, comp in enumerate(comps):
        known = idx.nu if i < d1 else idx.eps
        stray = [t for t in comp if t not in known]
        if stray:
            raise ValueError(f"element {stray[0]} has no designated node")
    return Term(tuple(node_symbol(core, idx, u, bit) for u in nd.tree.nodes), nd.tree)


def build_automaton(core: DPCore, nd: NiceDecomposition, tables: Tables) -> TShapedAutomaton:
    idx = designated_index(nd)
    pos = [{w: i for i, w in enumerate(cell)} for cell in tables.gamma]
    delta: list[list[Transition]] = []
    for u in nd.tree.nodes:
        kids = nd.children(u)
        sym_cache: dict[bytes, int] = {}
        ts = []
        for ants, w in tables.steps[u]:
            sym = sym_cache.get(w)
            if sym is None:
                sym = node_symbol(core, idx, u, lambda i, t: core.membership(i, t, w))
                sym_cache[w] = sym
            ts.append(Transition(tuple(pos[c][a] for c, a in zip(kids, ants)), sym, pos[u][w]))
        delta.append(ts)
    finals = tuple(pos[nd.root][w] for w in tables.finals)
    return TShapedAutomaton(nd.tree, core.alphabet_size, list(tables.gamma), finals, delta)


def automaton_width(a: TShapedAutomaton) -> int:
    return a.width


def accepts_term(a: TShapedAutomaton, term: Term) -> Trace | None:
    if len(term.labels) != a.tree.size:
        raise ValueError("term shape does not match the automaton")
    reach: list[set[int]] = []
    for u in a.tree.nodes:
        kids = a.tree.children[u]
        lab = term.labels[u]
        reach.append({
            t.cnq for t in a.delta[u]
            if t.symbol == lab and all(q in reach[c] for c, q in zip(kids, t.ants))
        })
    good = sorted(q for q in a.finals if q in reach[a.root])
    if not good:
        return None
    states = [0] * a.tree.size
    states[a.root] = good[0]
    for u in reversed(a.tree.nodes):
        kids = a.tree.children[u]
        lab = term.labels[u]
        best = min(
            t.ants for t in a.delta[u]
            if t.cnq == states[u] and t.symbol == lab and all(q in reach[c] for c, q in zip(kids, t.ants))
        )
        for c, q in zip(kids, best):
            states[c] = q
    return Trace(tuple(states))


def enumerate_language(a: TShapedAutomaton, limit: int | None = None) -> set[Term]:
    """All accepted terms; raises Overflow once more than ``limit`` are found."""
    used = a.useful
    partial: list[dict[int, set[frozenset]]] = []
    for u in a.tree.nodes:
        kids = a.tree.children[u]
        here: dict[int, set[frozenset]] = {}
        for i in sorted(used[u]):
            t = a.delta[u][i]
            mark = frozenset({(u, t.symbol)}) if t.symbol else frozenset()
            if not kids:
                got = {mark}
            elif len(kids) == 1:
                below = partial[kids[0]][t.ants[0]]
                got = below if not mark else {p | mark for p in below}
            else:
                left = partial[kids[0]][t.ants[0]]
                right = partial[kids[1]][t.ants[1]]
                got = {p | q | mark for p in left for q in right}
            bucket = here.setdefault(t.cnq, set())
            bucket |= got
            if limit is not None and len(bucket) > limit:
                raise Overflow(limit, "terms")
        partial.append(here)
    out: set[frozenset] = set()
    for q in a.finals:
        out |= partial[a.root].get(q, set())
    if limit is not None and len(out) > limit:
        raise Overflow(limit, "terms")
    size = a.tree.size
    terms = set()
    for p in out:
        labels = [0] * size
        for u, s in p:
            labels[u] = s
        terms.add(Term(tuple(labels), a.tree))
    return terms


def random_accepting_trace(a: TShapedAutomaton, rng: random.Random) -> tuple[Term, Trace] | None:
    used = a.useful
    root_choices = sorted({a.delta[a.root][i].cnq for i in used[a.root]})
    if not root_choices:
        return None
    states = [0] * a.tree.size
    labels = [0] * a.tree.size
    states[a.root] = rng.choice(root_choices)
    for u in reversed(a.tree.nodes):
        options = [i for i in a.by_consequent[u].get(states[u], ()) if i in used[u]]
        t = a.delta[u][rng.choice(options)]
        labels[u] = t.symbol
        for c, q in zip(a.tree.children[u], t.ants):
            states[c] = q
    return Term(tuple(labels), a.tree), Trace(tuple(states))
