"""Hamiltonian cycle via path-endpoint matchings.

A witness is ``(S0, S1, S2, closed, took)``: bag vertices of degree 0, the
endpoint pairs of the partial paths, bag vertices of degree 2, whether the
cycle has already been closed, and whether the edge introduced at this very
node was taken (this last bit is what the edge membership reads).
"""

from __future__ import annotations

from .base import Codec, DPCore

_codec = Codec("set", "pairs", "set", "bit", "bit")


def _degree(s0, s1, s2, v) -> int:
    if v in s0:
        return 0
    if v in s2:
        return 2
    return 1


def _partner(s1, v):
    for a, b in s1:
        if a == v:
            return b
        if b == v:
            return a
    return None


def _link(pairs):
    """Combine endpoint pairs; returns (path endpoint pairs, number of cycles)."""
    adj: dict[int, list[int]] = {}
    for a, b in pairs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    seen: set[int] = set()
    paths = []
    for start in sorted(adj):
        if start in seen or len(adj[start]) != 1:
            continue
        prev, cur = None, start
        seen.add(start)
        while True:
            nxt = [x for x in adj[cur] if x != prev]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen.add(cur)
        paths.append((min(start, cur), max(start, cur)))
    cycles = 0
    for start in sorted(adj):
        if start in seen:
            continue
        cycles += 1
        stack = [start]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(adj[x])
    return paths, cycles


class HamiltonianCycleCore(DPCore):
    name = "hc"
    edge_components = 1

    def __init__(self, graph, spec, paper_literal: bool = False):
        super().__init__(graph, spec)
        self.paper_literal = paper_literal

    def leaf(self):
        return {_codec.encode((), (), (), 0, 0)}

    def intro_vertex(self, v, w):
        s0, s1, s2, closed, _ = _codec.decode(w)
        return {_codec.encode(s0 | {v}, s1, s2, closed, 0)}

    def intro_edge(self, v, v2, w):
        if self.paper_literal:
            return self._intro_edge_literal(v, v2, w)
        s0, s1, s2, closed, _ = _codec.decode(w)
        out = {_codec.encode(s0, s1, s2, closed, 0)}  # leave the edge out
        dv, dv2 = _degree(s0, s1, s2, v), _degree(s0, s1, s2, v2)
        if dv == 2 or dv2 == 2:
            return out
        if dv == 0 and dv2 == 0:
            out.add(_codec.encode(s0 - {v, v2}, s1 | {(v, v2)}, s2, closed, 1))
        elif dv + dv2 == 1:
            fresh, end = (v, v2) if dv == 0 else (v2, v)
            u = _partner(s1, end)
            pairs = (s1 - {(min(end, u), max(end, u))}) | {(fresh, u)}
            out.add(_codec.encode(s0 - {fresh}, pairs, s2 | {end}, closed, 1))
        else:
            a, b = _partner(s1, v), _partner(s1, v2)
            if a == v2:
                # closing the only remaining path turns everything into degree 2
                if not closed and not s0 and s1 == {(min(v, v2), max(v, v2))}:
                    out.add(_codec.encode(s0, (), s2 | {v, v2}, 1, 1))
            else:
                pairs = s1 - {(min(v, a), max(v, a)), (min(v2, b), max(v2, b))}
                out.add(_codec.encode(s0, pairs | {(a, b)}, s2 | {v, v2}, closed, 1))
        return out

    def _intro_edge_literal(self, v, v2, w):
        s0, s1, s2, closed, _ = _codec.decode(w)
        if v in s0 and v2 in s0:
            return {_codec.encode(s0 - {v, v2}, s1 | {(v, v2)}, s2, closed, 1)}
        for x, y in ((v, v2), (v2, v)):
            u = _partner(s1, y)
            if x in s0 and u is not None:
                pairs = (s1 - {(min(y, u), max(y, u))}) | {(x, u)}
                return {_codec.encode(s0 - {x}, pairs, s2, closed, 1)}
        a, b = _partner(s1, v), _partner(s1, v2)
        if a is not None and b is not None and len({v, v2, a, b}) == 4:
            pairs = (s1 - {(min(v2, b), max(v2, b))}) | {(v, b)}
            return {_codec.encode(s0 - {v}, pairs, s2, closed, 1)}
        return {_codec.encode(s0, s1, s2, closed, 0)}

    def forget_vertex(self, v, w):
        s0, s1, s2, closed, _ = _codec.decode(w)
        if v not in s2:
            return set()
        return {_codec.encode(s0, s1, s2 - {v}, closed, 0)}

    def join(self, w1, w2):
        a0, a1, a2, ac, _ = _codec.decode(w1)
        b0, b1, b2, bc, _ = _codec.decode(w2)
        if ac and bc:
            return set()
        bag = a0 | a2 | {x for p in a1 for x in p}
        deg = {}
        for v in bag:
            deg[v] = _degree(a0, a1, a2, v) + _degree(b0, b1, b2, v)
            if deg[v] > 2:
                return set()
        paths, cycles = _link(list(a1) + list(b1))
        r0 = {v for v in bag if deg[v] == 0}
        r2 = {v for v in bag if deg[v] == 2}
        closed = ac or bc
        if cycles:
            if self.paper_literal or cycles > 1 or paths or r0 or closed:
                return set()
            closed = 1
        return {_codec.encode(r0, paths, r2, closed, 0)}

    def final(self, w):
        if self.paper_literal:
            return True
        s0, s1, s2, closed, _ = _codec.decode(w)
        return bool(closed) and not s0 and not s1 and not s2

    def membership(self, component, element, w):
        return w[-1]

    def describe(self, w):
        s0, s1, s2, closed, took = _codec.decode(w)
        return f"({sorted(s0)},{sorted(s1)},{sorted(s2)},closed={closed},took={took})"
