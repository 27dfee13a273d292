"""Dominating set of size at most l; witnesses (S1 chosen, S2 dominated, c)."""

from __future__ import annotations

from .base import Codec, DPCore

_codec = Codec("set", "set", "int")


class DominatingSetCore(DPCore):
    name = "ds"
    vertex_components = 1

    def __init__(self, graph, spec, paper_literal: bool = False):
        super().__init__(graph, spec)
        self.paper_literal = paper_literal

    def leaf(self):
        return {_codec.encode((), (), 0)}

    def intro_vertex(self, v, w):
        s1, s2, c = _codec.decode(w)
        if self.paper_literal:
            # printed rule: the counter moves on the branch that does not choose v
            return {_codec.encode(s1 | {v}, s2 | {v}, c), _codec.encode(s1, s2, c + 1)}
        return {_codec.encode(s1 | {v}, s2 | {v}, c + 1), w}

    def intro_edge(self, v, v2, w):
        s1, s2, c = _codec.decode(w)
        if (v in s1) == (v2 in s1):
            return {w}
        if v not in s1:
            return {_codec.encode(s1, s2 | {v}, c)}
        return {_codec.encode(s1, s2 | {v2}, c)}

    def forget_vertex(self, v, w):
        s1, s2, c = _codec.decode(w)
        if v not in s2:
            return set()
        return {_codec.encode(s1 - {v}, s2 - {v}, c)}

    def join(self, w1, w2):
        a1, a2, c1 = _codec.decode(w1)
        b1, b2, c2 = _codec.decode(w2)
        if a1 != b1:
            return set()
        return {_codec.encode(a1, a2 | b2, c1 + c2 - len(a1))}

    def final(self, w):
        return _codec.decode(w)[2] <= self.spec.threshold

    def membership(self, component, element, w):
        return int(element in _codec.decode(w)[0])

    def join_key(self, w):
        return w[: 1 + 2 * w[0]]

    def describe(self, w):
        s1, s2, c = _codec.decode(w)
        return f"({sorted(s1)},{sorted(s2)},{c})"
