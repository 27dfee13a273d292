"""Cut-set of size at least l; witnesses (R cut pairs in the bag, S side, c)."""

from __future__ import annotations

from .base import Codec, DPCore

_codec = Codec("pairs", "set", "int")


class CutCore(DPCore):
    name = "cut"
    edge_components = 1

    def leaf(self):
        return {_codec.encode((), (), 0)}

    def intro_vertex(self, v, w):
        r, s, c = _codec.decode(w)
        return {w, _codec.encode(r, s | {v}, c)}

    def intro_edge(self, v, v2, w):
        r, s, c = _codec.decode(w)
        if (v in s) != (v2 in s):
            return {_codec.encode(r | {(v, v2)}, s, c + 1)}
        return {w}

    def forget_vertex(self, v, w):
        r, s, c = _codec.decode(w)
        return {_codec.encode({p for p in r if v not in p}, s - {v}, c)}

    def join(self, w1, w2):
        r1, s1, c1 = _codec.decode(w1)
        r2, s2, c2 = _codec.decode(w2)
        if s1 != s2:
            return set()
        # each edge is introduced in exactly one subtree, so R1 and R2 are disjoint
        assert not r1 & r2, "an edge was introduced on both sides of a join"
        return {_codec.encode(r1 | r2, s1, c1 + c2)}

    def final(self, w):
        return _codec.decode(w)[2] >= self.spec.threshold

    def membership(self, component, element, w):
        a, b = self.graph.endpoints(element)
        return int((a, b) in _codec.decode(w)[0])

    def join_key(self, w):
        return _codec.decode(w)[1]

    def describe(self, w):
        r, s, c = _codec.decode(w)
        return f"({sorted(r)},{sorted(s)},{c})"
