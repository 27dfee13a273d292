"""Independent set of size at least l; witnesses (S, c)."""

from __future__ import annotations

from .base import Codec, DPCore

_codec = Codec("set", "int")


class IndependentSetCore(DPCore):
    name = "is"
    vertex_components = 1

    def __init__(self, graph, spec, join_correction: bool = True):
        super().__init__(graph, spec)
        # switching the correction off gives the deliberately broken mutant
        self.join_correction = join_correction

    def leaf(self):
        return {_codec.encode((), 0)}

    def intro_vertex(self, v, w):
        s, c = _codec.decode(w)
        return {w, _codec.encode(s | {v}, c + 1)}

    def intro_edge(self, v, v2, w):
        s, _ = _codec.decode(w)
        if v in s and v2 in s:
            return set()
        return {w}

    def forget_vertex(self, v, w):
        s, c = _codec.decode(w)
        return {_codec.encode(s - {v}, c)}

    def join(self, w1, w2):
        s1, c1 = _codec.decode(w1)
        s2, c2 = _codec.decode(w2)
        if s1 != s2:
            return set()
        shared = len(s1) if self.join_correction else 0
        return {_codec.encode(s1, c1 + c2 - shared)}

    def final(self, w):
        return _codec.decode(w)[1] >= self.spec.threshold

    def membership(self, component, element, w):
        return int(element in _codec.decode(w)[0])

    def join_key(self, w):
        return w[: 1 + 2 * w[0]]

    def describe(self, w):
        s, c = _codec.decode(w)
        return f"({sorted(s)},{c})"


def decode(w: bytes):
    return _codec.decode(w)


def encode(s, c) -> bytes:
    return _codec.encode(s, c)
