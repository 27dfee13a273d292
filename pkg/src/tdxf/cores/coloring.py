"""Proper d-colouring as an ordered partition (S1, ..., Sd) of the bag."""

from __future__ import annotations

from .base import Codec, DPCore


class ColoringCore(DPCore):
    name = "coloring"

    def __init__(self, graph, spec):
        super().__init__(graph, spec)
        self.d = spec.d
        self.vertex_components = spec.d
        self.codec = Codec(*(["set"] * spec.d))

    def leaf(self):
        return {self.codec.encode(*([()] * self.d))}

    def intro_vertex(self, v, w):
        parts = self.codec.decode(w)
        out = set()
        for i in range(self.d):
            grown = list(parts)
            grown[i] = parts[i] | {v}
            out.add(self.codec.encode(*grown))
        return out

    def intro_edge(self, v, v2, w):
        if any(v in p and v2 in p for p in self.codec.decode(w)):
            return set()
        return {w}

    def forget_vertex(self, v, w):
        return {self.codec.encode(*(p - {v} for p in self.codec.decode(w)))}

    def join(self, w1, w2):
        return {w1} if w1 == w2 else set()

    def final(self, w):
        return True

    def membership(self, component, element, w):
        return int(element in self.codec.decode(w)[component])

    def join_key(self, w):
        return w

    # one symbol per colour instead of 2^d indicator vectors; 0 marks "no vertex here"
    @property
    def alphabet_size(self):
        return self.d + 1

    def encode_symbol(self, bits):
        on = [i for i, b in enumerate(bits) if b]
        if not on:
            return 0
        if len(on) > 1:
            raise ValueError(f"vertex in several colour classes: {bits}")
        return on[0] + 1

    def decode_symbol(self, sym):
        return tuple(int(sym == i + 1) for i in range(self.d))

    def describe(self, w):
        return "(" + ",".join(str(sorted(p)) for p in self.codec.decode(w)) + ")"
