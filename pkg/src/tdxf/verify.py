"""Exact checks on points of the formulation polytope.

Feasibility, reading a 0/1 point back as a term plus accepting trace,
peeling integral sub-solutions off a fractional point, and LP optimisation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from gmpy2 import mpq

from .automaton import Term, Trace, TShapedAutomaton
from .formulation import LinearSystem, RationalVector, VarKey, trace_vector
from .simplex import Infeasible, LPResult, solve


@dataclass(frozen=True)
class Violation:
    family: int
    row: str
    residual: Fraction

    def __str__(self):
        return f"family {self.family} row {self.row}: residual {self.residual}"


def _violated(r, act, rhs) -> bool:
    if r.relation == "=":
        return act != rhs
    return act > rhs if r.relation == "<=" else act < rhs


def _mpq_view(sys: LinearSystem):
    """Column lists and right-hand sides as gmpy2 rationals, cached on the system."""
    view = sys.__dict__.get("_mpq_view")
    if view is None:
        cols = {
            k: [(i, mpq(c.numerator, c.denominator)) for i, c in lst]
            for k, lst in sys.column_rows.items()
        }
        rhs = [mpq(r.rhs.numerator, r.rhs.denominator) for r in sys.rows]
        view = sys.__dict__["_mpq_view"] = (cols, rhs)
    return view


def check_feasible(sys: LinearSystem, v: Mapping[VarKey, Fraction]) -> list[Violation]:
    out = []
    if isinstance(v, RationalVector) and sys.lower <= 0 <= sys.upper:
        # sparse route: only the support can break a bound or move a row off zero activity
        cols, rhs = _mpq_view(sys)
        act = [mpq(0)] * len(sys.rows)
        for k in sorted(v.entries):
            x = v.entries[k]
            if x < sys.lower:
                out.append(Violation(2, f"lower:{k.name}", x - sys.lower))
            elif x > sys.upper:
                out.append(Violation(2, f"upper:{k.name}", x - sys.upper))
            xq = mpq(x.numerator, x.denominator)
            for i, c in cols.get(k, ()):
                act[i] += c * xq
        for r, a, b in zip(sys.rows, act, rhs):
            if _violated(r, a, b):
                a = Fraction(int(a.numerator), int(a.denominator))
                out.append(Violation(r.family, r.name, a - r.rhs))
        return out
    for k in sys.variables:
        x = v[k]
        if x < sys.lower:
            out.append(Violation(2, f"lower:{k.name}", x - sys.lower))
        elif x > sys.upper:
            out.append(Violation(2, f"upper:{k.name}", x - sys.upper))
    for r in sys.rows:
        act = sum((c * v[k] for k, c in r.coeffs), Fraction(0))
        if _violated(r, act, r.rhs):
            out.append(Violation(r.family, r.name, act - r.rhs))
    return out


def node_sums(a: TShapedAutomaton, v: Mapping[VarKey, Fraction]) -> list[tuple[Fraction, Fraction, Fraction]]:
    """Per node, the sums of its main, state and transition variables."""
    if isinstance(v, RationalVector):
        acc = [[Fraction(0)] * 3 for _ in a.tree.nodes]
        slot = {"x": 0, "y": 1, "z": 2}
        for k, x in v.entries.items():
            acc[k.node][slot[k.kind]] += x
        return [tuple(t) for t in acc]
    out = []
    for u in a.tree.nodes:
        sx = sum((v[VarKey("x", u, s)] for s in range(a.alphabet_size)), Fraction(0))
        sy = sum((v[VarKey("y", u, q)] for q in range(len(a.cells[u]))), Fraction(0))
        sz = sum((v[VarKey("z", u, t)] for t in range(len(a.delta[u]))), Fraction(0))
        out.append((sx, sy, sz))
    return out


class NotIntegral(ValueError):
    pass


class NotFeasible(ValueError):
    def __init__(self, violations):
        super().__init__(f"{len(violations)} violated constraints, first: {violations[0]}")
        self.violations = violations


def _require_feasible(sys, v):
    bad = check_feasible(sys, v)
    if bad:
        raise NotFeasible(bad)


def _one_hot(a, v, kind, u, count):
    hits = [i for i in range(count) if v[VarKey(kind, u, i)] == 1]
    if len(hits) != 1:
        raise NotIntegral(f"node {u} has {len(hits)} {kind}-variables at 1")
    return hits[0]


def integral_to_trace(a: TShapedAutomaton, sys: LinearSystem, v: Mapping[VarKey, Fraction]) -> tuple[Term, Trace]:
    values = v.entries.items() if isinstance(v, RationalVector) else ((k, v[k]) for k in sys.variables)
    for k, x in values:
        if x not in (0, 1):
            raise NotIntegral(f"{k.name} = {x}")
    _require_feasible(sys, v)
    labels, states = [], []
    for u in a.tree.nodes:
        labels.append(_one_hot(a, v, "x", u, a.alphabet_size))
        states.append(_one_hot(a, v, "y", u, len(a.cells[u])))
        t = _one_hot(a, v, "z", u, len(a.delta[u]))
        tr = a.delta[u][t]
        if tr.symbol != labels[-1] or tr.cnq != states[-1]:
            raise NotFeasible([Violation(5, f"node {u}", Fraction(1))])
    term, trace = Term(tuple(labels), a.tree), Trace(tuple(states))
    if not a.is_accepting(term, trace):
        raise NotFeasible([Violation(6, "trace", Fraction(1))])
    return term, trace


def _positive_sub_trace(a: TShapedAutomaton, v: Mapping[VarKey, Fraction]) -> tuple[Term, Trace]:
    """Root-to-leaves choice of positive rows, lowest index first."""
    size = a.tree.size
    states = [0] * size
    labels = [0] * size
    root = a.root
    finals = [q for q in sorted(a.finals) if v.get(VarKey("y", root, q), 0) > 0]
    if not finals:
        raise NotFeasible([Violation(3, "f3", Fraction(-1))])
    states[root] = finals[0]
    for u in reversed(a.tree.nodes):
        picks = [t for t in a.by_consequent[u].get(states[u], ()) if v.get(VarKey("z", u, t), 0) > 0]
        if not picks:
            raise NotFeasible([Violation(5, f"f5_n{u}_w{states[u]}", Fraction(-1))])
        tr = a.delta[u][picks[0]]
        labels[u] = tr.symbol
        for c, q in zip(a.tree.children[u], tr.ants):
            states[c] = q
    return Term(tuple(labels), a.tree), Trace(tuple(states))


def extract_integral_subsolution(a: TShapedAutomaton, sys: LinearSystem, v: RationalVector) -> RationalVector:
    _require_feasible(sys, v)
    term, trace = _positive_sub_trace(a, v)
    return trace_vector(a, term, trace)


@dataclass
class Decomposition:
    parts: list[tuple[Fraction, Term, Trace]]
    iterations: int

    def reconstruct(self, a: TShapedAutomaton) -> RationalVector:
        acc = None
        for w, term, trace in self.parts:
            piece = trace_vector(a, term, trace).scale(w)
            acc = piece if acc is None else acc + piece
        return acc


def decompose(a: TShapedAutomaton, sys: LinearSystem, v: RationalVector) -> Decomposition:
    _require_feasible(sys, v)
    parts = []
    left = mpq(1)  # weight of the original point still unexplained
    # work on gmpy2 rationals; the point is renormalised after every peel
    cur = {k: mpq(x.numerator, x.denominator) for k, x in v.entries.items()}
    iterations = 0
    while True:
        iterations += 1
        term, trace = _positive_sub_trace(a, cur)
        star = trace_vector(a, term, trace).support
        alpha = min(cur[k] for k in star)
        if alpha == 1:
            parts.append((left, term, trace))
            break
        parts.append((left * alpha, term, trace))
        keep = 1 - alpha
        nxt = {}
        for k, x in cur.items():
            y = (x - alpha) / keep if k in star else x / keep
            if y:
                nxt[k] = y
        cur = nxt
        left *= keep
    exact = [(Fraction(int(w.numerator), int(w.denominator)), t, tr) for w, t, tr in parts]
    return Decomposition(exact, iterations)


# -- optimisation ------------------------------------------------------------------


@dataclass
class OptimumResult:
    value: Fraction
    vertex: RationalVector
    pivots: int


def optimize(sys: LinearSystem, objective: Mapping[VarKey, Fraction], sense: str = "max") -> OptimumResult:
    pos = sys.position
    rows, rhs = [], []
    for r in sys.rows:
        if r.relation != "=":
            raise ValueError("only equality rows are supported")
        rows.append({pos[k]: c for k, c in r.coeffs})
        rhs.append(r.rhs)
    n = len(sys.variables)
    cost = {pos[k]: c for k, c in objective.items()}
    res: LPResult = solve(rows, rhs, cost, n, [sys.lower] * n, [sys.upper] * n, sense)
    vertex = RationalVector(sys.variables, {k: x for k, x in zip(sys.variables, res.values) if x})
    return OptimumResult(res.value, vertex, res.pivots)


__all__ = [
    "Violation",
    "check_feasible",
    "node_sums",
    "integral_to_trace",
    "extract_integral_subsolution",
    "decompose",
    "Decomposition",
    "optimize",
    "OptimumResult",
    "Infeasible",
    "NotIntegral",
    "NotFeasible",
]
