"""The linear system of an automaton and its LP / JSON-lines serialisations.

Variables (all bounded to [0, 1]):
  x_{u,a}  one per node and symbol        (main variables)
  y_{u,q}  one per state                  (state variables)
  z_{u,t}  one per transition             (transition variables)

Equality families, tagged by number:
  3  the root carries exactly one final state
  4  non-final root states are off
  5  a state is on iff exactly one transition producing it is on
  6  a non-root state is on iff one parent transition consumes it
  7  a main variable equals the sum of transitions emitting its symbol
Family 2 is the box [0, 1] on every variable, kept as bounds.
"""

from __future__ import annotations

import json
import re
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import lcm
from typing import Iterable, Iterator, NamedTuple

from .automaton import Term, Trace, TShapedAutomaton
from .cores.base import DPCore
from .decomposition import DesignatedIndex, NiceDecomposition


class VarKey(NamedTuple):
    kind: str  # 'x', 'y' or 'z'
    node: int
    index: int

    @property
    def name(self) -> str:
        tag = {"x": "s", "y": "w", "z": "t"}[self.kind]
        return f"{self.kind}_n{self.node}_{tag}{self.index}"

    @classmethod
    def parse(cls, name: str) -> "VarKey":
        m = _VAR_RE.fullmatch(name)
        if not m:
            raise ValueError(f"not a variable name: {name!r}")
        return cls(m.group(1), int(m.group(2)), int(m.group(4)))


_VAR_RE = re.compile(r"([xyz])_n(\d+)_([swt])(\d+)")


@dataclass(frozen=True)
class Row:
    family: int
    name: str
    coeffs: tuple[tuple[VarKey, Fraction], ...]
    rhs: Fraction
    relation: str = "="


@dataclass
class LinearSystem:
    variables: tuple[VarKey, ...]
    rows: list[Row]
    lower: Fraction = Fraction(0)
    upper: Fraction = Fraction(1)

    @cached_property
    def position(self) -> dict[VarKey, int]:
        return {k: i for i, k in enumerate(self.variables)}

    @cached_property
    def column_rows(self) -> dict[VarKey, list[tuple[int, Fraction]]]:
        """For each variable, the rows it appears in with its coefficient."""
        out: dict[VarKey, list[tuple[int, Fraction]]] = {}
        for i, r in enumerate(self.rows):
            for k, c in r.coeffs:
                out.setdefault(k, []).append((i, c))
        return out

    def family_counts(self) -> dict[int, int]:
        out = {f: 0 for f in (3, 4, 5, 6, 7)}
        for r in self.rows:
            out[r.family] = out.get(r.family, 0) + 1
        return out

    @property
    def num_equalities(self) -> int:
        return sum(1 for r in self.rows if r.relation == "=")

    @property
    def num_bound_pairs(self) -> int:
        return len(self.variables)

    def size_report(self) -> dict:
        return {
            "variables": len(self.variables),
            "equalities": self.num_equalities,
            "bound_pairs": self.num_bound_pairs,
            "families": {str(k): v for k, v in sorted(self.family_counts().items())},
        }

    def __eq__(self, other):
        if not isinstance(other, LinearSystem):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.rows == other.rows
            and (self.lower, self.upper) == (other.lower, other.upper)
        )


_KNOWN_CACHE: dict[int, tuple[tuple, frozenset]] = {}


def _known_set(variables: tuple) -> frozenset:
    # vectors of one system share the same tuple object; avoid rebuilding the set
    hit = _KNOWN_CACHE.get(id(variables))
    if hit is not None and hit[0] is variables:
        return hit[1]
    known = frozenset(variables)
    if len(_KNOWN_CACHE) > 64:
        _KNOWN_CACHE.clear()
    _KNOWN_CACHE[id(variables)] = (variables, known)
    return known


class RationalVector(Mapping):
    """Sparse exact vector, total on a fixed variable list (missing means 0)."""

    def __init__(self, variables: Iterable[VarKey], entries: Mapping[VarKey, Fraction] | None = None):
        self.variables = tuple(variables)
        self._known = _known_set(self.variables)
        self.entries: dict[VarKey, Fraction] = {}
        for k, v in (entries or {}).items():
            if k not in self._known:
                raise KeyError(f"{k.name} is not a variable of the system")
            if v:
                self.entries[k] = v if type(v) is Fraction else Fraction(v)

    @classmethod
    def _trusted(cls, variables: tuple, known: frozenset, entries: dict) -> "RationalVector":
        # internal constructor for results of arithmetic on checked vectors
        out = cls.__new__(cls)
        out.variables, out._known = variables, known
        out.entries = {k: v for k, v in entries.items() if v}
        return out

    def __getitem__(self, k: VarKey) -> Fraction:
        if k not in self._known:
            raise KeyError(k)
        return self.entries.get(k, Fraction(0))

    def __iter__(self) -> Iterator[VarKey]:
        return iter(self.variables)

    def __len__(self) -> int:
        return len(self.variables)

    def __eq__(self, other):
        if isinstance(other, RationalVector):
            same = self.variables is other.variables or self.variables == other.variables
            return same and self.entries == other.entries
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.entries.items()))

    @property
    def support(self) -> set[VarKey]:
        return set(self.entries)

    def is_integral(self) -> bool:
        return all(v == 1 for v in self.entries.values())

    def scale(self, c) -> "RationalVector":
        c = c if type(c) is Fraction else Fraction(c)
        return RationalVector._trusted(self.variables, self._known, {k: v * c for k, v in self.entries.items()})

    def __add__(self, other: "RationalVector") -> "RationalVector":
        if other.variables is not self.variables and other.variables != self.variables:
            raise ValueError("vectors of different systems")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return RationalVector._trusted(self.variables, self._known, out)

    def __sub__(self, other: "RationalVector") -> "RationalVector":
        return self + other.scale(-1)

    def __repr__(self):
        body = ", ".join(f"{k.name}={v}" for k, v in sorted(self.entries.items()))
        return f"RationalVector({body})"


def variables_of(a: TShapedAutomaton) -> tuple[VarKey, ...]:
    cached = a.__dict__.get("_variables")
    if cached is not None:
        return cached
    nodes = a.tree.nodes
    xs = [VarKey("x", u, s) for u in nodes for s in range(a.alphabet_size)]
    ys = [VarKey("y", u, q) for u in nodes for q in range(len(a.cells[u]))]
    zs = [VarKey("z", u, t) for u in nodes for t in range(len(a.delta[u]))]
    out = tuple(xs + ys + zs)
    a.__dict__["_variables"] = out
    return out


def build_system(a: TShapedAutomaton) -> LinearSystem:
    one, neg = Fraction(1), Fraction(-1)
    r = a.root
    rows: list[Row] = []
    finals = set(a.finals)
    rows.append(Row(3, "f3", tuple((VarKey("y", r, q), one) for q in sorted(finals)), one))
    for q in range(len(a.cells[r])):
        if q not in finals:
            rows.append(Row(4, f"f4_n{r}_w{q}", ((VarKey("y", r, q), one),), Fraction(0)))
    for u in a.tree.nodes:
        by_cnq: dict[int, list[int]] = {}
        for t, tr in enumerate(a.delta[u]):
            by_cnq.setdefault(tr.cnq, []).append(t)
        for q in range(len(a.cells[u])):
            coeffs = tuple((VarKey("z", u, t), one) for t in by_cnq.get(q, ()))
            rows.append(Row(5, f"f5_n{u}_w{q}", coeffs + ((VarKey("y", u, q), neg),), Fraction(0)))
    for u in a.tree.nodes:
        p = a.tree.parent[u]
        if p < 0:
            continue
        slot = a.tree.children[p].index(u)
        users: dict[int, list[int]] = {}
        for t, tr in enumerate(a.delta[p]):
            users.setdefault(tr.ants[slot], []).append(t)
        for q in range(len(a.cells[u])):
            coeffs = tuple((VarKey("z", p, t), one) for t in users.get(q, ()))
            rows.append(Row(6, f"f6_n{u}_w{q}", coeffs + ((VarKey("y", u, q), neg),), Fraction(0)))
    for u in a.tree.nodes:
        by_sym: dict[int, list[int]] = {}
        for t, tr in enumerate(a.delta[u]):
            by_sym.setdefault(tr.symbol, []).append(t)
        for s in range(a.alphabet_size):
            coeffs = tuple((VarKey("z", u, t), one) for t in by_sym.get(s, ()))
            rows.append(Row(7, f"f7_n{u}_s{s}", coeffs + ((VarKey("x", u, s), neg),), Fraction(0)))
    sys = LinearSystem(variables_of(a), rows)
    _assert_sizes(a, sys)
    return sys


def expected_sizes(a: TShapedAutomaton) -> tuple[int, int]:
    """(#variables, #equalities) predicted from the automaton's dimensions."""
    ts = a.tree.size * a.alphabet_size
    nq, nr = a.num_states, len(a.cells[a.root])
    return ts + nq + a.num_transitions, 1 + (nr - len(a.finals)) + nq + (nq - nr) + ts


def _assert_sizes(a: TShapedAutomaton, sys: LinearSystem) -> None:
    nv, ne = expected_sizes(a)
    if len(sys.variables) != nv or sys.num_equalities != ne:
        raise AssertionError(
            f"size identity broken: {len(sys.variables)} vars / {sys.num_equalities} rows, expected {nv} / {ne}"
        )


def trace_vector(a: TShapedAutomaton, term: Term, trace: Trace) -> RationalVector:
    if not a.is_trace(term, trace):
        raise ValueError("not a trace of the automaton for this term")
    ent = {}
    for u, t in enumerate(a.transitions_of(term, trace)):
        ent[VarKey("x", u, term.labels[u])] = Fraction(1)
        ent[VarKey("y", u, trace.states[u])] = Fraction(1)
        ent[VarKey("z", u, t)] = Fraction(1)
    return RationalVector(variables_of(a), ent)


def project_objective(
    nd: NiceDecomposition, index: DesignatedIndex, weights: Mapping, core: DPCore
) -> dict[VarKey, Fraction]:
    """Lift element weights to main variables.

    ``weights`` maps an element id (first component) or a ``(component, element)``
    pair to a rational.
    """
    d1, d2 = core.arity
    out: dict[VarKey, Fraction] = {}
    for key, w in weights.items():
        comp, elem = key if isinstance(key, tuple) else (0, key)
        if not 0 <= comp < d1 + d2:
            raise KeyError(f"no solution component {comp}")
        where = index.nu if comp < d1 else index.eps
        if elem not in where:
            raise KeyError(f"element {elem} has no designated node")
        bits = [0] * (d1 + d2)
        bits[comp] = 1
        var = VarKey("x", where[elem], core.encode_symbol(bits))
        out[var] = out.get(var, Fraction(0)) + Fraction(w)
    return {k: v for k, v in sorted(out.items()) if v}


def unit_weights(core: DPCore) -> dict:
    g = core.graph
    d1, d2 = core.arity
    w = {}
    for i in range(d1):
        w.update({(i, v): 1 for v in g.vertices})
    for j in range(d2):
        w.update({(d1 + j, e): 1 for e in g.edges})
    return w


def evaluate(objective: Mapping[VarKey, Fraction], v: Mapping[VarKey, Fraction]) -> Fraction:
    return sum((c * v[k] for k, c in objective.items()), Fraction(0))


# -- CPLEX LP text -------------------------------------------------------------

_WRAP = 6  # terms per line


def _is_terminating(q: Fraction) -> bool:
    d = q.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def _decimal(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    sign = "-" if q < 0 else ""
    q = abs(q)
    digits = 0
    d = q.denominator
    while (10 ** digits) % d:
        digits += 1
    scaled = q.numerator * (10 ** digits // q.denominator)
    whole, frac = divmod(scaled, 10 ** digits)
    return f"{sign}{whole}.{str(frac).rjust(digits, '0')}"


def _scale_for(coeffs: Iterable[Fraction]) -> int:
    dens = [c.denominator for c in coeffs if not _is_terminating(c)]
    return lcm(*dens) if dens else 1


def _expr(terms: list[tuple[str, Fraction]]) -> list[str]:
    chunks = []
    for i, (name, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = name if mag == 1 else f"{_decimal(mag)} {name}"
        if i == 0:
            chunks.append(body if sign == "+" else f"- {body}")
        else:
            chunks.append(f"{sign} {body}")
    return chunks


def _emit_block(head: str, terms: list[tuple[str, Fraction]], tail: str = "") -> list[str]:
    chunks = _expr(terms)
    if not chunks:
        chunks = ["0"] if tail else []
    lines = []
    for i in range(0, max(len(chunks), 1), _WRAP):
        piece = " ".join(chunks[i:i + _WRAP])
        lines.append((head if i == 0 else "   ") + (" " + piece if piece else ""))
    if tail:
        lines[-1] += " " + tail
    return lines


def emit_lp(sys: LinearSystem, objective: Mapping[VarKey, Fraction] | None = None, sense: str = "max") -> str:
    objective = {k: Fraction(v) for k, v in (objective or {}).items() if v}
    for k in objective:
        if k not in sys.position:
            raise KeyError(f"objective names unknown variable {k.name}")
    out = ["\\ tdxf extended formulation"]
    obj_terms = sorted(objective.items(), key=lambda kv: sys.position[kv[0]])
    d = _scale_for(c for _, c in obj_terms)
    if d != 1:
        out.append(f"\\ scale obj {d}")
    head = ("Maximize" if sense == "max" else "Minimize") + " obj:"
    out += _emit_block(head, [(k.name, c * d) for k, c in obj_terms])
    out.append("Subject To")
    for row in sys.rows:
        d = _scale_for([c for _, c in row.coeffs] + [row.rhs])
        if d != 1:
            out.append(f"\\ scale {row.name} {d}")
        tail = f"{row.relation} {_decimal(row.rhs * d)}"
        out += _emit_block(f" {row.name}:", [(k.name, c * d) for k, c in row.coeffs], tail)
    out.append("Bounds")
    lo, hi = _decimal(sys.lower), _decimal(sys.upper)
    for k in sys.variables:
        out.append(f" {lo} <= {k.name} <= {hi}")
    out.append("End")
    return "\n".join(out) + "\n"


class LPFormatError(ValueError):
    pass


_TERM_RE = re.compile(r"([+-])?\s*((?:\d+(?:\.\d*)?|\.\d+)\s+)?([A-Za-z_][\w]*)")


_ONE = Fraction(1)


def _parse_expr(text: str, numbers: dict | None = None) -> list[tuple[str, Fraction]]:
    numbers = {} if numbers is None else numbers
    text = text.strip()
    if text in ("", "0"):
        return []
    out = []
    pos = 0
    while pos < len(text):
        m = _TERM_RE.match(text, pos)
        if not m:
            raise LPFormatError(f"cannot parse expression near {text[pos:pos + 20]!r}")
        sign, raw, name = m.groups()
        coef = _ONE
        if raw:
            raw = raw.strip()
            coef = numbers.get(raw)
            if coef is None:
                coef = numbers[raw] = Fraction(raw)
        out.append((name, -coef if sign == "-" else coef))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return out


def parse_lp(text: str) -> tuple[LinearSystem, dict[VarKey, Fraction], str]:
    scales: dict[str, int] = {}
    section = None
    sense = None
    obj_text = []
    rows_text: list[list[str]] = []
    bounds: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            m = re.fullmatch(r"\\ scale (\S+) (\d+)", line)
            if m:
                scales[m.group(1)] = int(m.group(2))
            continue
        low = line.lower()
        if low.startswith(("maximize", "minimize")):
            sense = "max" if low.startswith("maximize") else "min"
            section = "obj"
            rest = line.split(None, 1)[1] if " " in line else ""
            obj_text.append(rest)
            continue
        if low == "subject to":
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low == "end":
            section = None
            continue
        if section == "obj":
            obj_text.append(line)
        elif section == "rows":
            if re.match(r"[A-Za-z_]\w*:", line):
                rows_text.append([line])
            elif rows_text:
                rows_text[-1].append(line)
            else:
                raise LPFormatError(f"row continuation before any row: {line!r}")
        elif section == "bounds":
            bounds.append(line)
        else:
            raise LPFormatError(f"text outside any section: {line!r}")
    if sense is None:
        raise LPFormatError("missing objective section")
    obj = " ".join(obj_text)
    if not obj.startswith("obj:"):
        raise LPFormatError("objective must be named obj")
    numbers: dict[str, Fraction] = {}
    names: dict[str, VarKey] = {}

    def key(n):
        k = names.get(n)
        if k is None:
            k = names[n] = VarKey.parse(n)
        return k

    d = scales.get("obj", 1)
    objective = {key(n): c / d for n, c in _parse_expr(obj[4:], numbers)}

    rows = []
    for parts in rows_text:
        body = " ".join(parts)
        name, rest = body.split(":", 1)
        m = re.fullmatch(r"(.*?)\s*(<=|>=|=)\s*(-?[\d.]+)", rest.strip())
        if not m:
            raise LPFormatError(f"malformed row {name}")
        d = scales.get(name, 1)
        fam = re.match(r"f(\d)", name)
        if not fam:
            raise LPFormatError(f"row {name} carries no family tag")
        terms = _parse_expr(m.group(1), numbers)
        if d == 1:
            coeffs = tuple((key(n), c) for n, c in terms)
        else:
            coeffs = tuple((key(n), c / d) for n, c in terms)
        rows.append(Row(int(fam.group(1)), name, coeffs, Fraction(m.group(3)) / d, m.group(2)))

    variables = []
    lower = upper = None
    box = None
    for b in bounds:
        tok = b.split()
        if len(tok) != 5 or tok[1] != "<=" or tok[3] != "<=":
            raise LPFormatError(f"unsupported bound line {b!r}")
        if box is None:
            box = (tok[0], tok[4])
            try:
                lower, upper = Fraction(tok[0]), Fraction(tok[4])
            except ValueError:
                raise LPFormatError(f"unsupported bound line {b!r}") from None
        elif (tok[0], tok[4]) != box:
            raise LPFormatError("all variables must share one box")
        variables.append(key(tok[2]))
    sys = LinearSystem(tuple(variables), rows, lower or Fraction(0), upper if upper is not None else Fraction(1))
    return sys, objective, sense


# -- JSON lines -----------------------------------------------------------------


def emit_jsonl(sys: LinearSystem) -> str:
    lines = [json.dumps({"variables": [k.name for k in sys.variables],
                         "bounds": [str(sys.lower), str(sys.upper)]}, separators=(",", ":"))]
    for r in sys.rows:
        lines.append(json.dumps({
            "family": r.family,
            "name": r.name,
            "coeffs": [[k.name, str(c)] for k, c in r.coeffs],
            "relation": r.relation,
            "rhs": str(r.rhs),
        }, separators=(",", ":")))
    return "\n".join(lines) + "\n"


def parse_jsonl(text: str) -> LinearSystem:
    lines = [json.loads(l) for l in text.splitlines() if l.strip()]
    head = lines[0]
    rows = [
        Row(d["family"], d["name"], tuple((VarKey.parse(n), Fraction(c)) for n, c in d["coeffs"]),
            Fraction(d["rhs"]), d["relation"])
        for d in lines[1:]
    ]
    lo, hi = (Fraction(x) for x in head["bounds"])
    return LinearSystem(tuple(VarKey.parse(n) for n in head["variables"]), rows, lo, hi)
