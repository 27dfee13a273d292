"""Per-instance cross-validation checks.

Each check compares one pipeline stage against an independent route (the
brute-force oracle, exact simplex, re-parsing) and returns a ``CheckResult``.
Both the acceptance suite and the ``cross-validate`` command run these.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from .automaton import (
    TShapedAutomaton,
    build_automaton,
    characteristic_tree,
    enumerate_language,
    random_accepting_trace,
)
from .cores import Overflow, Tables, check_solution_preserving, make_core, run_tables, table_ceiling
from .decomposition import NiceDecomposition, RawDecomposition, designated_index, nice_decomposition
from .formulation import (
    LinearSystem,
    VarKey,
    build_system,
    emit_jsonl,
    emit_lp,
    expected_sizes,
    parse_jsonl,
    parse_lp,
    project_objective,
    trace_vector,
    unit_weights,
)
from .graphs import Graph, ProblemSpec, SolutionTuple, brute_force_solutions
from .simplex import Infeasible
from .verify import check_feasible, decompose, integral_to_trace, node_sums, optimize

PASS, FAIL = "PASS", "FAIL"


@dataclass
class CheckResult:
    name: str
    anchor: str  # which property of the construction is being tested
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {"check": self.name, "anchor": self.anchor, "status": self.status, "detail": self.detail}


def _result(name, anchor, failures, **detail):
    if failures:
        detail["counterexample"] = failures[0]
        detail["failures"] = len(failures)
    return CheckResult(name, anchor, FAIL if failures else PASS, detail)


def solution_json(x: SolutionTuple) -> dict:
    return {"vertex_sets": [sorted(s) for s in x.vertex_sets], "edge_sets": [sorted(s) for s in x.edge_sets]}


def unit_sense(spec: ProblemSpec) -> str:
    return "min" if spec.kind == "ds" else "max"


class _TableCache:
    """Tables depend on the problem kind but not on the threshold, which only
    changes the final test; keep one run per (graph, kind, d, variant)."""

    def __init__(self):
        self._store: dict = {}

    def get(self, key, build):
        if key not in self._store:
            if len(self._store) > 16:
                self._store.clear()
            self._store[key] = build()
        return self._store[key]


TABLE_CACHE = _TableCache()


class Instance:
    def __init__(
        self,
        name: str,
        graph: Graph,
        spec: ProblemSpec,
        raw: RawDecomposition | None = None,
        paper_literal: bool = False,
        cache: _TableCache | None = None,
    ):
        self.name = name
        self.graph = graph
        self.spec = spec
        self.raw = raw
        self.paper_literal = paper_literal
        self.cache = cache

    def __str__(self):
        return f"{self.name} {self.spec}"

    @cached_property
    def nd(self) -> NiceDecomposition:
        if self.cache is None or self.raw is not None:
            return nice_decomposition(self.graph, self.raw)
        key = ("nd", self.graph.vertices, self.graph.edge_list)
        return self.cache.get(key, lambda: nice_decomposition(self.graph))

    @cached_property
    def index(self):
        return designated_index(self.nd, self.graph)

    @cached_property
    def core(self):
        return make_core(self.spec, self.graph, self.paper_literal)

    @cached_property
    def tables(self) -> Tables:
        if self.cache is None or self.raw is not None:
            return run_tables(self.core, self.nd)
        s = self.spec
        key = ("tables", self.graph.vertices, self.graph.edge_list, s.kind, s.d, self.paper_literal)
        base = self.cache.get(key, lambda: run_tables(self.core, self.nd))
        finals = tuple(w for w in base.gamma[base.root] if self.core.final(w))
        return Tables(base.gamma, base.steps, base.root, finals)

    @cached_property
    def automaton(self) -> TShapedAutomaton:
        return build_automaton(self.core, self.nd, self.tables)

    @cached_property
    def system(self) -> LinearSystem:
        return build_system(self.automaton)

    @cached_property
    def oracle(self) -> frozenset[SolutionTuple]:
        return brute_force_solutions(self.graph, self.spec)

    @cached_property
    def unit_objective(self) -> dict[VarKey, Fraction]:
        return project_objective(self.nd, self.index, unit_weights(self.core), self.core)


# -- the checks ------------------------------------------------------------------


def check_language(inst: Instance, limit: int | None = 10**6) -> CheckResult:
    anchor = "language of the automaton = characteristic trees of the solutions"
    try:
        lang = enumerate_language(inst.automaton, limit)
    except Overflow as exc:
        return CheckResult("language", anchor, FAIL, {"overflow": str(exc)})
    want = {characteristic_tree(inst.nd, x, inst.core, inst.index): x for x in inst.oracle}
    extra = sorted(t.nonzero().items() for t in lang - set(want))
    missing = [solution_json(want[t]) for t in sorted(set(want) - lang, key=lambda t: t.labels)]
    failures = [{"accepted_not_solution": dict(e)} for e in extra] + [{"solution_not_accepted": m} for m in missing]
    return _result("language", anchor, failures, terms=len(lang), solutions=len(inst.oracle))


def random_objective(inst: Instance, rng: random.Random) -> dict[VarKey, Fraction]:
    return {
        k: Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        for k in inst.system.variables
    }


def check_lp(inst: Instance, rng: random.Random, objectives: int = 20) -> CheckResult:
    anchor = "every optimal vertex is 0/1 and the unit optimum is the combinatorial optimum"
    sys, a = inst.system, inst.automaton
    empty = not inst.oracle
    failures = []
    pivots = 0
    for i in range(objectives):
        obj = random_objective(inst, rng)
        sense = "max" if i % 2 == 0 else "min"
        try:
            res = optimize(sys, obj, sense)
        except Infeasible:
            if not empty:
                failures.append({"objective": i, "error": "infeasible although solutions exist"})
            continue
        pivots += res.pivots
        if empty:
            failures.append({"objective": i, "error": "feasible although no solution exists"})
        elif not res.vertex.is_integral():
            frac = sorted(k.name for k, v in res.vertex.entries.items() if v != 1)
            failures.append({"objective": i, "fractional": frac[:5]})
    sense = unit_sense(inst.spec)
    detail = {"random_objectives": objectives, "pivots": pivots, "sense": sense}
    try:
        res = optimize(sys, inst.unit_objective, sense)
    except Infeasible:
        if not empty:
            failures.append({"objective": "unit", "error": "infeasible although solutions exist"})
        detail["unit_optimum"] = None
        return _result("lp", anchor, failures, **detail)
    if empty:
        failures.append({"objective": "unit", "error": "feasible although no solution exists"})
        return _result("lp", anchor, failures, **detail)
    sizes = [x.size() for x in inst.oracle]
    best = min(sizes) if sense == "min" else max(sizes)
    detail.update(unit_optimum=str(res.value), combinatorial_optimum=best)
    if res.value != best:
        failures.append({"objective": "unit", "lp": str(res.value), "oracle": best})
    if not res.vertex.is_integral():
        failures.append({"objective": "unit", "error": "fractional vertex"})
    else:
        term, _ = integral_to_trace(a, sys, res.vertex)
        decoded = decode_term(inst, term)
        detail["decoded"] = solution_json(decoded)
        if decoded not in inst.oracle or decoded.size() != best:
            failures.append({"objective": "unit", "decoded_not_optimal": solution_json(decoded)})
    return _result("lp", anchor, failures, **detail)


def decode_term(inst: Instance, term) -> SolutionTuple:
    core, idx = inst.core, inst.index
    d1, d2 = core.arity
    bits = {u: core.decode_symbol(s) for u, s in enumerate(term.labels)}
    vs = tuple(frozenset(v for v, u in idx.nu.items() if bits[u][i]) for i in range(d1))
    es = tuple(frozenset(e for e, u in idx.eps.items() if bits[u][d1 + j]) for j in range(d2))
    return SolutionTuple(vs, es)


def _sample_traces(inst: Instance, rng: random.Random, count: int):
    a = inst.automaton
    out = []
    for _ in range(count):
        got = random_accepting_trace(a, rng)
        if got is None:
            break
        out.append(got)
    return out


def check_traces(inst: Instance, rng: random.Random, count: int = 100) -> CheckResult:
    anchor = "trace vectors satisfy every row and sum to one per node"
    a, sys = inst.automaton, inst.system
    failures = []
    traces = _sample_traces(inst, rng, count)
    for term, trace in traces:
        v = trace_vector(a, term, trace)
        bad = check_feasible(sys, v)
        if bad:
            failures.append({"trace": list(trace.states), "violation": str(bad[0])})
            continue
        sums = node_sums(a, v)
        for u, s in enumerate(sums):
            if s != (1, 1, 1):
                failures.append({"trace": list(trace.states), "node": u, "sums": [str(x) for x in s]})
                break
    return _result("traces", anchor, failures, sampled=len(traces))


def check_decomposition(inst: Instance, rng: random.Random, count: int = 100, parts: int = 5) -> CheckResult:
    anchor = "feasible points split exactly into accepting-trace vectors"
    a, sys = inst.automaton, inst.system
    failures = []
    done = 0
    pool = _sample_traces(inst, rng, count)
    if not pool:
        return _result("decomposition", anchor, [], sampled=0)
    vectors = [trace_vector(a, term, trace) for term, trace in pool]
    for _ in range(count):
        k = rng.randint(1, parts)
        picks = [rng.randrange(len(pool)) for _ in range(k)]
        chosen = [pool[i] for i in picks]
        raw = [Fraction(rng.randint(1, 9)) for _ in chosen]
        total = sum(raw)
        v = None
        for i, w in zip(picks, raw):
            piece = vectors[i].scale(w / total)
            v = piece if v is None else v + piece
        dec = decompose(a, sys, v)
        done += 1
        weights = [w for w, _, _ in dec.parts]
        problems = []
        if any(w <= 0 for w in weights) or sum(weights) != 1:
            problems.append("weights")
        if dec.reconstruct(a) != v:
            problems.append("reconstruction")
        if not all(a.is_accepting(t, tr) for _, t, tr in dec.parts):
            problems.append("non-accepting part")
        if dec.iterations > len(v.support):
            problems.append("iterations")
        if problems:
            failures.append({"traces": [list(tr.states) for _, tr in chosen], "problems": problems})
    return _result("decomposition", anchor, failures, sampled=done)


def check_sizes(inst: Instance) -> CheckResult:
    anchor = "variable/row counts, width and table ceilings"
    a, sys, t = inst.automaton, inst.system, inst.tables
    nv, ne = expected_sizes(a)
    failures = []
    if len(sys.variables) != nv:
        failures.append({"variables": len(sys.variables), "expected": nv})
    if sys.num_equalities != ne:
        failures.append({"equalities": sys.num_equalities, "expected": ne})
    if a.width != t.max_table_size:
        failures.append({"width": a.width, "max_table": t.max_table_size})
    ceiling = table_ceiling(inst.spec, inst.nd.width, inst.graph)
    if ceiling is not None and t.max_table_size > ceiling:
        failures.append({"max_table": t.max_table_size, "ceiling": ceiling})
    return _result(
        "sizes", anchor, failures,
        variables=nv, equalities=ne, width=a.width, ceiling=ceiling, decomposition_width=inst.nd.width,
    )


def check_preservation(inst: Instance, limit: int | None = 10**6) -> CheckResult:
    anchor = "witness trees extract exactly the solutions"
    rep = check_solution_preserving(
        inst.core, inst.nd, inst.graph, inst.spec, limit, tables=inst.tables, oracle=inst.oracle
    )
    failures = []
    if not rep.ok:
        failures.append(rep.to_json())
    return _result("preservation", anchor, failures, witness_trees=rep.witness_trees, solutions=rep.solutions)


def check_round_trips(inst: Instance, rng: random.Random, count: int = 100) -> CheckResult:
    anchor = "vector/trace and LP text round trips"
    a, sys = inst.automaton, inst.system
    failures = []
    for term, trace in _sample_traces(inst, rng, count):
        back = integral_to_trace(a, sys, trace_vector(a, term, trace))
        if back != (term, trace):
            failures.append({"trace": list(trace.states), "back": list(back[1].states)})
    text = emit_lp(sys, inst.unit_objective, unit_sense(inst.spec))
    sys2, obj2, sense2 = parse_lp(text)
    if emit_lp(sys2, obj2, sense2) != text:
        failures.append({"lp": "emit-parse-emit differs"})
    if sys2 != sys:
        failures.append({"lp": "parsed system differs"})
    js = emit_jsonl(sys)
    if parse_jsonl(js) != sys:
        failures.append({"jsonl": "parsed system differs"})
    return _result("round_trips", anchor, failures, lp_bytes=len(text))


def run_all(inst: Instance, seed: int, objectives: int = 20, samples: int = 100) -> list[CheckResult]:
    rng = random.Random(seed)
    return [
        check_language(inst),
        check_lp(inst, rng, objectives),
        check_traces(inst, rng, samples),
        check_decomposition(inst, rng, samples),
        check_sizes(inst),
        check_preservation(inst),
        check_round_trips(inst, rng, samples),
    ]
