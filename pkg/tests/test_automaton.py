import random

import pytest
from hypothesis import given, settings, strategies as st

from tdxf.automaton import (
    Term,
    accepts_term,
    automaton_width,
    build_automaton,
    characteristic_tree,
    enumerate_language,
    random_accepting_trace,
)
from tdxf.cores import Overflow, make_core, run_tables
from tdxf.cores.independent_set import encode
from tdxf.decomposition import RawDecomposition, make_nice, nice_decomposition
from tdxf.graphs import ProblemSpec, SolutionTuple, brute_force_solutions, complete_graph, empty_graph, path_graph

from .test_graphs import small_graphs

P3_RAW = RawDecomposition({1: frozenset({1, 2}), 2: frozenset({2, 3})}, ((1, 2),))


def p3_automaton(ell=1):
    g = path_graph(3)
    nd = make_nice(g, P3_RAW)
    core = make_core(ProblemSpec("is", ell), g)
    t = run_tables(core, nd)
    return nd, core, t, build_automaton(core, nd, t)


def test_p3_sizes():
    _, _, t, a = p3_automaton()
    assert a.num_states == 31
    assert automaton_width(a) == 6 == t.max_table_size


def test_characteristic_tree_of_p3_solution():
    nd, core, _, _ = p3_automaton()
    term = characteristic_tree(nd, SolutionTuple.of_vertices({1, 3}), core)
    assert term.nonzero() == {3: 1, 7: 1}
    assert characteristic_tree(nd, SolutionTuple.of_vertices(()), core).nonzero() == {}


def test_characteristic_tree_cut_on_k2():
    g = complete_graph(2)
    nd = make_nice(g, RawDecomposition({1: frozenset({1, 2})}, ()))
    core = make_core(ProblemSpec("cut", 1), g)
    assert characteristic_tree(nd, SolutionTuple.of_edges({1}), core).nonzero() == {3: 1}


def test_designated_symbol_on_forgotten_vertex():
    nd, core, t, a = p3_automaton()
    # every transition into state ({1},1) at node 3 reads symbol 1
    q = a.cells[3].index(encode({1}, 1))
    syms = {tr.symbol for tr in a.delta[3] if tr.cnq == q}
    assert syms == {1}


def test_trace_of_p3_solution():
    nd, core, _, a = p3_automaton()
    term = characteristic_tree(nd, SolutionTuple.of_vertices({1, 3}), core)
    trace = accepts_term(a, term)
    assert trace is not None and a.is_accepting(term, trace)
    assert a.cells[3][trace.states[3]] == encode({1}, 1)
    assert a.cells[6][trace.states[6]] == encode({3}, 2)
    assert a.cells[7][trace.states[7]] == encode({3}, 2)


def test_non_solution_rejected():
    nd, core, _, a = p3_automaton()
    assert accepts_term(a, characteristic_tree(nd, SolutionTuple.of_vertices({1, 2}), core)) is None


def test_zero_term_accepted_at_threshold_zero():
    nd, core, _, a = p3_automaton(0)
    assert accepts_term(a, Term((0,) * nd.size)) is not None


def test_language_p3():
    nd, core, _, a = p3_automaton(1)
    sols = brute_force_solutions(path_graph(3), ProblemSpec("is", 1))
    assert enumerate_language(a) == {characteristic_tree(nd, x, core) for x in sols}
    assert len(enumerate_language(a)) == 4
    assert enumerate_language(p3_automaton(3)[3]) == set()


def test_language_limit():
    a = p3_automaton(1)[3]
    with pytest.raises(Overflow):
        enumerate_language(a, limit=0)


def test_empty_graph_automaton():
    g = empty_graph()
    nd = nice_decomposition(g)
    core = make_core(ProblemSpec("is", 0), g)
    t = run_tables(core, nd)
    a = build_automaton(core, nd, t)
    assert a.tree.size == 1 and a.num_states == len(core.leaf())
    assert all(tr.ants == () for tr in a.delta[0])
    assert automaton_width(a) == len(core.leaf())


def test_wrong_shape_term():
    a = p3_automaton()[3]
    with pytest.raises(ValueError):
        accepts_term(a, Term((0, 0)))


SPECS = [ProblemSpec("is", 1), ProblemSpec("ds", 2), ProblemSpec("cut", 2), ProblemSpec("hc"), ProblemSpec("coloring", d=3)]


@settings(max_examples=50, deadline=None)
@given(small_graphs(max_n=6), st.sampled_from(SPECS))
def test_language_equals_characteristic_trees(g, spec):
    nd = nice_decomposition(g)
    core = make_core(spec, g)
    a = build_automaton(core, nd, run_tables(core, nd))
    want = {characteristic_tree(nd, x, core) for x in brute_force_solutions(g, spec)}
    assert enumerate_language(a) == want


@settings(max_examples=30, deadline=None)
@given(small_graphs(max_n=6), st.sampled_from(SPECS), st.integers(0, 1000))
def test_random_traces_are_accepting(g, spec, seed):
    nd = nice_decomposition(g)
    core = make_core(spec, g)
    a = build_automaton(core, nd, run_tables(core, nd))
    rng = random.Random(seed)
    got = random_accepting_trace(a, rng)
    if got is None:
        assert not brute_force_solutions(g, spec)
        return
    term, trace = got
    assert a.is_accepting(term, trace)
    assert accepts_term(a, term) is not None
