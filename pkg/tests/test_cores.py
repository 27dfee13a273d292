import pytest
from hypothesis import given, settings, strategies as st

from tdxf.cores import (
    IndependentSetCore,
    Overflow,
    check_solution_preserving,
    enumerate_witness_trees,
    extract_solution,
    make_core,
    run_tables,
    table_ceiling,
)
from tdxf.cores.base import Codec
from tdxf.cores.independent_set import decode, encode
from tdxf.decomposition import RawDecomposition, designated_index, make_nice, nice_decomposition
from tdxf.graphs import (
    Graph,
    ProblemSpec,
    SolutionTuple,
    brute_force_solutions,
    complete_graph,
    cycle_graph,
    empty_graph,
    path_graph,
)

from .test_graphs import small_graphs

P3_RAW = RawDecomposition({1: frozenset({1, 2}), 2: frozenset({2, 3})}, ((1, 2),))


def p3(spec):
    g = path_graph(3)
    nd = make_nice(g, P3_RAW)
    core = make_core(spec, g)
    return g, nd, core, run_tables(core, nd)


def test_p3_independent_set_tables():
    _, nd, core, t = p3(ProblemSpec("is", 1))
    assert t.sizes == [1, 2, 4, 3, 3, 6, 5, 4, 3]
    assert set(t.gamma[nd.root]) == {encode((), c) for c in (0, 1, 2)}
    assert t.max_table_size == 6 and t.sizes.index(6) == 5


@pytest.mark.parametrize("ell, accepted", [(0, True), (1, True), (2, True), (3, False)])
def test_p3_acceptance_by_threshold(ell, accepted):
    assert p3(ProblemSpec("is", ell))[3].accepted is accepted


def test_k2_threshold_two_rejected():
    g = complete_graph(2)
    nd = make_nice(g, RawDecomposition({1: frozenset({1, 2})}, ()))
    core = make_core(ProblemSpec("is", 2), g)
    t = run_tables(core, nd)
    assert set(t.gamma[nd.root]) == {encode((), 0), encode((), 1)}
    assert not t.accepted


def test_empty_graph_root_is_leaf():
    g = empty_graph()
    nd = nice_decomposition(g)
    core = make_core(ProblemSpec("is", 0), g)
    t = run_tables(core, nd)
    assert set(t.gamma[nd.root]) == core.leaf()
    assert t.accepted


def test_is_rule_examples():
    core = IndependentSetCore(path_graph(3), ProblemSpec("is"))
    assert core.intro_vertex(3, encode((), 0)) == {encode((), 0), encode({3}, 1)}
    assert core.intro_edge(1, 2, encode({1, 2}, 2)) == set()
    assert core.join(encode({1}, 1), encode({1}, 2)) == {encode({1}, 2)}


def test_witness_trees_p3_threshold_two():
    g, nd, core, t = p3(ProblemSpec("is", 2))
    trees = list(enumerate_witness_trees(core, nd, t))
    assert trees and all(w[nd.root] == encode((), 2) for w in trees)
    assert {extract_solution(core, nd, w) for w in trees} == {SolutionTuple.of_vertices({1, 3})}


def test_witness_trees_p3_threshold_one_match_oracle():
    g, nd, core, t = p3(ProblemSpec("is", 1))
    got = {extract_solution(core, nd, w) for w in enumerate_witness_trees(core, nd, t)}
    assert got == brute_force_solutions(g, ProblemSpec("is", 1))


def test_extract_from_hand_witness_tree():
    g, nd, core, _ = p3(ProblemSpec("is", 1))
    tree = {u: encode((), 0) for u in nd.tree.nodes}
    tree.update({3: encode({1}, 1), 6: encode({3}, 2), 7: encode({3}, 2)})
    assert extract_solution(core, nd, tree) == SolutionTuple.of_vertices({1, 3})
    blank = {u: encode((), 0) for u in nd.tree.nodes}
    assert extract_solution(core, nd, blank) == SolutionTuple.of_vertices(())


def test_cut_on_k2_extracts_edge():
    g = complete_graph(2)
    nd = make_nice(g, RawDecomposition({1: frozenset({1, 2})}, ()))
    spec = ProblemSpec("cut", 1)
    core = make_core(spec, g)
    t = run_tables(core, nd)
    got = {extract_solution(core, nd, w) for w in enumerate_witness_trees(core, nd, t)}
    assert got == {SolutionTuple.of_edges({1})}


def test_witness_tree_limit():
    g = cycle_graph(6)
    core = make_core(ProblemSpec("is", 0), g)
    nd = nice_decomposition(g)
    t = run_tables(core, nd)
    with pytest.raises(Overflow):
        list(enumerate_witness_trees(core, nd, t, limit=3))


SMALL = [path_graph(4), cycle_graph(5), complete_graph(4), complete_graph(5), Graph.from_pairs(5, [(1, 2), (2, 3), (3, 1), (3, 4), (4, 5)])]
SPECS = [
    ProblemSpec("is", 0), ProblemSpec("is", 2),
    ProblemSpec("ds", 1), ProblemSpec("ds", 2), ProblemSpec("ds", 5),
    ProblemSpec("cut", 1), ProblemSpec("cut", 3),
    ProblemSpec("hc"),
    ProblemSpec("coloring", d=2), ProblemSpec("coloring", d=3),
]


@pytest.mark.parametrize("spec", SPECS, ids=str)
@pytest.mark.parametrize("g", SMALL, ids=lambda g: f"n{g.n}m{g.m}")
def test_corrected_cores_preserve_solutions(g, spec):
    rep = check_solution_preserving(make_core(spec, g), nice_decomposition(g), g, spec)
    assert rep.ok, rep.to_json()


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_n=6), st.sampled_from(SPECS))
def test_acceptance_iff_solutions_exist(g, spec):
    core = make_core(spec, g)
    t = run_tables(core, nice_decomposition(g))
    assert t.accepted == bool(brute_force_solutions(g, spec))


@settings(max_examples=40, deadline=None)
@given(small_graphs(max_n=6), st.integers(0, 4))
def test_root_counters_record_independent_set_sizes(g, ell):
    # the root holds (empty, c) exactly for the sizes c of independent sets
    core = make_core(ProblemSpec("is", ell), g)
    t = run_tables(core, nice_decomposition(g))
    sizes = {len(x.vertex_sets[0]) for x in brute_force_solutions(g, ProblemSpec("is", 0))}
    assert {decode(w)[1] for w in t.gamma[t.root]} == sizes


def test_join_mutant_is_unsound_with_counterexample():
    # two branches sharing a selected vertex: without the correction its count doubles
    g = Graph.from_pairs(3, [(1, 2), (1, 3)])
    raw = RawDecomposition(
        {1: frozenset({1, 2}), 2: frozenset({1, 3}), 3: frozenset({1})}, ((3, 1), (3, 2))
    )
    nd = make_nice(g, raw)
    spec = ProblemSpec("is", 2)
    broken = IndependentSetCore(g, spec, join_correction=False)
    rep = check_solution_preserving(broken, nd, g, spec)
    assert not rep.sound
    assert rep.unsound_example is not None and len(rep.unsound_example.vertex_sets[0]) < 2
    assert check_solution_preserving(IndependentSetCore(g, spec), nd, g, spec).ok


def _first_failure(kind, graphs, specs):
    for g in graphs:
        for spec in specs:
            rep = check_solution_preserving(
                make_core(spec, g, paper_literal=True), nice_decomposition(g), g, spec
            )
            if not rep.ok:
                return rep
    return None


def test_literal_dominating_set_fails():
    rep = _first_failure("ds", SMALL, [ProblemSpec("ds", l) for l in range(1, 6)])
    assert rep is not None
    assert rep.unsound_example is not None or rep.missing_example is not None


def test_literal_hamiltonian_cycle_fails():
    rep = _first_failure("hc", SMALL, [ProblemSpec("hc")])
    assert rep is not None
    assert rep.unsound_example is not None or rep.missing_example is not None


witness_sets = st.frozensets(
    st.tuples(st.frozensets(st.integers(1, 6), max_size=4), st.integers(0, 6)), max_size=6
)


@settings(max_examples=60, deadline=None)
@given(witness_sets, witness_sets, st.integers(1, 6), st.integers(1, 6))
def test_set_extension_is_union_of_pointwise_results(a, b, v, v2):
    g = complete_graph(6)
    core = make_core(ProblemSpec("is", 1), g)
    ws1 = [encode(s, c) for s, c in a]
    ws2 = [encode(s, c) for s, c in b]
    assert core.apply_intro_vertex(v, ws1) == set().union(*(core.intro_vertex(v, w) for w in ws1))
    assert core.apply_forget_vertex(v, ws1) == set().union(*(core.forget_vertex(v, w) for w in ws1))
    if v != v2:
        assert core.apply_intro_edge(v, v2, ws1) == set().union(*(core.intro_edge(v, v2, w) for w in ws1))
    assert core.apply_join(ws1, ws2) == set().union(*(core.join(x, y) for x in ws1 for y in ws2))


@settings(max_examples=60, deadline=None)
@given(st.frozensets(st.integers(0, 300), max_size=8), st.integers(-5, 2**20), st.booleans(),
       st.frozensets(st.tuples(st.integers(0, 50), st.integers(51, 99)), max_size=5))
def test_codec_round_trip(s, c, bit, pairs):
    codec = Codec("set", "int", "bit", "pairs")
    w = codec.encode(s, c, bit, pairs)
    assert codec.decode(w) == (s, c, int(bit), pairs)
    assert codec.encode(*codec.decode(w)) == w


@pytest.mark.parametrize("spec", [ProblemSpec("is", 1), ProblemSpec("ds", 3), ProblemSpec("coloring", d=3), ProblemSpec("cut", 1)], ids=str)
@pytest.mark.parametrize("g", SMALL, ids=lambda g: f"n{g.n}m{g.m}")
def test_tables_within_ceiling(g, spec):
    nd = nice_decomposition(g)
    t = run_tables(make_core(spec, g), nd)
    assert t.max_table_size <= table_ceiling(spec, nd.width, g)
