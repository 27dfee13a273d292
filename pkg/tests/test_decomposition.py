import dataclasses
import random

import pytest
from hypothesis import given, settings, strategies as st

from tdxf.decomposition import (
    DecompositionFormatError,
    NodeKind,
    RawDecomposition,
    build_heuristic_td,
    decomposition_from_order,
    designated_index,
    make_nice,
    nice_decomposition,
    parse_ntd,
    parse_td,
    validate_nice,
    validate_raw,
    write_ntd,
    write_td,
)
from tdxf.graphs import Graph, complete_graph, empty_graph, path_graph

from .test_graphs import small_graphs

P3_RAW = RawDecomposition({1: frozenset({1, 2}), 2: frozenset({2, 3})}, ((1, 2),))


def p3_nice():
    return make_nice(path_graph(3), P3_RAW)


def test_one_bag_k3():
    raw = RawDecomposition({1: frozenset({1, 2, 3})}, ())
    assert validate_raw(complete_graph(3), raw) == []
    assert raw.width == 2


def test_p3_path_decomposition_width_one():
    assert validate_raw(path_graph(3), P3_RAW) == []
    assert P3_RAW.width == 1


def test_bag_with_unknown_vertex_rejected():
    with pytest.raises(DecompositionFormatError, match="unknown vertex 9"):
        parse_td("s td 1 2 3\nb 1 1 9\n", path_graph(3))


def test_disconnected_occurrences_rejected():
    raw = RawDecomposition(
        {1: frozenset({1, 2}), 2: frozenset({2, 3}), 3: frozenset({1})}, ((1, 2), (2, 3))
    )
    problems = validate_raw(path_graph(3), raw)
    assert any("connectivity" in p for p in problems)


def test_min_fill_widths():
    assert build_heuristic_td(path_graph(3)).width == 1
    assert build_heuristic_td(complete_graph(4)).width == 3
    one = build_heuristic_td(Graph.from_pairs(1, []))
    assert one.width == 0 and list(one.bags.values()) == [frozenset({1})]


def test_p3_running_example_chain():
    nd = p3_nice()
    assert [str(k) for k in nd.kinds] == [
        "Leaf", "IntroVertex(1)", "IntroVertex(2)", "IntroEdge(1)", "ForgetVertex(1)",
        "IntroVertex(3)", "IntroEdge(2)", "ForgetVertex(2)", "ForgetVertex(3)",
    ]
    assert nd.width == 1 and nd.root == 8
    assert validate_nice(path_graph(3), nd) == []


def test_k2_chain_and_designated_nodes():
    g = complete_graph(2)
    nd = make_nice(g, RawDecomposition({1: frozenset({1, 2})}, ()))
    assert [str(k) for k in nd.kinds] == [
        "Leaf", "IntroVertex(1)", "IntroVertex(2)", "IntroEdge(1)", "ForgetVertex(1)", "ForgetVertex(2)",
    ]
    idx = designated_index(nd, g)
    assert idx.nu == {1: 3, 2: 4}
    assert idx.eps == {1: 3}


def test_p3_designated_nodes():
    idx = designated_index(p3_nice(), path_graph(3))
    assert idx.nu == {1: 3, 2: 6, 3: 7}
    assert idx.eps == {1: 3, 2: 6}


def test_empty_graph_single_leaf():
    nd = nice_decomposition(empty_graph())
    assert nd.size == 1 and nd.kinds[0] == NodeKind("leaf")
    idx = designated_index(nd)
    assert idx.nu == {} and idx.eps == {}


def test_corrupt_xi_reports_condition_two():
    g = path_graph(3)
    nd = p3_nice()
    # node 2 holds {1,2}, not vertex 3
    bad = dataclasses.replace(nd, xi={1: 3, 2: 2})
    found = validate_nice(g, bad)
    assert any(v.condition == "condition-2" and "edge 2" in v.message for v in found)


def test_corrupt_root_bag():
    g = path_graph(3)
    nd = p3_nice()
    bags = list(nd.bags)
    bags[nd.root] = frozenset({3})
    found = validate_nice(g, dataclasses.replace(nd, bags=tuple(bags)))
    assert any(v.condition == "empty-root" for v in found)


def test_corrupt_leaf_and_forget():
    g = path_graph(3)
    nd = p3_nice()
    kinds = list(nd.kinds)
    kinds[4] = NodeKind("forget", 2)
    found = validate_nice(g, dataclasses.replace(nd, kinds=tuple(kinds)))
    assert any(v.condition == "forget-vertex" for v in found)
    bags = list(nd.bags)
    bags[0] = frozenset({1})
    found = validate_nice(g, dataclasses.replace(nd, bags=tuple(bags)))
    assert any(v.condition == "empty-leaf" for v in found)


def test_td_round_trip():
    g = complete_graph(5)
    raw = build_heuristic_td(g)
    assert parse_td(write_td(raw, g), g) == raw


def test_ntd_round_trip():
    g = path_graph(3)
    nd = p3_nice()
    text = write_ntd(nd, g)
    back = parse_ntd(text)
    assert back == nd
    assert write_ntd(back, g) == text


def _random_raw(g: Graph, rng: random.Random) -> RawDecomposition:
    """An elimination-order decomposition with extra duplicated bags hung on
    random nodes, so that nodes get several children and joins appear."""
    order = list(g.vertices)
    rng.shuffle(order)
    raw = decomposition_from_order(g, order)
    bags = dict(raw.bags)
    edges = list(raw.tree_edges)
    for _ in range(rng.randint(0, 4)):
        host = rng.choice(sorted(bags))
        new = max(bags) + 1
        keep = [v for v in bags[host] if rng.random() < 0.7]
        bags[new] = frozenset(keep)
        edges.append((host, new))
    # relabel so the root is not always the same bag
    ids = sorted(bags)
    perm = ids[:]
    rng.shuffle(perm)
    ren = dict(zip(ids, perm))
    return RawDecomposition({ren[t]: b for t, b in bags.items()}, tuple((ren[a], ren[b]) for a, b in edges))


@settings(max_examples=80, deadline=None)
@given(small_graphs(max_n=7), st.integers(0, 2**32 - 1))
def test_random_raw_decompositions_become_nice(g, seed):
    raw = _random_raw(g, random.Random(seed))
    assert validate_raw(g, raw) == []
    nd = make_nice(g, raw)
    assert validate_nice(g, nd) == []
    assert nd.width == raw.width
    idx = designated_index(nd, g)
    assert sorted(idx.nu) == list(g.vertices)
    assert sorted(idx.eps) == list(g.edges)


@settings(max_examples=60, deadline=None)
@given(small_graphs(max_n=8))
def test_heuristic_decomposition_nice_and_serialisable(g):
    nd = nice_decomposition(g)
    assert validate_nice(g, nd) == []
    assert parse_ntd(write_ntd(nd, g)) == nd


def test_joins_are_binary():
    # star with a centre bag and three leaf bags forces a join chain
    g = Graph.from_pairs(4, [(1, 2), (1, 3), (1, 4)])
    raw = RawDecomposition(
        {1: frozenset({1, 2}), 2: frozenset({1, 3}), 3: frozenset({1, 4}), 4: frozenset({1})},
        ((4, 1), (4, 2), (4, 3)),
    )
    nd = make_nice(g, raw)
    joins = [u for u in nd.tree.nodes if nd.kinds[u].op == "join"]
    assert len(joins) == 2
    assert all(len(nd.children(u)) == 2 for u in joins)
    assert validate_nice(g, nd) == []
