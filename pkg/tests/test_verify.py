import itertools
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from tdxf.automaton import accepts_term, build_automaton, characteristic_tree
from tdxf.cores import make_core, run_tables
from tdxf.decomposition import RawDecomposition, make_nice
from tdxf.formulation import RationalVector, build_system, trace_vector
from tdxf.graphs import ProblemSpec, SolutionTuple, complete_graph, path_graph
from tdxf.simplex import Infeasible, solve
from tdxf.verify import (
    NotFeasible,
    check_feasible,
    decompose,
    extract_integral_subsolution,
    integral_to_trace,
    node_sums,
    optimize,
)

P3_RAW = RawDecomposition({1: frozenset({1, 2}), 2: frozenset({2, 3})}, ((1, 2),))


def p3(ell=1):
    g = path_graph(3)
    nd = make_nice(g, P3_RAW)
    core = make_core(ProblemSpec("is", ell), g)
    a = build_automaton(core, nd, run_tables(core, nd))
    return nd, core, a, build_system(a)


def rho(nd, core, a, vertices):
    term = characteristic_tree(nd, SolutionTuple.of_vertices(vertices), core)
    return term, accepts_term(a, term), trace_vector(a, term, accepts_term(a, term))


def test_trace_vector_is_feasible():
    nd, core, a, sys = p3()
    _, _, v = rho(nd, core, a, {1, 3})
    assert check_feasible(sys, v) == []
    assert all(s == (1, 1, 1) for s in node_sums(a, v))


def test_zero_vector_breaks_root_row():
    _, _, _, sys = p3()
    found = check_feasible(sys, RationalVector(sys.variables, {}))
    assert found and any(v.family == 3 for v in found)


def test_half_combination_is_feasible():
    nd, core, a, sys = p3()
    v = rho(nd, core, a, {1})[2].scale(Fraction(1, 2)) + rho(nd, core, a, {3})[2].scale(Fraction(1, 2))
    assert check_feasible(sys, v) == []
    assert not v.is_integral()


def test_integral_round_trip():
    nd, core, a, sys = p3()
    term, trace, v = rho(nd, core, a, {2})
    assert integral_to_trace(a, sys, v) == (term, trace)


def test_integral_to_trace_rejects_infeasible():
    nd, core, a, sys = p3()
    v = rho(nd, core, a, {2})[2]
    # drop one designated label; the node sum at that node no longer balances
    broken = RationalVector(sys.variables, {k: x for k, x in v.entries.items() if k.kind != "x"})
    with pytest.raises(NotFeasible):
        integral_to_trace(a, sys, broken)


def test_extract_from_half_point():
    nd, core, a, sys = p3()
    r1, r2 = rho(nd, core, a, {1})[2], rho(nd, core, a, {1, 3})[2]
    v = r1.scale(Fraction(1, 2)) + r2.scale(Fraction(1, 2))
    assert extract_integral_subsolution(a, sys, v) in (r1, r2)


def test_decompose_single_trace():
    nd, core, a, sys = p3()
    term, trace, v = rho(nd, core, a, {3})
    d = decompose(a, sys, v)
    assert d.parts == [(1, term, trace)] and d.iterations == 1


def test_decompose_half_half():
    nd, core, a, sys = p3()
    r1, r2 = rho(nd, core, a, {1}), rho(nd, core, a, {2})
    v = r1[2].scale(Fraction(1, 2)) + r2[2].scale(Fraction(1, 2))
    d = decompose(a, sys, v)
    assert sorted(w for w, _, _ in d.parts) == [Fraction(1, 2)] * 2
    assert {t for _, t, _ in d.parts} == {r1[0], r2[0]}
    assert d.reconstruct(a) == v


def test_optimize_p3_unit():
    from tdxf.checks import Instance, decode_term

    inst = Instance("p3", path_graph(3), ProblemSpec("is", 1), raw=P3_RAW)
    res = optimize(inst.system, inst.unit_objective, "max")
    assert res.value == 2 and res.vertex.is_integral()
    term, _ = integral_to_trace(inst.automaton, inst.system, res.vertex)
    assert decode_term(inst, term) == SolutionTuple.of_vertices({1, 3})


def test_optimize_k2_unit():
    from tdxf.checks import Instance

    inst = Instance("k2", complete_graph(2), ProblemSpec("is", 1))
    assert optimize(inst.system, inst.unit_objective, "max").value == 1


def test_zero_objective_vertex_is_integral():
    _, _, a, sys = p3()
    res = optimize(sys, {}, "min")
    assert res.value == 0 and res.vertex.is_integral()
    assert check_feasible(sys, res.vertex) == []


# -- simplex against exhaustive vertex enumeration ---------------------------------


def _rank(rows, n):
    m = [[Fraction(r.get(j, 0)) for j in range(n)] for r in rows]
    rank = 0
    for c in range(n):
        p = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[rank], m[p] = m[p], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                f = m[i][c] / m[rank][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def _solve_square(a, b):
    """Gauss-Jordan over Fractions; None when singular."""
    k = len(b)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for c in range(k):
        p = next((i for i in range(c, k) if m[i][c]), None)
        if p is None:
            return None
        m[c], m[p] = m[p], m[c]
        for i in range(k):
            if i != c and m[i][c]:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [m[i][k] / m[i][i] for i in range(k)]


def brute_vertices(rows, rhs, n, hi):
    """Every basic feasible point of A x = b, 0 <= x <= hi (full row rank)."""
    m = len(rows)
    out = []
    for basis in itertools.combinations(range(n), m):
        rest = [j for j in range(n) if j not in basis]
        for at_top in itertools.product((False, True), repeat=len(rest)):
            x = [Fraction(0)] * n
            for j, top in zip(rest, at_top):
                x[j] = Fraction(hi[j]) if top else Fraction(0)
            b = [Fraction(rhs[i]) - sum(Fraction(rows[i].get(j, 0)) * x[j] for j in rest) for i in range(m)]
            sol = _solve_square([[Fraction(rows[i].get(j, 0)) for j in basis] for i in range(m)], b)
            if sol is None:
                continue
            for j, s in zip(basis, sol):
                x[j] = s
            if all(0 <= x[j] <= hi[j] for j in range(n)):
                out.append(x)
    return out


@st.composite
def small_lps(draw):
    n = draw(st.integers(2, 5))
    m = draw(st.integers(1, min(3, n - 1)))
    coef = st.integers(-3, 3)
    rows = [{j: c for j in range(n) if (c := draw(coef))} for _ in range(m)]
    # the right-hand side comes from a box point, so most draws are feasible
    hi = [draw(st.integers(1, 3)) for _ in range(n)]
    if draw(st.booleans()):
        pt = [Fraction(draw(st.integers(0, 2 * h)), 2) for h in hi]
        rhs = [sum(c * pt[j] for j, c in r.items()) for r in rows]
    else:
        rhs = [Fraction(draw(st.integers(-4, 4))) for _ in rows]
    cost = {j: Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4))) for j in range(n)}
    return rows, rhs, cost, n, hi


@settings(max_examples=150, deadline=None)
@given(small_lps(), st.sampled_from(["min", "max"]), st.booleans())
def test_simplex_matches_vertex_enumeration(lp, sense, reduce):
    rows, rhs, cost, n, hi = lp
    assume(_rank(rows, n) == len(rows))
    pts = brute_vertices(rows, rhs, n, hi)
    value = lambda x: sum(c * x[j] for j, c in cost.items())
    if not pts:
        with pytest.raises(Infeasible):
            solve(rows, rhs, cost, n, None, hi, sense, reduce=reduce)
        return
    best = (min if sense == "min" else max)(value(x) for x in pts)
    res = solve(rows, rhs, cost, n, None, hi, sense, reduce=reduce)
    assert res.value == best
    x = res.values
    assert all(0 <= x[j] <= hi[j] for j in range(n))
    assert all(sum(c * x[j] for j, c in r.items()) == b for r, b in zip(rows, rhs))
    assert value(x) == best


def test_simplex_infeasible_example():
    with pytest.raises(Infeasible):
        solve([{0: 1, 1: 1}], [3], {0: 1}, 2)


def test_simplex_unbounded_column_above():
    res = solve([{0: 1, 1: -1}], [0], {0: 1}, 2, None, [None, 5], "max")
    assert res.value == 5 and res.values == [5, 5]
