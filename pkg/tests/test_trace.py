import pytest
from hypothesis import given, strategies as st

from cycid.grammar import parse_formula
from cycid.library import read_corpus, standard_env
from cycid.proofs import as_graph, parse_proof
from cycid.trace import (
    Progressing, PropertyViolated, SourceTargetMismatch, TraceGraph, Violation,
    analyze_trace, check_progress, compose, default_graph_fn, edge_trace_graph,
    identity_graph, naive_progress_oracle, trace_along,
)

import smallproofs

ENV = standard_env()
PROGRESSING = ["m_sub_n.proof", "functoriality_e_n.proof", "ind_from_n.proof"]
ATOMS = [parse_formula(t, ENV) for t in ("E(x)", "N(x)", "O(x)", "=(x,0)")]


def load(name):
    return as_graph(parse_proof(read_corpus(name), ENV))


edge_sets = st.frozensets(st.tuples(st.sampled_from(ATOMS), st.sampled_from(ATOMS), st.booleans()),
                          max_size=6)


def graph(src, dst, edges):
    # keep one flag per pair, as the checker does
    best = {}
    for a, b, p in edges:
        best[(a, b)] = best.get((a, b), False) or p
    return TraceGraph(src, dst, frozenset((a, b, p) for (a, b), p in best.items()))


@given(edge_sets, edge_sets, edge_sets)
def test_composition_is_associative(e1, e2, e3):
    f, g, h = graph("a", "b", e1), graph("b", "c", e2), graph("c", "d", e3)
    assert compose(compose(f, g), h) == compose(f, compose(g, h))


@given(edge_sets)
def test_identity_graphs_are_units(e):
    g = graph("a", "b", e)
    assert compose(identity_graph("a", ATOMS), g) == g
    assert compose(g, identity_graph("b", ATOMS)) == g


def test_composition_checks_endpoints():
    with pytest.raises(SourceTargetMismatch):
        compose(graph("a", "b", ()), graph("c", "d", ()))


def test_composition_example():
    E, N, O, Z = ATOMS
    g = compose(graph("a", "b", {(E, N, False), (E, O, True)}), graph("b", "c", {(N, Z, False), (O, Z, False)}))
    assert g.edges == {(E, Z, True)}


@pytest.mark.parametrize("name", PROGRESSING)
def test_corpus_progresses_and_oracle_agrees(name):
    p = load(name)
    v = check_progress(p)
    assert isinstance(v, Progressing) and v.witnesses
    assert isinstance(naive_progress_oracle(p), Progressing)


@pytest.mark.parametrize("name", PROGRESSING)
def test_witnesses_are_progressing_cycles(name):
    p = load(name)
    for w in check_progress(p).witnesses:
        assert w.formulas[0] == w.formulas[-1] and any(w.progress)
        assert w.path[0][0] == w.path[-1][2]
        for (u, i, v), a, b, flag in zip(w.path, w.formulas, w.formulas[1:], w.progress):
            assert (a, b, flag) in default_graph_fn(p, u, i, v).edges


def test_example_m_cycle():
    v = check_progress(load("m_sub_n.proof"))
    w = v.witnesses[0]
    assert len(w.path) == 9
    a = analyze_trace(load("m_sub_n.proof"), w)
    assert a.pred == ENV["M"] and a.maximal


def test_loop_without_unfolding_is_a_violation():
    p = load("e1_loop.proof")
    v = check_progress(p)
    assert isinstance(v, Violation)
    assert set(v.cycle_nodes) == {"n0", "n1", "n2"}
    assert v.stem == [] or v.stem[0][0] == p.root
    assert isinstance(naive_progress_oracle(p), Violation)


@pytest.mark.parametrize("name", PROGRESSING)
def test_removing_progress_flags_flips_the_verdict(name):
    def flat(p, u, i, v):
        g = default_graph_fn(p, u, i, v)
        return TraceGraph(g.source, g.target, frozenset((a, b, False) for a, b, _ in g.edges))

    p = load(name)
    assert isinstance(check_progress(p, flat), Violation)
    assert isinstance(naive_progress_oracle(p, graph_fn=flat), Violation)


def test_bounded_oracle_is_weaker():
    p = load("m_sub_n.proof")
    # cycles shorter than the loop cannot reveal anything
    assert isinstance(naive_progress_oracle(p, max_cycle_len=3), Progressing)


def test_trace_along():
    E, N, _, _ = ATOMS
    gs = [graph("a", "b", {(E, N, True)}), graph("b", "a", {(N, E, False)})]
    assert trace_along(gs, E) == ((E, N, E), (True, False))
    assert trace_along(gs, N) is None


def test_edge_graph_of_left_unfolding():
    p = load("e1_loop.proof")
    g = edge_trace_graph(p.step("n3"), 0)
    E1 = parse_formula("E(1)", ENV)
    assert g.edges == {(E1, ENV["E"].unfold(parse_formula("=(1,1)").left), True)}


def test_analysis_rejects_traces_without_unfolding():
    E, N, _, _ = ATOMS
    from cycid.trace import TraceWitness
    w = TraceWitness((("n0", 0, "n1"),), (E, E), (True,))
    with pytest.raises(PropertyViolated):
        analyze_trace(load("e1_loop.proof"), w)


def test_small_proofs_agree_with_oracle():
    n = 0
    for p in smallproofs.enumerate_proofs(3):
        n += 1
        a = check_progress(p, smallproofs.cached_graph_fn).progressing
        b = naive_progress_oracle(p, graph_fn=smallproofs.cached_graph_fn).progressing
        assert a == b, p.nodes
    assert n > 1000


def test_unfolding_treated_as_weakening_loses_progress():
    # give the left unfolding of M the trace graph a weakening would have
    p = load("m_sub_n.proof")

    def weakened(q, u, i, v):
        g = default_graph_fn(q, u, i, v)
        if q.nodes[u].rule.tag != "idl":
            return g
        return TraceGraph(g.source, g.target, frozenset(e for e in g.edges if e[0] == e[1]))

    v = check_progress(p, weakened)
    assert isinstance(v, Violation) and "a0" in v.cycle_nodes
    assert isinstance(naive_progress_oracle(p, graph_fn=weakened), Violation)
