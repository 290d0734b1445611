import pytest
from hypothesis import given, strategies as st

from cycid.grammar import parse_decls, parse_formula
from cycid.library import read_corpus, standard_env
from cycid.proofs import as_graph, check_proof, parse_proof
from cycid.semantics import (
    LawViolated, Model, RootNotFalse, UnassignedVariable, Universe,
    cantor_pair, cantor_unpair, closure_profile, countermodel_walk, fixpoint_laws,
    gfp_brute_force, pairing_formula,
)
from cycid.syntax import gfp_dual, numeral

import smallproofs

ENV = standard_env()


def F(text):
    return parse_formula(text, ENV)


def entry_stages(name, bound):
    t = Model(bound).table(ENV[name])
    return t.stages


def test_even_and_nat_stages():
    e = entry_stages("E", 10)
    assert e[:4] == [frozenset(), {0}, {0, 2}, {0, 2, 4}]
    n = entry_stages("N", 10)
    assert n[:4] == [frozenset(), {0}, {0, 1}, {0, 1, 2}]
    assert n[-1] == frozenset(range(11))


def test_odd_and_m_profiles():
    m = Model(10)
    assert closure_profile(ENV["O"], m.universe, m)[:2] == [(1, {1}), (2, {3})]
    prof = closure_profile(ENV["M"], m.universe, m)
    order = [x for _, new in prof for x in sorted(new)]
    assert order == [0, 2, 4, 6, 8, 10, 1, 3, 5, 7, 9]


def _naive_lfp(name, bound):
    # independent oracle: iterate the body by direct recursion on numbers
    body = {
        "N": lambda x, S: x == 0 or (x - 1) in S,
        "E": lambda x, S: x == 0 or (x >= 2 and x - 2 in S),
        "O": lambda x, S: x == 1 or (x >= 2 and x - 2 in S),
    }[name]
    S = set()
    while True:
        T = {x for x in range(bound + 1) if body(x, S)}
        if T == S:
            return S
        S = T


@pytest.mark.parametrize("name", ["N", "E", "O"])
@pytest.mark.parametrize("bound", [0, 1, 5, 10])
def test_tables_match_direct_recursion(name, bound):
    assert Model(bound).table(ENV[name]).fixpoint == _naive_lfp(name, bound)


def test_evaluation_and_exactness():
    m = Model(10)
    assert m.eval(F("E(4)")) == (True, True)
    assert m.eval(F("O(4)")) == (False, True)
    assert m.eval(F("ex y. =(y,11)")) == (False, False)
    assert m.eval(F("ex y. =(y,3)")) == (True, True)
    assert m.eval(F("all y. or(not =(y, 3), E(s(y)))")) == (True, True)
    assert m.eval(F("<(x, 3)"), {"x": 2}) == (True, True)
    with pytest.raises(UnassignedVariable):
        m.eval(F("=(x,0)"))


def test_out_of_range_lookups_are_inexact():
    assert Model(4).eval(F("N(5)")) == (False, False)


def test_m_odd_members_are_bound_limited():
    t = Model(10).table(ENV["M"])
    assert {0, 2, 4} <= t.exact
    assert 1 not in t.exact


@given(st.integers(0, 30), st.integers(0, 30))
def test_cantor_pairing_inverts(a, b):
    assert cantor_unpair(cantor_pair(a, b)) == (a, b)


def test_pairing_formula():
    m = Model(12)
    z = cantor_pair(1, 2)
    assert m.holds(pairing_formula(numeral(z), numeral(1), numeral(2)))
    assert not m.holds(pairing_formula(numeral(z), numeral(2), numeral(1)))


@pytest.mark.parametrize("name", ["N", "E", "O", "M"])
def test_fixpoint_laws(name):
    r = fixpoint_laws(ENV[name], Universe(8), Model(8))
    assert r.fixed and r.prefixed_exhaustive and r.prefixed_checked > 0
    assert r.exact == (name != "M")


def test_laws_catch_a_wrong_table():
    m = Model(6)
    t = m.table(ENV["E"])
    t.fixpoint = t.fixpoint - {4}
    with pytest.raises(LawViolated):
        fixpoint_laws(ENV["E"], m.universe, m)


CHI = "and(not =(x,1), all y. or(not =(y, s(x)), X(y)))"


def test_box_star_gfp_against_brute_force():
    # every successor path 0 -> 1 -> 2 stays away from 1: only 2 qualifies
    body = F(CHI)
    m = Model(2)
    assert gfp_brute_force(body, "X", "x", m.universe, m) == {2}
    dual = gfp_dual(body, "X", "x")
    assert {n for n in m.universe.elements if m.holds(dual, {"x": n})} == {2}


@given(st.integers(0, 6))
def test_monotone_in_the_set_argument(k):
    m = Model(6)
    A = frozenset(range(k))
    for name in ("N", "E", "O"):
        assert m.apply(ENV[name], A) <= m.apply(ENV[name], A | {k})


def test_stage_of_formulas():
    m = Model(10)
    assert m.stage(F("E(4)"), {}) == 3
    assert m.stage(F("E(x)"), {"x": 0}) == 1
    assert m.stage(F("O(4)"), {}) is None


def test_sequent_truth_of_corpus_roots():
    for name in ("m_sub_n.proof", "functoriality_e_n.proof", "ind_from_n.proof"):
        root = as_graph(parse_proof(read_corpus(name), ENV)).root_sequent
        for b in (4, 8):
            v, exact = Model(b).sequent_truth(root)
            assert v, name


def test_walk_on_loop():
    p = as_graph(parse_proof(read_corpus("e1_loop.proof"), ENV))
    r = countermodel_walk(p, {}, Model(4))
    assert r.verdict == "LoopDetected"
    assert [s.node for s in r.steps] == ["n0", "n1", "n2", "n0"]
    assert r.non_increasing and not r.decreases


def test_walk_refuses_true_roots():
    p = as_graph(parse_proof(read_corpus("m_sub_n.proof"), ENV))
    with pytest.raises(RootNotFalse):
        countermodel_walk(p, {}, Model(4))


def _false_rooted(limit):
    m = Model(4)
    out = []
    for p in smallproofs.enumerate_proofs(3):
        if not p.has_cycle():
            continue
        v, e = m.sequent_truth(p.root_sequent)
        if not v and e:
            out.append(p)
        if len(out) >= limit:
            break
    return out


def test_walk_stays_on_false_sequents():
    # a falsified conclusion always has a falsified premiss
    m = Model(4)
    proofs = _false_rooted(200)
    assert proofs
    for p in proofs:
        r = countermodel_walk(p, {}, m)
        assert r.verdict in ("LoopDetected", "StepLimit", "StuckAtAxiom")
        for s in r.steps:
            seq = p.nodes[s.node].sequent
            assert m.sequent_at(seq, dict(s.assignment))[0] is False


def test_false_roots_have_no_progressing_proof():
    for p in _false_rooted(200):
        assert not check_proof(p).ok


def test_stream_gfp_is_well_formed():
    # streams of evens: x codes a pair whose head is even and whose tail is again such a stream
    from cycid.syntax import And, Exists, Pred, SetVar, Var, free_vars, is_positive
    head = And(pairing_formula(Var("x"), Var("a"), Var("b")),
               And(Pred(ENV["E"], Var("a")), Pred(SetVar("X"), Var("b"))))
    body = Exists("a", Exists("b", head))
    assert is_positive(body, "X")
    g = gfp_dual(body, "X", "x", "S")
    assert free_vars(g) == {"x"}
    shipped = parse_decls(read_corpus("stream.ind"), ENV)["S"]
    assert shipped == g.sym and is_positive(shipped.body, "X")
    v, _ = Model(4).eval(g, {"x": 0})
    assert v in (True, False)
