import time

import pytest

from cycid.calculus import CYCLIC, FINITARY, HYP, RuleInstance
from cycid.grammar import parse_formula
from cycid.library import functoriality_template, read_corpus, standard_env
from cycid.proofs import ProofTree, as_graph, check_proof, parse_proof
from cycid.syntax import Abs, Pred, Var
from cycid.trace import Progressing, analyze_trace, naive_progress_oracle
from cycid.translate import (
    close_hypotheses, derive_idl, derive_ind_from_n, functoriality, functoriality_cyclic,
    functoriality_finite, id_to_cid,
)

ENV = standard_env()
E, N, O, M = (ENV[k] for k in "ENOM")
x = Var("x")


def F(text):
    return parse_formula(text, ENV)


def hyps(p):
    g = as_graph(p)
    return [n for n in g.nodes.values() if n.rule.tag == HYP]


@pytest.mark.parametrize("phi", ["Y(x)", "or(Y(x), =(x,0))", "ex y. and(Y(y), =(x, s(y)))",
                                 "all y. or(not =(y,x), Y(y))", "and(N(x), Y(s(x)))"])
def test_finitary_functoriality(phi):
    t = functoriality_finite(F(phi), "Y", "Z")
    assert isinstance(t, ProofTree)
    assert check_proof(t, allow_open=True).locally_ok
    assert hyps(t), "a hypothesis leaf is expected when Y occurs"


def test_functoriality_without_set_variables_is_identity():
    t = functoriality_finite(F("E(x)"), "Y", "Z")
    assert t.rule.tag == "id" and not t.children


def test_template_functoriality_both_modes():
    P = functoriality_template()
    phi = Pred(P, x)
    fin = functoriality_finite(phi, "Y", "Z")
    assert any(n.rule.tag == "xind" for n, _ in fin.walk())
    assert check_proof(fin, allow_open=True).locally_ok
    cyc = functoriality_cyclic(phi, "Y", "Z")
    r = check_proof(cyc, allow_open=True)
    assert r.locally_ok and isinstance(r.verdict, Progressing)


def test_cyclic_functoriality_instance():
    P = functoriality_template()
    g = functoriality(Pred(P, x), {"Y": (Abs.of_pred(E), Abs.of_pred(N))}, CYCLIC)
    g = close_hypotheses(g, RuleInstance("nAxiom"))
    r = check_proof(g)
    assert r.is_proof
    for w in r.verdict.witnesses:
        a = analyze_trace(g, w)
        assert a.maximal and a.pred.name == "P_E"


@pytest.mark.parametrize("name", ["E", "N", "O", "M"])
def test_derived_left_unfolding(name):
    p = ENV[name]
    t = derive_idl(p, x, delta=[p.unfold(x)])
    assert t.sequent.ant == {Pred(p, x)} and p.unfold(x) in t.sequent.suc
    g = close_hypotheses(t.to_graph(FINITARY), RuleInstance("id"))
    assert check_proof(g, mode=FINITARY).is_proof
    assert not any(n.rule.tag in ("idl", "nAxiom") for n in g.nodes.values())


def test_ind_from_n_scaffold():
    phi = F("or(=(x,0), ex y. =(x, s(y)))")
    h = derive_ind_from_n(phi, "x", x)
    assert h.has_cycle()
    r = check_proof(h, allow_open=True)
    assert r.locally_ok and r.verdict.progressing
    assert len(hyps(h)) == 2


def test_translation_of_mixed_proof():
    p = parse_proof(read_corpus("even_nat.proof"), ENV)
    tags = [n.rule.tag for n, _ in p.walk()]
    assert "xind" in tags and "indPA" in tags
    t0 = time.perf_counter()
    q = id_to_cid(p)
    r = check_proof(q, mode=CYCLIC)
    assert time.perf_counter() - t0 < 5
    assert q.root_sequent == p.sequent
    assert r.is_proof
    assert isinstance(naive_progress_oracle(q), Progressing)
    assert not any(n.rule.tag in ("xind", "indPA") for n in q.nodes.values())
    for w in r.verdict.witnesses:
        assert analyze_trace(q, w).maximal


def test_translation_keeps_plain_proofs():
    p = parse_proof(read_corpus("idl_e.proof"), ENV)
    q = id_to_cid(p)
    assert q.root_sequent == p.sequent
    assert check_proof(q).is_proof
