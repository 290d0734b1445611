import pytest
from hypothesis import given, settings, strategies as st

from cycid.calculus import CYCLIC, FINITARY, HYP
from cycid.grammar import ParseError
from cycid.library import CORPUS_PROOFS, generated_corpus, read_corpus, standard_env
from cycid.proofs import (
    CyclicProof, ProofTree, as_graph, check_proof, eliminate_subst_prefix, minimize,
    parse_proof, proof_mode, relabel, serialize_proof, to_bud_companion, tree_of, unfold,
)

ENV = standard_env()
CYCLIC_FILES = ["m_sub_n.proof", "functoriality_e_n.proof", "ind_from_n.proof", "e1_loop.proof"]


def load(name):
    return parse_proof(read_corpus(name), ENV)


@pytest.mark.parametrize("name", CORPUS_PROOFS)
def test_round_trip_is_identity(name):
    text = read_corpus(name)
    p = parse_proof(text, ENV)
    assert serialize_proof(p) == text
    again = parse_proof(serialize_proof(p), ENV)
    assert serialize_proof(again) == text


@pytest.mark.parametrize("name", CORPUS_PROOFS)
def test_corpus_is_locally_correct(name):
    r = check_proof(load(name))
    assert r.locally_ok, r.errors


def test_generated_files_are_up_to_date():
    for name, text in generated_corpus().items():
        assert read_corpus(name) == text, name


def test_modes():
    assert proof_mode(load("even_nat.proof")) == FINITARY
    assert isinstance(load("even_nat.proof"), ProofTree)
    for name in CYCLIC_FILES:
        p = load(name)
        assert isinstance(p, CyclicProof) and proof_mode(p) == CYCLIC


def test_progress_verdicts():
    assert check_proof(load("m_sub_n.proof")).is_proof
    r = check_proof(load("e1_loop.proof"))
    assert r.locally_ok and not r.is_proof


def test_errors_name_node_and_rule():
    text = read_corpus("e1_loop.proof").replace("node n4: id", "node n4: eqR")
    r = check_proof(parse_proof(text, ENV))
    assert [(l, t) for l, t, _ in r.errors] == [("n4", "eqR")]


def test_finitary_mode_rejects_cycles_and_n_axiom():
    r = check_proof(load("m_sub_n.proof"), mode=FINITARY)
    assert r.errors
    r = check_proof(load("even_nat.proof"), mode=CYCLIC)
    assert any(t in ("xind", "indPA") for _, t, _ in r.errors)


def test_unknown_premiss_is_a_parse_error():
    text = read_corpus("e1_loop.proof").replace("premisses: [n4]", "premisses: [n9]")
    with pytest.raises(ParseError, match="n9"):
        parse_proof(text, ENV)


def test_unreachable_nodes_are_reported():
    text = read_corpus("e1_loop.proof") + "node z: eqR seq: [] => [=(0,0)] premisses: []\n"
    r = check_proof(parse_proof(text, ENV))
    assert [(l, t) for l, t, _ in r.errors] == [("z", "eqR")]


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_proof("root: a\nnode a: id seq: [] => [", ENV)
    with pytest.raises(ParseError):
        parse_proof("root: a\nnode a: id seq: [=(0,0)] => [=(0,0)] premisses: [a, b]\n", ENV)
    with pytest.raises(ParseError):
        parse_proof("", ENV)


def test_open_leaves():
    g = load("even_nat.proof")
    t = unfold(as_graph(g), 2)
    r = check_proof(t.to_graph())
    assert any(tag == HYP for _, tag, _ in r.errors)
    assert check_proof(t.to_graph(), allow_open=True).locally_ok


def _prefix(a: ProofTree, b: ProofTree) -> bool:
    if a.sequent != b.sequent:
        return False
    if a.rule is None:
        return True
    return a.rule == b.rule and len(a.children) == len(b.children) and \
        all(_prefix(x, y) for x, y in zip(a.children, b.children))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(CYCLIC_FILES), st.integers(0, 10))
def test_unfold_prefix_property(name, d):
    p = load(name)
    assert _prefix(unfold(p, d), unfold(p, d + 1))
    assert unfold(p, d).height() <= d


@pytest.mark.parametrize("depth", [8, 30])
def test_subst_elimination(depth):
    p = load("m_sub_n.proof")
    t = eliminate_subst_prefix(p, depth)
    assert all(n.rule is None or n.rule.tag != "subst" for n, _ in t.walk())
    r = check_proof(t.to_graph(CYCLIC), mode=CYCLIC, allow_open=True, progress=False)
    assert r.locally_ok, r.errors[:3]
    assert t.sequent == p.root_sequent


def test_minimize_and_relabel_preserve_meaning():
    p = load("m_sub_n.proof")
    q = relabel(minimize(p))
    assert len(q) <= len(p)
    assert q.root == "n0" and q.root_sequent == p.root_sequent
    assert check_proof(q).is_proof


def test_bud_companion_tree():
    t = to_bud_companion(load("m_sub_n.proof"))
    buds = [n.label for n, _ in t.walk() if n.label and n.label.startswith("bud:")]
    assert buds == ["bud:a0"]


def test_tree_of_acyclic_only():
    g = as_graph(load("even_nat.proof"))
    assert tree_of(g).sequent == g.root_sequent
    with pytest.raises(ValueError):
        tree_of(load("m_sub_n.proof"))
