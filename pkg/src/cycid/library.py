"""The standard predicates N, E, O and M, loaded from the bundled corpus."""

from functools import lru_cache
from importlib import resources

from .grammar import parse_decls


def corpus_path(name: str):
    return resources.files("cycid") / "corpus" / name


def read_corpus(name: str) -> str:
    return corpus_path(name).read_text(encoding="utf-8")


@lru_cache(maxsize=None)
def _standard():
    return parse_decls(read_corpus("preds.ind"))


def standard_env() -> dict:
    """Fresh dict name -> IndPred with N, E, O, M."""
    return dict(_standard())


def nat():
    return _standard()["N"]


# ---------------------------------------------------------------------------
# generated corpus files

CORPUS_PROOFS = ("m_sub_n.proof", "e1_loop.proof", "even_nat.proof",
                 "functoriality_e_n.proof", "idl_e.proof", "ind_from_n.proof")


def functoriality_template():
    """P(Y) := least X with X(x) <-> x = 0 or some y has Y(y), X(y), x = s y."""
    from .grammar import parse_formula
    from .syntax import mk_ind_pred
    body = parse_formula("or(=(x,0), ex y. and(and(Y(y), X(y)), =(x,s(y))))")
    return mk_ind_pred(body, "X", "x", "P", params={"Y"})


def generated_corpus() -> dict:
    """Text of the corpus proofs produced by the generators."""
    from .calculus import RuleInstance
    from .grammar import parse_formula
    from .proofs import relabel, serialize_proof
    from .syntax import Abs, Pred, Var
    from .translate import close_hypotheses, derive_idl, derive_ind_from_n, functoriality
    env = standard_env()
    E, N = env["E"], env["N"]
    out = {}
    P = functoriality_template()
    g = functoriality(Pred(P, Var("x")), {"Y": (Abs.of_pred(E), Abs.of_pred(N))}, "cyclic")
    g = close_hypotheses(g, RuleInstance("nAxiom"))
    g.comments.insert(0, "P_E(x) => P_N(x) by a cycle on the left unfolding of P_E; "
                         "the hypothesis E(y) => N(y) is an N axiom")
    out["functoriality_e_n.proof"] = serialize_proof(g)
    x = Var("x")
    t = derive_idl(E, x, delta=[E.unfold(x)]).to_graph("finitary")
    t = relabel(close_hypotheses(t, RuleInstance("id")))
    t.comments.insert(0, "E(x) => e(E, x): left unfolding derived from xind and idr")
    out["idl_e.proof"] = serialize_proof(t)
    h = derive_ind_from_n(parse_formula("=(x,x)"), "x", x)
    h = close_hypotheses(h, RuleInstance("eqR"))
    h.comments.insert(0, "=> x = x by the cyclic induction scaffold on N")
    out["ind_from_n.proof"] = serialize_proof(h)
    return out
