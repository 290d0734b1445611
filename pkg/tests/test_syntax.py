import pytest
from hypothesis import given, strategies as st

from cycid.grammar import ParseError, parse_decls, parse_formula, parse_term, show_formula, show_term
from cycid.syntax import (
    Abs, IllFormedBody, NotPositive, Or, Pred, SetVar, Var,
    alpha_equal, below, free_set_vars, free_vars, fresh_var, gfp_dual, greatest_pred,
    is_positive, mk_ind_pred, negate, numeral, pred_order, subst, subst_pred, term_vars,
)

from conftest import formulas, terms
from cycid.library import standard_env

ENV = standard_env()


@given(formulas(ENV))
def test_negation_is_an_involution(f):
    assert negate(negate(f)) == f


@given(formulas(ENV))
def test_negation_changes_the_formula(f):
    assert negate(f) != f


@given(formulas(ENV))
def test_show_then_parse_round_trips(f):
    assert parse_formula(show_formula(f), ENV) == f


@given(terms)
def test_term_round_trip(t):
    assert parse_term(show_term(t)) == t


@given(formulas(ENV))
def test_identity_substitution(f):
    assert subst(f, {v: Var(v) for v in free_vars(f)}) == f
    assert subst(f, {}) == f


@given(formulas(ENV), terms)
def test_substitution_removes_the_variable(f, t):
    g = subst(f, {"x": t})
    expect = (free_vars(f) - {"x"}) | (term_vars(t) if "x" in free_vars(f) else frozenset())
    assert free_vars(g) == expect


@given(formulas(ENV), st.sampled_from(["E", "N", "O"]))
def test_positivity_survives_predicate_substitution(f, name):
    # substituting a positive formula for X keeps Y's positivity
    if not is_positive(f, "X"):
        return
    a = Abs("z", Or(Pred(SetVar("Y"), Var("z")), Pred(ENV[name], Var("z"))))
    assert is_positive(subst_pred(f, {"X": a}), "Y")


def test_alpha_equivalence():
    a = parse_formula("ex y. =(x, s(y))")
    b = parse_formula("ex w. =(x, s(w))")
    c = parse_formula("ex w. =(w, s(x))")
    assert a == b and hash(a) == hash(b) and alpha_equal(a, b)
    assert a != c


def test_capture_avoiding_substitution():
    f = parse_formula("ex y. =(x, s(y))")
    g = subst(f, {"x": Var("y")})
    assert free_vars(g) == {"y"}
    assert g == parse_formula("ex w. =(y, s(w))")


def test_numerals_and_printing():
    assert numeral(3) == parse_term("s(s(s(0)))")
    assert show_term(numeral(3)) == "3"
    assert parse_formula("imp(E(x), N(x))", ENV) == parse_formula("or(not E(x), N(x))", ENV)


def test_not_is_de_morgan():
    f = parse_formula("not and(=(x,0), ex y. <(y,x))")
    assert f == parse_formula("or(not =(x,0), all y. not <(y,x))")


def test_positivity_rejected():
    with pytest.raises(ParseError):
        parse_decls("ind B := (X, x, or(=(x,0), not X(x)))")
    with pytest.raises(NotPositive):
        mk_ind_pred(parse_formula("not X(x)"), "X", "x")


def test_ill_formed_bodies():
    with pytest.raises(IllFormedBody):
        mk_ind_pred(parse_formula("or(X(x), =(y, 0))"), "X", "x")
    with pytest.raises(IllFormedBody):
        mk_ind_pred(parse_formula("or(X(x), Y(x))"), "X", "x")
    mk_ind_pred(parse_formula("or(X(x), Y(x))"), "X", "x", params={"Y"})


def test_parse_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_formula("or(=(x,0),\n  =(x,)")
    assert "2:" in str(e.value)
    with pytest.raises(ParseError):
        parse_formula("=(x,0) junk")


def test_predicate_equality_ignores_names():
    renamed = parse_decls("ind Ev := (Z, n, or(=(n,0), ex m. and(Z(m), =(n, s(s(m))))))")["Ev"]
    assert renamed == ENV["E"]
    assert renamed != ENV["O"]


def test_predicate_order():
    E, M, N = ENV["E"], ENV["M"], ENV["N"]
    assert below(M) == {E}
    assert pred_order(E, M) == "below"
    assert pred_order(M, E) == "above"
    assert pred_order(E, N) == "incomparable"
    assert pred_order(E, N, total=True) in ("below", "above")
    assert greatest_pred([E, N, M]) == M


def test_fresh_var():
    assert fresh_var({"x0", "x1"}) == "x2"
    assert fresh_var(set(), "w") == "w0"


def test_unfold():
    E = ENV["E"]
    assert E.unfold(numeral(2)) == parse_formula("or(=(2,0), ex y. and(E(y), =(2, s(s(y)))))", ENV)


def test_gfp_dual_is_negated_pred():
    body = parse_formula("and(X(x), =(x,x))")
    g = gfp_dual(body, "X", "x")
    assert free_vars(g) == {"x"}
    assert not free_set_vars(g)
    assert str(g).startswith("not ")
