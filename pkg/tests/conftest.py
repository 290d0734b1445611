import pytest
from hypothesis import strategies as st

from cycid.library import read_corpus, standard_env
from cycid.proofs import parse_proof
from cycid.syntax import (
    And, Eq, Exists, Forall, Lt, NotEq, NotLt, NotPred, Or, Plus, Pred, SetVar,
    Succ, Times, Var, ZERO,
)

VARS = ("x", "y", "z")


@pytest.fixture(scope="session")
def env():
    return standard_env()


@pytest.fixture(scope="session")
def corpus(env):
    def load(name):
        return parse_proof(read_corpus(name), env)
    return load


terms = st.recursive(
    st.one_of(st.just(ZERO), st.sampled_from(VARS).map(Var)),
    lambda sub: st.one_of(
        sub.map(Succ),
        st.tuples(sub, sub).map(lambda p: Plus(*p)),
        st.tuples(sub, sub).map(lambda p: Times(*p)),
    ),
    max_leaves=4,
)


def _atoms(env):
    preds = [env["N"], env["E"], env["O"], SetVar("X")]
    return st.one_of(
        st.tuples(terms, terms).map(lambda p: Eq(*p)),
        st.tuples(terms, terms).map(lambda p: NotEq(*p)),
        st.tuples(terms, terms).map(lambda p: Lt(*p)),
        st.tuples(terms, terms).map(lambda p: NotLt(*p)),
        st.tuples(st.sampled_from(preds), terms).map(lambda p: Pred(*p)),
        st.tuples(st.sampled_from(preds), terms).map(lambda p: NotPred(*p)),
    )


def formulas(env, max_leaves=6):
    return st.recursive(
        _atoms(env),
        lambda sub: st.one_of(
            st.tuples(sub, sub).map(lambda p: Or(*p)),
            st.tuples(sub, sub).map(lambda p: And(*p)),
            st.tuples(st.sampled_from(VARS), sub).map(lambda p: Exists(*p)),
            st.tuples(st.sampled_from(VARS), sub).map(lambda p: Forall(*p)),
        ),
        max_leaves=max_leaves,
    )


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
