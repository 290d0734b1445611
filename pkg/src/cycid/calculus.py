"""Sequents, rule instances and local rule checking.

Cedents are sets, so contraction is silent: a principal formula may or may not
survive into the premiss.  Rules other than weakening are otherwise exact; no
formula appears or disappears unless the schema says so.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, NamedTuple, Optional, Tuple

from .grammar import parse_formula
from .syntax import (
    Abs, And, Eq, Exists, Forall, Formula, IndPred, NotEq, NotLt, NotPred,
    Or, Pred, Succ, Term, Var, ZERO, free_vars, negate, subst, subst_pred,
)

FINITARY = "finitary"
CYCLIC = "cyclic"

TAGS = (
    "id", "weaken", "subst", "cut", "orL", "orR", "andL", "andR", "negL", "negR",
    "allL", "allR", "exL", "exR", "eqL", "eqR", "qAxiom", "indPA", "idl", "idr",
    "xind", "nAxiom",
)
HYP = "hyp"

ARITY = {
    "id": 0, "eqR": 0, "qAxiom": 0, "nAxiom": 0,
    "weaken": 1, "subst": 1, "orR": 1, "andL": 1, "negL": 1, "negR": 1,
    "allL": 1, "allR": 1, "exL": 1, "exR": 1, "eqL": 1, "idl": 1, "idr": 1,
    "cut": 2, "orL": 2, "andR": 2, "indPA": 2, "xind": 2,
    HYP: 0,
}

FINITARY_ONLY = {"indPA", "xind"}
CYCLIC_ONLY = {"nAxiom"}
EIGEN_RULES = {"allR", "exL", "xind", "indPA"}


class RuleError(Exception):
    pass


class WrongArity(RuleError):
    pass


class SchemaMismatch(RuleError):
    pass


class EigenvariableNotFresh(RuleError):
    pass


class ModeForbidsRule(RuleError):
    pass


def _fset(xs) -> FrozenSet[Formula]:
    return frozenset(xs)


@dataclass(frozen=True)
class Sequent:
    ant: FrozenSet[Formula] = frozenset()
    suc: FrozenSet[Formula] = frozenset()

    @staticmethod
    def of(ant: Iterable[Formula] = (), suc: Iterable[Formula] = ()) -> "Sequent":
        return Sequent(_fset(ant), _fset(suc))

    def free_vars(self) -> frozenset:
        out = set()
        for f in self.ant | self.suc:
            out |= free_vars(f)
        return frozenset(out)

    def subst(self, theta) -> "Sequent":
        return Sequent.of((subst(f, theta) for f in self.ant),
                          (subst(f, theta) for f in self.suc))

    def add(self, ant=(), suc=()) -> "Sequent":
        return Sequent(self.ant | _fset(ant), self.suc | _fset(suc))

    def formulas(self):
        return self.ant | self.suc

    def __str__(self):
        from .proofs import show_sequent
        return show_sequent(self)


@dataclass(frozen=True)
class RuleInstance:
    """A rule tag plus whichever parameters the tag needs.

    princ: principal formula (cut formula for cut, equation for eqL); inferred
        when omitted.
    term: witness term (allL, exR, idl/idr/xind argument, indPA instance).
    eigen: eigenvariable (allR, exL, xind, indPA).
    theta: substitution, as a tuple of (var, term) pairs.
    inv: invariant formula over `eigen` (xind, indPA).
    template, holes: eqL rewriting context psi(u, v).
    pred: inductive predicate (idl, idr, xind).
    index: Q axiom number, 1-based.
    hyp: name of an open hypothesis leaf.
    """
    tag: str
    princ: Optional[Formula] = None
    term: Optional[Term] = None
    eigen: Optional[str] = None
    theta: Optional[Tuple[Tuple[str, Term], ...]] = None
    inv: Optional[Formula] = None
    template: Optional[Formula] = None
    holes: Tuple[str, str] = ("u", "v")
    pred: Optional[IndPred] = None
    index: Optional[int] = None
    hyp: Optional[str] = None

    @property
    def theta_map(self) -> Dict[str, Term]:
        return dict(self.theta or ())

    @property
    def arity(self) -> int:
        return ARITY[self.tag]


def mk_theta(mapping) -> Tuple[Tuple[str, Term], ...]:
    return tuple(sorted(dict(mapping).items()))


@dataclass(frozen=True)
class InferenceStep:
    conclusion: Sequent
    premisses: Tuple[Sequent, ...]
    rule: RuleInstance


# ---------------------------------------------------------------------------
# Robinson arithmetic, plus a recursive clause for <

_Q_TEXT = [
    "all x. not =(s(x), 0)",
    "all x. all y. imp(=(s(x), s(y)), =(x, y))",
    "all x. imp(not =(x, 0), ex y. =(x, s(y)))",
    "all x. =(+(x, 0), x)",
    "all x. all y. =(+(x, s(y)), s(+(x, y)))",
    "all x. =(*(x, 0), 0)",
    "all x. all y. =(*(x, s(y)), +(*(x, y), x))",
    "all x. not <(x, 0)",
    "all x. all y. and(imp(<(x, s(y)), or(<(x, y), =(x, y))), imp(or(<(x, y), =(x, y)), <(x, s(y))))",
]


def q_axiom_formulas() -> List[Formula]:
    return [parse_formula(t) for t in _Q_TEXT]


_Q = None


def q_axiom(index: int) -> Formula:
    global _Q
    if _Q is None:
        _Q = q_axiom_formulas()
    if not 1 <= index <= len(_Q):
        raise SchemaMismatch(f"no Q axiom number {index}")
    return _Q[index - 1]


def q_axioms() -> List[Sequent]:
    return [Sequent.of((), [f]) for f in q_axiom_formulas()]


# ---------------------------------------------------------------------------
# checking

def _options(side: FrozenSet[Formula], princ: Formula):
    """Possible contexts G with side == G + {princ}."""
    if princ not in side:
        return []
    return [side - {princ}, side]


def _match(conc_side, prem_side, princ, aux) -> bool:
    aux = _fset(aux)
    return any(prem_side == g | aux for g in _options(conc_side, princ))


def _need(rule: RuleInstance, *names):
    for n in names:
        if getattr(rule, n) is None:
            raise SchemaMismatch(f"{rule.tag} needs parameter {n!r}")


def _mismatch(rule, detail):
    raise SchemaMismatch(f"{rule.tag}: {detail}")


def _fresh_check(rule: RuleInstance, conclusion: Sequent):
    if rule.eigen in conclusion.free_vars():
        raise EigenvariableNotFresh(f"{rule.tag}: {rule.eigen} is free in the conclusion")


def _candidates(step: InferenceStep):
    """Formulas that could be principal for the step's tag."""
    c = step.conclusion
    r = step.rule
    kinds = {
        "orL": ("ant", Or), "orR": ("suc", Or), "andL": ("ant", And), "andR": ("suc", And),
        "negL": ("ant", (NotPred, NotEq, NotLt)), "negR": ("suc", (NotPred, NotEq, NotLt)),
        "allL": ("ant", Forall), "allR": ("suc", Forall), "exL": ("ant", Exists),
        "exR": ("suc", Exists), "eqL": ("ant", Eq), "eqR": ("suc", Eq),
        "idl": ("ant", Pred), "idr": ("suc", Pred), "xind": ("ant", Pred),
        "nAxiom": ("suc", Pred),
    }
    if r.tag == "id":
        return sorted(c.ant & c.suc, key=str)
    if r.tag == "indPA":
        return sorted(c.suc, key=str)
    if r.tag == "qAxiom":
        return [q_axiom(r.index)] if r.index else []
    if r.tag not in kinds:
        return []
    side, cls = kinds[r.tag]
    fs = c.ant if side == "ant" else c.suc
    out = [f for f in fs if isinstance(f, cls)]
    if r.tag in ("idl", "idr", "xind", "nAxiom"):
        out = [f for f in out if isinstance(f.sym, IndPred)]
    return sorted(out, key=str)


def check_step(step: InferenceStep, mode: str = CYCLIC) -> Formula:
    """Raise a RuleError unless the step instantiates its rule.

    Returns the principal formula (None for rules without one).
    """
    r = step.rule
    if r.tag not in ARITY:
        raise SchemaMismatch(f"unknown rule {r.tag!r}")
    if r.tag == HYP:
        if step.premisses:
            raise WrongArity("hypothesis leaves have no premisses")
        return None
    if len(step.premisses) != r.arity:
        raise WrongArity(f"{r.tag} takes {r.arity} premisses, got {len(step.premisses)}")
    if mode == FINITARY and r.tag in CYCLIC_ONLY:
        raise ModeForbidsRule(f"{r.tag} is not a finitary rule")
    if mode == CYCLIC and r.tag in FINITARY_ONLY:
        raise ModeForbidsRule(f"{r.tag} is not a cyclic rule")
    if r.tag in EIGEN_RULES:
        _need(r, "eigen")
        _fresh_check(r, step.conclusion)
    if r.tag in ("weaken", "subst", "cut"):
        _CHECKERS[r.tag](step, r.princ)
        return r.princ
    if r.princ is not None:
        _CHECKERS[r.tag](step, r.princ)
        return r.princ
    cands = _candidates(step)
    last = None
    for f in cands:
        try:
            _CHECKERS[r.tag](step, f)
            return f
        except EigenvariableNotFresh:
            raise
        except RuleError as e:
            last = e
    if last is not None:
        raise last
    _mismatch(r, "no candidate principal formula in the conclusion")


def resolve_principal(step: InferenceStep) -> Optional[Formula]:
    """The principal formula, inferring it if the rule omits it."""
    if step.rule.princ is not None or step.rule.tag in ("weaken", "subst", HYP):
        return step.rule.princ
    mode = FINITARY if step.rule.tag in FINITARY_ONLY else CYCLIC
    return check_step(step, mode)


def with_principal(step: InferenceStep) -> InferenceStep:
    p = resolve_principal(step)
    if p is None or step.rule.princ is not None:
        return step
    return replace(step, rule=replace(step.rule, princ=p))


def _c_id(step, f):
    c = step.conclusion
    if not (f in c.ant and f in c.suc):
        _mismatch(step.rule, f"{f} is not on both sides")


def _c_eqR(step, f):
    if not (isinstance(f, Eq) and f.left == f.right and f in step.conclusion.suc):
        _mismatch(step.rule, f"{f} is not t = t in the succedent")


def _c_qAxiom(step, f):
    _need(step.rule, "index")
    if f != q_axiom(step.rule.index) or f not in step.conclusion.suc:
        _mismatch(step.rule, f"Q axiom {step.rule.index} not in the succedent")


def _c_nAxiom(step, f):
    from .library import nat
    if not (isinstance(f, Pred) and f.sym == nat() and f in step.conclusion.suc):
        _mismatch(step.rule, "no N(t) in the succedent")


def _c_weaken(step, _):
    c, p = step.conclusion, step.premisses[0]
    if not (p.ant <= c.ant and p.suc <= c.suc):
        _mismatch(step.rule, "premiss is not a subsequent of the conclusion")


def _c_subst(step, _):
    _need(step.rule, "theta")
    theta = step.rule.theta_map
    if step.premisses[0].subst(theta) != step.conclusion:
        _mismatch(step.rule, "conclusion is not the substitution instance of the premiss")


def _c_cut(step, _):
    _need(step.rule, "princ")
    c, f = step.conclusion, step.rule.princ
    p0, p1 = step.premisses
    if p0 != c.add(suc=[f]) or p1 != c.add(ant=[f]):
        _mismatch(step.rule, f"premisses do not match cut on {f}")


def _one_sided(step, f, side, auxes, other_aux=None):
    """Premiss i keeps the non-principal side (plus other_aux[i]) and swaps
    the principal for auxes[i] on the principal side."""
    c = step.conclusion
    conc_main = c.ant if side == "L" else c.suc
    conc_other = c.suc if side == "L" else c.ant
    if f not in conc_main:
        _mismatch(step.rule, f"{f} is not in the {'antecedent' if side == 'L' else 'succedent'}")
    for i, p in enumerate(step.premisses):
        prem_main = p.ant if side == "L" else p.suc
        prem_other = p.suc if side == "L" else p.ant
        extra = _fset(other_aux[i]) if other_aux else frozenset()
        if prem_other != conc_other | extra:
            _mismatch(step.rule, f"premiss {i}: side contexts differ")
        if not _match(conc_main, prem_main, f, auxes[i]):
            _mismatch(step.rule, f"premiss {i}: expected auxiliary {', '.join(map(str, auxes[i]))}")


def _c_orL(step, f):
    if not isinstance(f, Or):
        _mismatch(step.rule, f"{f} is not a disjunction")
    _one_sided(step, f, "L", [[f.left], [f.right]])


def _c_orR(step, f):
    if not isinstance(f, Or):
        _mismatch(step.rule, f"{f} is not a disjunction")
    _one_sided(step, f, "R", [[f.left, f.right]])


def _c_andL(step, f):
    if not isinstance(f, And):
        _mismatch(step.rule, f"{f} is not a conjunction")
    _one_sided(step, f, "L", [[f.left, f.right]])


def _c_andR(step, f):
    if not isinstance(f, And):
        _mismatch(step.rule, f"{f} is not a conjunction")
    _one_sided(step, f, "R", [[f.left], [f.right]])


def _c_negL(step, f):
    if not isinstance(f, (NotPred, NotEq, NotLt)):
        _mismatch(step.rule, f"{f} is not a negated atom")
    _one_sided(step, f, "L", [[]], [[negate(f)]])


def _c_negR(step, f):
    if not isinstance(f, (NotPred, NotEq, NotLt)):
        _mismatch(step.rule, f"{f} is not a negated atom")
    _one_sided(step, f, "R", [[]], [[negate(f)]])


def quant_aux(f, rule: RuleInstance) -> Formula:
    """The instance of the quantified formula f used by an allL/allR/exL/exR step."""
    if rule.tag in ("allR", "exL"):
        return subst(f.body, {f.var: Var(rule.eigen)})
    return subst(f.body, {f.var: rule.term})


def _quant(step, f, cls, side):
    if not isinstance(f, cls):
        _mismatch(step.rule, f"{f} is not {'universal' if cls is Forall else 'existential'}")
    if step.rule.tag in ("allL", "exR"):
        _need(step.rule, "term")
    _one_sided(step, f, side, [[quant_aux(f, step.rule)]])


def _c_allL(step, f):
    _quant(step, f, Forall, "L")


def _c_allR(step, f):
    _quant(step, f, Forall, "R")


def _c_exL(step, f):
    _quant(step, f, Exists, "L")


def _c_exR(step, f):
    _quant(step, f, Exists, "R")


def eq_template_pair(rule: RuleInstance, eq: Eq):
    """(premiss form psi(s,t), conclusion form psi(t,s)) for an eqL step."""
    if rule.template is None:
        return None
    u, v = rule.holes
    s, t = eq.left, eq.right
    prem = subst(rule.template, {u: s, v: t})
    conc = subst(rule.template, {u: t, v: s})
    return prem, conc


def _c_eqL(step, f):
    r = step.rule
    if not isinstance(f, Eq):
        _mismatch(r, f"{f} is not an equation")
    c, p = step.conclusion, step.premisses[0]
    if f not in c.ant:
        _mismatch(r, f"{f} is not in the antecedent")
    pair = eq_template_pair(r, f)
    if pair is None:
        if Sequent(p.ant | {f}, p.suc) != c:
            _mismatch(r, "conclusion is not the premiss plus the equation")
        return
    prem_form, conc_form = pair
    for side in ("L", "R"):
        p_side = p.ant if side == "L" else p.suc
        if prem_form not in p_side:
            continue
        for rewritten in (p_side - {prem_form} | {conc_form}, p_side | {conc_form}):
            cand = Sequent(rewritten | {f}, p.suc) if side == "L" \
                else Sequent(p.ant | {f}, rewritten)
            if cand == c:
                return
    _mismatch(r, f"rewriting {prem_form} to {conc_form} does not give the conclusion")


def _ind_atom(step, f, side):
    r = step.rule
    if not (isinstance(f, Pred) and isinstance(f.sym, IndPred)):
        _mismatch(r, f"{f} is not an inductive atom")
    if r.pred is not None and r.pred != f.sym:
        _mismatch(r, f"{f} is not an atom of {r.pred.name}")
    if r.term is not None and r.term != f.arg:
        _mismatch(r, f"{f} does not have argument {r.term}")
    return f.sym


def _c_idl(step, f):
    p = _ind_atom(step, f, "L")
    _one_sided(step, f, "L", [[p.unfold(f.arg)]])


def _c_idr(step, f):
    p = _ind_atom(step, f, "R")
    _one_sided(step, f, "R", [[p.unfold(f.arg)]])


def xind_premiss_formulas(pred: IndPred, eigen: str, inv: Formula):
    """(phi(inv, y), inv): the left premiss of xind gains these."""
    body = subst(pred.body, {pred.ind_var: Var(eigen)})
    return subst_pred(body, {pred.set_var: Abs(eigen, inv)}), inv


def _c_xind(step, f):
    r = step.rule
    _need(r, "inv")
    p = _ind_atom(step, f, "L")
    stepped, inv = xind_premiss_formulas(p, r.eigen, r.inv)
    inst = subst(inv, {r.eigen: f.arg})
    _one_sided(step, f, "L", [[stepped], [inst]], [[inv], []])


def ind_pa_formulas(inv: Formula, y: str, t: Term):
    return (subst(inv, {y: t}), subst(inv, {y: ZERO}), inv, subst(inv, {y: Succ(Var(y))}))


def _c_indPA(step, f):
    r = step.rule
    _need(r, "inv", "term")
    concl, base, hyp, succ = ind_pa_formulas(r.inv, r.eigen, r.term)
    if f != concl:
        _mismatch(r, f"{f} is not the invariant at {r.term}")
    c = step.conclusion
    p0, p1 = step.premisses
    if p0.ant != c.ant or not _match(c.suc, p0.suc, f, [base]):
        _mismatch(r, "base premiss does not match")
    if p1.ant != c.ant | {hyp} or not _match(c.suc, p1.suc, f, [succ]):
        _mismatch(r, "step premiss does not match")


_CHECKERS = {
    "id": _c_id, "eqR": _c_eqR, "qAxiom": _c_qAxiom, "nAxiom": _c_nAxiom,
    "weaken": _c_weaken, "subst": _c_subst, "cut": _c_cut,
    "orL": _c_orL, "orR": _c_orR, "andL": _c_andL, "andR": _c_andR,
    "negL": _c_negL, "negR": _c_negR,
    "allL": _c_allL, "allR": _c_allR, "exL": _c_exL, "exR": _c_exR,
    "eqL": _c_eqL, "idl": _c_idl, "idr": _c_idr, "xind": _c_xind, "indPA": _c_indPA,
}


# ---------------------------------------------------------------------------
# ancestry

class AncestorPair(NamedTuple):
    conclusion: Formula
    premiss_index: int
    premiss: Formula
    side: str                 # side of the premiss formula
    conclusion_side: str = ""  # side of the conclusion formula when it differs


def principal_auxiliary(step: InferenceStep) -> List[AncestorPair]:
    """Principal/auxiliary pairs, plus identity pairs for a principal formula
    that also survives in a premiss as context."""
    r = step.rule
    f = resolve_principal(step)
    if f is None or r.tag in ("id", "eqR", "qAxiom", "nAxiom", "cut", "eqL", HYP):
        return []
    out: List[AncestorPair] = []

    def add(i, g, side, cside=None):
        out.append(AncestorPair(f, i, g, side, cside or side))

    if r.tag in ("orL", "andR"):
        add(0, f.left, "L" if r.tag == "orL" else "R")
        add(1, f.right, "L" if r.tag == "orL" else "R")
    elif r.tag in ("orR", "andL"):
        s = "R" if r.tag == "orR" else "L"
        add(0, f.left, s)
        add(0, f.right, s)
    elif r.tag == "negL":
        add(0, negate(f), "R", "L")
    elif r.tag == "negR":
        add(0, negate(f), "L", "R")
    elif r.tag in ("allL", "allR", "exL", "exR"):
        add(0, quant_aux(f, r), "L" if r.tag in ("allL", "exL") else "R")
    elif r.tag in ("idl", "idr"):
        add(0, f.sym.unfold(f.arg), "L" if r.tag == "idl" else "R")
    elif r.tag == "xind":
        stepped, _ = xind_premiss_formulas(f.sym, r.eigen, r.inv)
        add(0, stepped, "L")
        add(1, subst(r.inv, {r.eigen: f.arg}), "L")
    elif r.tag == "indPA":
        _, base, _, succ = ind_pa_formulas(r.inv, r.eigen, r.term)
        add(0, base, "R")
        add(1, succ, "R")
    cside = out[0].conclusion_side if out else None
    for i, p in enumerate(step.premisses):
        prem_side = p.ant if cside == "L" else p.suc
        if f in prem_side:
            out.append(AncestorPair(f, i, f, cside, cside))
    return out
