"""Terms and formulas of arithmetic with iterated inductive definitions.

Formulas are kept in De Morgan normal form: negation only ever sits on an
atom.  Equality of formulas is alpha-equivalence, so formulas can be put in
plain Python sets and cedents get set semantics for free.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Optional, Union


class SyntaxError_(ValueError):
    pass


class NotPositive(SyntaxError_):
    pass


class IllFormedBody(SyntaxError_):
    pass


# ---------------------------------------------------------------------------
# terms

class Term:
    def __str__(self):
        from .grammar import show_term
        return show_term(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Zero(Term):
    pass


@dataclass(frozen=True)
class Succ(Term):
    arg: Term


@dataclass(frozen=True)
class Plus(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Times(Term):
    left: Term
    right: Term


ZERO = Zero()


def numeral(n: int) -> Term:
    t: Term = ZERO
    for _ in range(n):
        t = Succ(t)
    return t


def term_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t.name])
    if isinstance(t, Zero):
        return frozenset()
    if isinstance(t, Succ):
        return term_vars(t.arg)
    return term_vars(t.left) | term_vars(t.right)


def subst_term(t: Term, theta: Mapping[str, Term]) -> Term:
    if isinstance(t, Var):
        return theta.get(t.name, t)
    if isinstance(t, Zero):
        return t
    if isinstance(t, Succ):
        return Succ(subst_term(t.arg, theta))
    return type(t)(subst_term(t.left, theta), subst_term(t.right, theta))


# ---------------------------------------------------------------------------
# predicate symbols

@dataclass(frozen=True)
class SetVar:
    """A free unary predicate symbol such as the X of an inductive body."""
    name: str

    def __str__(self):
        return self.name


class Formula:
    """Base class; equality and hashing are up to renaming of bound variables."""

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return self._hash

    @cached_property
    def _hash(self):
        return hash(self.key)

    @cached_property
    def key(self):
        return _fkey(self, {}, 0, {}, 0)

    def __str__(self):
        from .grammar import show_formula
        return show_formula(self)

    def __repr__(self):
        return f"<{type(self).__name__} {self}>"


@dataclass(frozen=True, eq=False, repr=False)
class IndPred:
    """The least fixed point of a body positive in `set_var`, over `ind_var`.

    Use :func:`mk_ind_pred` to build one; it checks positivity and the
    free-variable conditions.  `params` lists extra set variables the body may
    mention; only template predicates (functoriality) have any.
    """
    body: Formula
    set_var: str
    ind_var: str
    name: str = "I"
    params: frozenset = field(default_factory=frozenset)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, IndPred):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @cached_property
    def key(self):
        return _ikey(self, {}, 0)

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"<IndPred {self.name}>"

    def unfold(self, t: Term) -> Formula:
        """The body with this predicate for X and `t` for the variable."""
        body = subst(self.body, {self.ind_var: t})
        return subst_pred(body, {self.set_var: Abs.of_pred(self)})

    def instantiate(self, sym: Union["SetVar", "IndPred", "Abs"], t: Term) -> Formula:
        body = subst(self.body, {self.ind_var: t})
        if not isinstance(sym, Abs):
            sym = Abs.of_pred(sym)
        return subst_pred(body, {self.set_var: sym})


Sym = Union[SetVar, IndPred]


@dataclass(frozen=True, eq=False, repr=False)
class Pred(Formula):
    sym: Sym
    arg: Term


@dataclass(frozen=True, eq=False, repr=False)
class NotPred(Formula):
    sym: Sym
    arg: Term


@dataclass(frozen=True, eq=False, repr=False)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=False, repr=False)
class NotEq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=False, repr=False)
class Lt(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=False, repr=False)
class NotLt(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Forall(Formula):
    var: str
    body: Formula


ATOMS = (Pred, NotPred, Eq, NotEq, Lt, NotLt)
PRED_ATOMS = (Pred, NotPred)
TERM_ATOMS = (Eq, NotEq, Lt, NotLt)


def implies(a: Formula, b: Formula) -> Formula:
    return Or(negate(a), b)


# ---------------------------------------------------------------------------
# alpha keys

def _tkey(t: Term, env):
    if isinstance(t, Var):
        lvl = env.get(t.name)
        return ("f", t.name) if lvl is None else ("b", lvl)
    if isinstance(t, Zero):
        return ("0",)
    if isinstance(t, Succ):
        return ("s", _tkey(t.arg, env))
    return ("+" if isinstance(t, Plus) else "*", _tkey(t.left, env), _tkey(t.right, env))


def _symkey(sym, svenv, svdepth):
    if isinstance(sym, SetVar):
        lvl = svenv.get(sym.name)
        return ("sv", sym.name) if lvl is None else ("X", lvl)
    return _ikey(sym, svenv, svdepth)


def _ikey(p: IndPred, svenv, svdepth):
    if not svenv and "key" in p.__dict__:
        return p.__dict__["key"]
    inner = dict(svenv)
    inner[p.set_var] = svdepth
    return ("I", _fkey(p.body, {p.ind_var: 0}, 1, inner, svdepth + 1))


def _fkey(f: Formula, env, depth, svenv, svdepth):
    if isinstance(f, (Pred, NotPred)):
        tag = "P" if isinstance(f, Pred) else "~P"
        return (tag, _symkey(f.sym, svenv, svdepth), _tkey(f.arg, env))
    if isinstance(f, TERM_ATOMS):
        return (type(f).__name__, _tkey(f.left, env), _tkey(f.right, env))
    if isinstance(f, (Or, And)):
        return (type(f).__name__,
                _fkey(f.left, env, depth, svenv, svdepth),
                _fkey(f.right, env, depth, svenv, svdepth))
    if isinstance(f, (Exists, Forall)):
        inner = dict(env)
        inner[f.var] = depth
        return (type(f).__name__, _fkey(f.body, inner, depth + 1, svenv, svdepth))
    raise TypeError(f"not a formula: {f!r}")


def alpha_equal(a: Formula, b: Formula) -> bool:
    return a.key == b.key


# ---------------------------------------------------------------------------
# variables

def free_vars(f: Formula) -> frozenset:
    if isinstance(f, PRED_ATOMS):
        return term_vars(f.arg)
    if isinstance(f, TERM_ATOMS):
        return term_vars(f.left) | term_vars(f.right)
    if isinstance(f, (Or, And)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def all_vars(f: Formula) -> frozenset:
    """Free and bound variable names."""
    if isinstance(f, (Exists, Forall)):
        return all_vars(f.body) | {f.var}
    if isinstance(f, (Or, And)):
        return all_vars(f.left) | all_vars(f.right)
    return free_vars(f)


def free_set_vars(f: Formula) -> frozenset:
    """Set variables occurring free, including parameters of template predicates."""
    if isinstance(f, PRED_ATOMS):
        if isinstance(f.sym, SetVar):
            return frozenset([f.sym.name])
        return f.sym.params
    if isinstance(f, TERM_ATOMS):
        return frozenset()
    if isinstance(f, (Or, And)):
        return free_set_vars(f.left) | free_set_vars(f.right)
    return free_set_vars(f.body)


_FRESH_RE = re.compile(r"^(.*?)(\d+)$")


def fresh_var(avoid: Iterable[str], base: str = "x") -> str:
    """First of base0, base1, ... not in `avoid`."""
    avoid = set(avoid)
    m = _FRESH_RE.match(base)
    if m and m.group(1):
        base = m.group(1)
    i = 0
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


# ---------------------------------------------------------------------------
# substitution

def subst(f: Formula, theta: Mapping[str, Term]) -> Formula:
    """Capture-avoiding simultaneous substitution of terms for variables."""
    theta = {k: v for k, v in theta.items() if v != Var(k)}
    if not theta:
        return f
    return _subst(f, theta)


def _subst(f, theta):
    if not theta:
        return f
    if isinstance(f, PRED_ATOMS):
        return type(f)(f.sym, subst_term(f.arg, theta))
    if isinstance(f, TERM_ATOMS):
        return type(f)(subst_term(f.left, theta), subst_term(f.right, theta))
    if isinstance(f, (Or, And)):
        return type(f)(_subst(f.left, theta), _subst(f.right, theta))
    fv = free_vars(f.body)
    inner = {k: v for k, v in theta.items() if k != f.var and k in fv}
    if not inner:
        return f
    incoming = set()
    for t in inner.values():
        incoming |= term_vars(t)
    var = f.var
    if var in incoming:
        var = fresh_var(incoming | fv | set(inner), base=f.var)
        inner[f.var] = Var(var)
    return type(f)(var, _subst(f.body, inner))


@dataclass(frozen=True)
class Abs:
    """A unary predicate given by a formula: lambda var. body."""
    var: str
    body: Formula

    @staticmethod
    def of_pred(sym: Sym, var: str = "z") -> "Abs":
        return Abs(var, Pred(sym, Var(var)))

    def __call__(self, t: Term) -> Formula:
        return subst(self.body, {self.var: t})

    def free_vars(self) -> frozenset:
        return free_vars(self.body) - {self.var}


def subst_pred(f: Formula, mapping: Mapping[str, Abs]) -> Formula:
    """Replace set variables by abstractions; negated atoms get the dual."""
    mapping = {k: v for k, v in mapping.items() if k in free_set_vars(f)}
    if not mapping:
        return f
    outside = set()
    for a in mapping.values():
        outside |= a.free_vars()
    return _subst_pred(f, mapping, outside)


def _subst_pred(f, mapping, outside):
    if isinstance(f, PRED_ATOMS):
        sym = f.sym
        if isinstance(sym, SetVar):
            if sym.name not in mapping:
                return f
            g = mapping[sym.name](f.arg)
            return g if isinstance(f, Pred) else negate(g)
        if not (sym.params & set(mapping)):
            return f
        return type(f)(_subst_pred_in_ind(sym, mapping), f.arg)
    if isinstance(f, TERM_ATOMS):
        return f
    if isinstance(f, (Or, And)):
        return type(f)(_subst_pred(f.left, mapping, outside),
                       _subst_pred(f.right, mapping, outside))
    var, body = f.var, f.body
    if var in outside:
        new = fresh_var(outside | all_vars(body), base=var)
        body = subst(body, {var: Var(new)})
        var = new
    return type(f)(var, _subst_pred(body, mapping, outside))


def _subst_pred_in_ind(p: IndPred, mapping) -> IndPred:
    inner = {k: v for k, v in mapping.items() if k != p.set_var and k in p.params}
    stray = set()
    for a in inner.values():
        stray |= a.free_vars()
    if stray:
        raise IllFormedBody(f"abstraction with free variables {sorted(stray)} "
                            f"cannot enter the body of {p.name}")
    body = subst_pred(p.body, inner)
    suffix = "_".join(_abs_label(inner[k]) for k in sorted(inner))
    params = free_set_vars(body) - {p.set_var}
    return IndPred(body, p.set_var, p.ind_var, f"{p.name}_{suffix}", frozenset(params))


def _abs_label(a: Abs) -> str:
    b = a.body
    if isinstance(b, Pred) and b.arg == Var(a.var):
        return str(b.sym.name)
    return "L"


def flip_set_var(f: Formula, X: str) -> Formula:
    """Swap X(t) and not X(t) throughout (the substitution of not-X for X)."""
    if isinstance(f, PRED_ATOMS):
        if isinstance(f.sym, SetVar) and f.sym.name == X:
            return (NotPred if isinstance(f, Pred) else Pred)(f.sym, f.arg)
        return f
    if isinstance(f, TERM_ATOMS):
        return f
    if isinstance(f, (Or, And)):
        return type(f)(flip_set_var(f.left, X), flip_set_var(f.right, X))
    return type(f)(f.var, flip_set_var(f.body, X))


# ---------------------------------------------------------------------------
# negation, positivity

_DUAL = {Pred: NotPred, NotPred: Pred, Eq: NotEq, NotEq: Eq, Lt: NotLt, NotLt: Lt,
         Or: And, And: Or, Exists: Forall, Forall: Exists}


def negate(f: Formula) -> Formula:
    """De Morgan dual; the result is again in normal form."""
    cls = _DUAL[type(f)]
    if isinstance(f, PRED_ATOMS):
        return cls(f.sym, f.arg)
    if isinstance(f, TERM_ATOMS):
        return cls(f.left, f.right)
    if isinstance(f, (Or, And)):
        return cls(negate(f.left), negate(f.right))
    return cls(f.var, negate(f.body))


def is_positive(f: Formula, X: str, _polarity: bool = True) -> bool:
    """No negative occurrence of X.

    Occurrences inside the body of a (template) inductive predicate count with
    the polarity of the atom they sit under.
    """
    if isinstance(f, PRED_ATOMS):
        pol = _polarity if isinstance(f, Pred) else not _polarity
        sym = f.sym
        if isinstance(sym, SetVar):
            return sym.name != X or pol
        if X in sym.params and X != sym.set_var:
            return is_positive(sym.body, X, pol)
        return True
    if isinstance(f, TERM_ATOMS):
        return True
    if isinstance(f, (Or, And)):
        return is_positive(f.left, X, _polarity) and is_positive(f.right, X, _polarity)
    return is_positive(f.body, X, _polarity)


def mk_ind_pred(body: Formula, X: str, x: str, name: str = "I",
                params: Iterable[str] = ()) -> IndPred:
    params = frozenset(params)
    if not is_positive(body, X):
        raise NotPositive(f"{name}: {X} occurs negatively in {body}")
    stray = free_vars(body) - {x}
    if stray:
        raise IllFormedBody(f"{name}: free variables {sorted(stray)} besides {x}")
    stray_sets = free_set_vars(body) - {X} - params
    if stray_sets:
        raise IllFormedBody(f"{name}: free set variables {sorted(stray_sets)}")
    return IndPred(body, X, x, name, frozenset(free_set_vars(body) - {X}))


def gfp_dual(body: Formula, X: str, x: str, name: str = "J") -> Formula:
    """The greatest fixed point of `body`, as not I_{not body(not X, x)} (x)."""
    if not is_positive(body, X):
        raise NotPositive(f"{X} occurs negatively in {body}")
    inner = negate(flip_set_var(body, X))
    return NotPred(mk_ind_pred(inner, X, x, name), Var(x))


# ---------------------------------------------------------------------------
# inductive predicates occurring in formulas, and their order

def preds_in(f: Formula) -> frozenset:
    """Inductive predicates occurring directly in f (not inside their bodies)."""
    if isinstance(f, PRED_ATOMS):
        return frozenset([f.sym]) if isinstance(f.sym, IndPred) else frozenset()
    if isinstance(f, TERM_ATOMS):
        return frozenset()
    if isinstance(f, (Or, And)):
        return preds_in(f.left) | preds_in(f.right)
    return preds_in(f.body)


def positive_preds_in(f: Formula) -> frozenset:
    if isinstance(f, Pred):
        return frozenset([f.sym]) if isinstance(f.sym, IndPred) else frozenset()
    if isinstance(f, ATOMS):
        return frozenset()
    if isinstance(f, (Or, And)):
        return positive_preds_in(f.left) | positive_preds_in(f.right)
    return positive_preds_in(f.body)


def below(p: IndPred) -> frozenset:
    """All predicates strictly below p in the transitive occurs-in order."""
    seen = set()
    todo = list(preds_in(p.body))
    while todo:
        q = todo.pop()
        if q in seen:
            continue
        seen.add(q)
        todo.extend(preds_in(q.body))
    return frozenset(seen)


def all_preds(formulas: Iterable[Formula]) -> frozenset:
    """Predicates occurring in the formulas, closed downward."""
    out = set()
    for f in formulas:
        for p in preds_in(f):
            out.add(p)
            out |= below(p)
    return frozenset(out)


def height(p: IndPred) -> int:
    inner = preds_in(p.body)
    return 1 + max((height(q) for q in inner), default=0)


def canonical(p: IndPred) -> str:
    return repr(p.key)


def pred_rank(p: IndPred):
    """Sort key of a linear extension of the occurs-in order."""
    return (height(p), canonical(p))


def pred_order(a: IndPred, b: IndPred, total: bool = False) -> str:
    """One of 'below', 'above', 'equal', 'incomparable'."""
    if a == b:
        return "equal"
    if a in below(b):
        return "below"
    if b in below(a):
        return "above"
    if not total:
        return "incomparable"
    return "below" if pred_rank(a) < pred_rank(b) else "above"


def greatest_pred(preds: Iterable[IndPred]) -> Optional[IndPred]:
    preds = list(preds)
    if not preds:
        return None
    return max(preds, key=pred_rank)


def map_formula(f: Formula, fn: Callable[[Formula], Optional[Formula]]) -> Formula:
    """Bottom-up rewrite; fn returns a replacement or None."""
    r = fn(f)
    if r is not None:
        return r
    if isinstance(f, (Or, And)):
        return type(f)(map_formula(f.left, fn), map_formula(f.right, fn))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, map_formula(f.body, fn))
    return f


def size(f: Formula) -> int:
    if isinstance(f, (Or, And)):
        return 1 + size(f.left) + size(f.right)
    if isinstance(f, (Exists, Forall)):
        return 1 + size(f.body)
    return 1
