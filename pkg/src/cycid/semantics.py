"""Bounded evaluation in the standard model, approximant tables, fixpoint-law
checks, and the countermodel walk through a preproof.

Quantifiers range over {0..B}.  Every verdict comes with an exactness flag: a
verdict is exact when it cannot be changed by values above B.  Quantifiers are
exact when a witness settles them, or when the body is guarded, i.e. an
equation or inequation pins the bound variable at or below B.  Inductive atoms
are exact when the table says so (see ApproximantTable.exact).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Mapping, Optional, Tuple

from .calculus import HYP, Sequent, quant_aux, resolve_principal
from .syntax import (
    And, Eq, Exists, Formula, IndPred, Lt, NotEq, NotLt, NotPred, Or,
    Plus, Pred, SetVar, Succ, Term, Times, Var, Zero, all_preds,
    greatest_pred, positive_preds_in, pred_rank, term_vars,
)

Verdict = Tuple[bool, bool]  # (value, exact)


class SemanticsError(Exception):
    pass


class UnassignedVariable(SemanticsError):
    pass


class MissingTable(SemanticsError):
    pass


class LawViolated(SemanticsError):
    def __init__(self, detail, exact=True):
        super().__init__(detail)
        self.detail, self.exact = detail, exact


class RootNotFalse(SemanticsError):
    pass


class BoundLimited(SemanticsError):
    pass


@dataclass(frozen=True)
class Universe:
    bound: int

    def __post_init__(self):
        if self.bound < 0:
            raise ValueError("bound must be >= 0")

    @property
    def elements(self) -> range:
        return range(self.bound + 1)


def eval_term(rho: Mapping[str, int], t: Term) -> int:
    if isinstance(t, Var):
        try:
            return rho[t.name]
        except KeyError:
            raise UnassignedVariable(t.name) from None
    if isinstance(t, Zero):
        return 0
    if isinstance(t, Succ):
        return eval_term(rho, t.arg) + 1
    a, b = eval_term(rho, t.left), eval_term(rho, t.right)
    return a + b if isinstance(t, Plus) else a * b


# ---------------------------------------------------------------------------
# Cantor pairing, as arithmetic helpers (no new function symbols)

def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(n: int) -> Tuple[int, int]:
    w = 0
    while (w + 1) * (w + 2) // 2 <= n:
        w += 1
    b = n - w * (w + 1) // 2
    return w - b, b


def pairing_formula(z: Term, a: Term, b: Term) -> Formula:
    """z = <a, b>, written as 2z = (a+b)(a+b+1) + 2b."""
    s = Plus(a, b)
    return Eq(Plus(z, z), Plus(Times(s, Succ(s)), Plus(b, b)))


# ---------------------------------------------------------------------------
# guards

def _dominated(t: Term, y: str) -> bool:
    """t >= y for every value of y."""
    if isinstance(t, Var):
        return t.name == y
    if isinstance(t, Succ):
        return _dominated(t.arg, y)
    if isinstance(t, Plus):
        return _dominated(t.left, y) or _dominated(t.right, y)
    return False


def _pins(a: Term, b: Term, y: str, rho, slack: int, B: int) -> bool:
    if not _dominated(a, y) or y in term_vars(b):
        return False
    try:
        return eval_term(rho, b) <= B + slack
    except UnassignedVariable:
        return False


def guarded(body: Formula, y: str, rho, B: int, universal: bool) -> bool:
    """Every value of y above B makes the body false (for exists) or true
    (for forall), by an equation or inequation at the top of the body."""
    conj, disj = (Or, And) if universal else (And, Or)
    if isinstance(body, conj):
        return guarded(body.left, y, rho, B, universal) or guarded(body.right, y, rho, B, universal)
    if isinstance(body, disj):
        return guarded(body.left, y, rho, B, universal) and guarded(body.right, y, rho, B, universal)
    eq, lt = (NotEq, NotLt) if universal else (Eq, Lt)
    if isinstance(body, eq):
        return (_pins(body.left, body.right, y, rho, 0, B)
                or _pins(body.right, body.left, y, rho, 0, B))
    if isinstance(body, lt):
        return _pins(body.left, body.right, y, rho, 1, B)
    return False


# ---------------------------------------------------------------------------
# tables

@dataclass
class ApproximantTable:
    """Stages F^0(empty) = {}, F^1(empty), ... on {0..B} until stable.

    exact holds the elements whose membership verdict is certain to agree
    with the unbounded least fixed point.
    """
    pred: IndPred
    universe: Universe
    stages: List[FrozenSet[int]]
    entry_stage: Dict[int, int]
    fixpoint: FrozenSet[int]
    exact: FrozenSet[int] = frozenset()

    @property
    def closure_stage(self) -> int:
        return len(self.stages) - 1

    def stage_set(self, k: int) -> FrozenSet[int]:
        return self.stages[min(k, len(self.stages) - 1)]

    def lookup(self, v: int) -> Verdict:
        if v > self.universe.bound:
            return False, False
        return v in self.fixpoint, v in self.exact


class _Env:
    __slots__ = ("sets", "stage")

    def __init__(self, sets=None, stage=None):
        self.sets = sets or {}    # set var -> (members, exact members-or-None)
        self.stage = stage        # (IndPred, k): positive atoms read at stage k


class Model:
    """Bounded standard model with lazily computed approximant tables."""

    def __init__(self, bound: int, tables: Optional[Dict[IndPred, ApproximantTable]] = None,
                 auto: bool = True):
        self.universe = Universe(bound)
        self.B = bound
        self.tables: Dict[IndPred, ApproximantTable] = dict(tables or {})
        self.auto = auto

    # -- tables
    def table(self, pred: IndPred) -> ApproximantTable:
        t = self.tables.get(pred)
        if t is None:
            if not self.auto:
                raise MissingTable(pred.name)
            for q in sorted(all_preds([Pred(pred, Zero())]), key=pred_rank):
                if q not in self.tables:
                    self.tables[q] = self._iterate(q)
            t = self.tables[pred]
        return t

    def operator(self, pred: IndPred, A, exact=None) -> Dict[int, Verdict]:
        """F(A) with exactness, as element -> (member?, exact?)."""
        env = _Env({pred.set_var: (frozenset(A), exact)})
        return {m: self._ev(pred.body, {pred.ind_var: m}, env) for m in self.universe.elements}

    def apply(self, pred: IndPred, A) -> FrozenSet[int]:
        return frozenset(m for m, (v, _) in self.operator(pred, A).items() if v)

    def _iterate(self, pred: IndPred) -> ApproximantTable:
        stages = [frozenset()]
        while True:
            nxt = self.apply(pred, stages[-1])
            if nxt == stages[-1]:
                break
            stages.append(nxt)
            if len(stages) > 4 * (self.B + 2) + 2:
                raise SemanticsError(f"{pred.name}: iteration does not stabilise")
        fix = stages[-1]
        entry = {}
        for k, s in enumerate(stages):
            for m in s:
                entry.setdefault(m, k)
        table = ApproximantTable(pred, self.universe, stages, entry, fix)
        table.exact = self._exactness(pred, fix)
        return table

    def _exactness(self, pred: IndPred, fix: FrozenSet[int]) -> FrozenSet[int]:
        """Members certain by a well-founded argument (least fixed point),
        non-members certain by a consistency argument (greatest fixed point);
        alternate until both settle."""
        outside = frozenset(self.universe.elements) - fix
        mem: FrozenSet[int] = frozenset()
        while True:
            non = outside
            while True:
                res = self.operator(pred, fix, mem | non)
                keep = frozenset(m for m in non if res[m] == (False, True))
                if keep == non:
                    break
                non = keep
            new_mem = mem
            while True:
                res = self.operator(pred, fix, new_mem | non)
                grown = frozenset(m for m in fix if res[m] == (True, True))
                if grown <= new_mem:
                    break
                new_mem = new_mem | grown
            if new_mem == mem:
                return mem | non
            mem = new_mem

    # -- evaluation
    def eval(self, f: Formula, rho: Optional[Mapping[str, int]] = None,
             sets: Optional[Mapping[str, FrozenSet[int]]] = None,
             stage: Optional[Tuple[IndPred, int]] = None) -> Verdict:
        env = _Env({k: (frozenset(v), None) for k, v in (sets or {}).items()}, stage)
        return self._ev(f, dict(rho or {}), env)

    def holds(self, f: Formula, rho=None, **kw) -> bool:
        return self.eval(f, rho, **kw)[0]

    def _atom(self, f, rho, env) -> Verdict:
        v = eval_term(rho, f.arg)
        sym = f.sym
        if isinstance(sym, SetVar):
            if sym.name not in env.sets:
                raise SemanticsError(f"unbound set variable {sym.name}")
            members, exact = env.sets[sym.name]
            if v > self.B:
                return False, False
            return v in members, exact is None or v in exact
        if env.stage is not None and env.stage[0] == sym and isinstance(f, Pred):
            t = self.table(sym)
            return (v <= self.B and v in t.stage_set(env.stage[1])), v <= self.B
        return self.table(sym).lookup(v)

    def _ev(self, f, rho, env) -> Verdict:
        if isinstance(f, Pred):
            return self._atom(f, rho, env)
        if isinstance(f, NotPred):
            v, e = self._atom(f, rho, env)
            return not v, e
        if isinstance(f, (Eq, NotEq)):
            v = eval_term(rho, f.left) == eval_term(rho, f.right)
            return (v if isinstance(f, Eq) else not v), True
        if isinstance(f, (Lt, NotLt)):
            v = eval_term(rho, f.left) < eval_term(rho, f.right)
            return (v if isinstance(f, Lt) else not v), True
        if isinstance(f, (Or, And)):
            settle = isinstance(f, Or)   # the value that settles the connective
            a = self._ev(f.left, rho, env)
            if a == (settle, True):
                return a
            b = self._ev(f.right, rho, env)
            if b == (settle, True):
                return b
            if a[0] == settle or b[0] == settle:
                return settle, False
            return not settle, a[1] and b[1]
        settle = isinstance(f, Exists)
        inner = dict(rho)
        all_exact = True
        found = False
        for n in self.universe.elements:
            inner[f.var] = n
            v, e = self._ev(f.body, inner, env)
            if v == settle:
                if e:
                    return settle, True
                found = True
            all_exact = all_exact and e
        if found:
            return settle, False
        return not settle, all_exact and guarded(f.body, f.var, rho, self.B, not settle)

    # -- sequents
    def sequent_truth(self, s: Sequent, rho: Optional[Mapping[str, int]] = None) -> Verdict:
        """All assignments into {0..B} of the free variables (beyond rho)."""
        base = dict(rho or {})
        fv = sorted(s.free_vars() - set(base))
        value, exact = True, True
        for vals in itertools.product(self.universe.elements, repeat=len(fv)):
            r = dict(base, **dict(zip(fv, vals)))
            v, e = self.sequent_at(s, r)
            if not v:
                if e:
                    return False, True
                value = False
            exact = exact and e
        return value, exact

    def sequent_at(self, s: Sequent, rho) -> Verdict:
        """Truth of the sequent under one assignment, with exactness."""
        exact = True
        for f in s.ant:
            v, e = self._ev(f, rho, _Env())
            if (v, e) == (False, True):
                return True, True
            exact = exact and e
        for f in s.suc:
            v, e = self._ev(f, rho, _Env())
            if (v, e) == (True, True):
                return True, True
            exact = exact and e
        ants = all(self._ev(f, rho, _Env())[0] for f in s.ant)
        sucs = any(self._ev(f, rho, _Env())[0] for f in s.suc)
        return (not ants) or sucs, exact

    # -- stages
    def stage(self, f: Formula, rho) -> Optional[int]:
        """Least k such that f holds when the positive occurrences of its
        greatest positive inductive predicate are read from stage k; 0 when
        f has none; None when f is false."""
        top = greatest_pred(positive_preds_in(f))
        if top is None:
            return 0 if self._ev(f, rho, _Env())[0] else None
        t = self.table(top)
        for k in range(len(t.stages)):
            if self._ev(f, rho, _Env(stage=(top, k)))[0]:
                return k
        return None


def eval_formula(rho, f: Formula, universe: Universe,
                 tables: Mapping[IndPred, ApproximantTable]) -> Verdict:
    return Model(universe.bound, dict(tables), auto=False).eval(f, rho)


def approximant_iterate(pred: IndPred, universe: Universe, model: Optional[Model] = None) -> ApproximantTable:
    model = model or Model(universe.bound)
    return model.table(pred)


def build_tables(preds, universe: Universe) -> Dict[IndPred, ApproximantTable]:
    m = Model(universe.bound)
    for p in preds:
        m.table(p)
    return dict(m.tables)


def closure_profile(pred: IndPred, universe: Universe, model: Optional[Model] = None) -> List[Tuple[int, FrozenSet[int]]]:
    """(stage, elements entering at that stage), in stage order."""
    t = approximant_iterate(pred, universe, model)
    out = []
    for k in range(1, len(t.stages)):
        new = t.stages[k] - t.stages[k - 1]
        if new:
            out.append((k, new))
    return out


def sequent_truth(s: Sequent, universe: Universe, model: Optional[Model] = None) -> Verdict:
    return (model or Model(universe.bound)).sequent_truth(s)


# ---------------------------------------------------------------------------
# fixpoint laws

@dataclass
class LawReport:
    pred: IndPred
    bound: int
    fixed: bool
    prefixed_checked: int
    prefixed_exhaustive: bool
    monotone_checked: int
    exact: bool


def _subsets(elems):
    elems = list(elems)
    for mask in range(1 << len(elems)):
        yield frozenset(e for i, e in enumerate(elems) if mask >> i & 1)


def fixpoint_laws(pred: IndPred, universe: Universe, model: Optional[Model] = None,
                  samples: int = 500, seed: int = 0, exhaustive_limit: int = 12) -> LawReport:
    """The fixpoint is a fixed point, lies below every pre-fixed set, and the
    operator is monotone (on {0..B}).  Raises LawViolated on failure."""
    m = model or Model(universe.bound)
    t = m.table(pred)
    elems = list(universe.elements)
    exact = all(e in t.exact for e in elems)
    if m.apply(pred, t.fixpoint) != t.fixpoint:
        raise LawViolated(f"{pred.name}: F(fix) != fix", exact)
    rng = random.Random(seed)

    def sample():
        return frozenset(e for e in elems if rng.random() < 0.5)

    exhaustive = universe.bound <= exhaustive_limit
    candidates = _subsets(elems) if exhaustive else (sample() for _ in range(samples))
    checked = 0
    for A in candidates:
        if m.apply(pred, A) <= A:
            checked += 1
            if not t.fixpoint <= A:
                raise LawViolated(f"{pred.name}: pre-fixed set {sorted(A)} misses "
                                  f"{sorted(t.fixpoint - A)}", exact)
    mono = 0
    if universe.bound <= 6:
        pairs = ((A, A | B) for A in _subsets(elems) for B in _subsets(sorted(set(elems) - A)))
    else:
        pairs = ((A, A | sample()) for A in (sample() for _ in range(samples)))
    for A, A2 in pairs:
        mono += 1
        if not m.apply(pred, A) <= m.apply(pred, A2):
            raise LawViolated(f"{pred.name}: not monotone at {sorted(A)} <= {sorted(A2)}", exact)
    return LawReport(pred, universe.bound, True, checked, exhaustive, mono, exact)


def gfp_brute_force(body: Formula, X: str, x: str, universe: Universe,
                    model: Optional[Model] = None) -> FrozenSet[int]:
    """Greatest fixed point by downward iteration from {0..B}."""
    m = model or Model(universe.bound)
    cur = frozenset(universe.elements)
    while True:
        nxt = frozenset(n for n in universe.elements
                        if m.holds(body, {x: n}, sets={X: cur}))
        if nxt == cur:
            return cur
        cur = nxt


# ---------------------------------------------------------------------------
# countermodel walk

@dataclass(frozen=True)
class WalkStep:
    node: str
    assignment: Tuple[Tuple[str, int], ...]
    stages: Tuple[Tuple[Formula, int], ...]   # antecedent formula -> stage

    def stage_of(self, f):
        return dict(self.stages).get(f)


@dataclass
class WalkResult:
    steps: List[WalkStep]
    verdict: str          # LoopDetected | StepLimit | StuckAtAxiom | OpenLeaf
    loop_start: Optional[int] = None
    increases: List[Tuple[int, Formula, Formula]] = field(default_factory=list)
    decreases: List[Tuple[int, Formula, Formula]] = field(default_factory=list)
    missed_decreases: List[Tuple[int, Formula, Formula]] = field(default_factory=list)

    @property
    def non_increasing(self) -> bool:
        return not self.increases


def _restrict(rho, names):
    return {k: v for k, v in rho.items() if k in names}


def _ext(rho, s: Sequent):
    r = dict(rho)
    for v in s.free_vars():
        r.setdefault(v, 0)
    return r


def countermodel_walk(p, rho0: Mapping[str, int], model: Model, max_steps: int = 1000) -> WalkResult:
    """Follow a branch of falsified sequents from the root.

    Each step picks a premiss and an assignment falsifying it, preferring
    witnesses at the least stage of the principal formula.  Stages of
    antecedent formulas are recorded; along trace edges between formulas
    with the same top predicate they should never increase, and should drop
    at left unfoldings.
    """
    from .trace import edge_trace_graph
    root = p.root_sequent
    rho = dict(rho0)
    fv = sorted(root.free_vars() - set(rho))
    chosen = None
    inexact = False
    for vals in itertools.product(model.universe.elements, repeat=len(fv)):
        r = dict(rho, **dict(zip(fv, vals)))
        v, e = model.sequent_at(root, r)
        if not v:
            if e:
                chosen = r
                break
            inexact = True
    if chosen is None:
        if inexact:
            raise BoundLimited("root is false only under inexact evaluation")
        raise RootNotFalse("root sequent is true under every assignment")
    rho = _restrict(chosen, root.free_vars())
    node = p.root
    steps: List[WalkStep] = []
    seen = {}
    result = WalkResult(steps, "StepLimit")

    def stages_of(s: Sequent, r):
        return tuple(sorted(((f, model.stage(f, r)) for f in s.ant), key=lambda x: str(x[0])))

    for _ in range(max_steps):
        n = p.nodes[node]
        s = n.sequent
        st = stages_of(s, rho)
        key = (node, tuple(sorted(_restrict(rho, s.free_vars()).items())), st)
        steps.append(WalkStep(node, tuple(sorted(rho.items())), st))
        if key in seen:
            result.verdict = "LoopDetected"
            result.loop_start = seen[key]
            return result
        seen[key] = len(steps) - 1
        if n.rule.tag == HYP:
            result.verdict = "OpenLeaf"
            return result
        if not n.children:
            result.verdict = "StuckAtAxiom"
            return result
        step = p.step(node)
        i, rho2 = _choose(step, rho, model)
        child = n.children[i]
        # stage bookkeeping along trace edges
        g = edge_trace_graph(step, i)
        cs = p.nodes[child].sequent
        for a, b, prog in g.edges:
            sa = model.stage(a, rho)
            sb = model.stage(b, rho2)
            ta = greatest_pred(positive_preds_in(a))
            tb = greatest_pred(positive_preds_in(b))
            if ta is None or ta != tb or sa is None or sb is None:
                continue
            k = len(steps) - 1
            if sb > sa:
                result.increases.append((k, a, b))
            elif sb < sa:
                result.decreases.append((k, a, b))
            elif prog and step.rule.tag == "idl":
                result.missed_decreases.append((k, a, b))
        node, rho = child, _restrict(rho2, cs.free_vars())
    return result


def _false_at(model: Model, s: Sequent, r) -> Optional[bool]:
    """True if s is falsified exactly under r; raises BoundLimited if the
    verdict is inexact and false."""
    v, e = model.sequent_at(s, r)
    if v:
        return False
    if not e:
        raise BoundLimited(f"inexact falsification of {s}")
    return True


def _choose(step, rho, model: Model):
    r = step.rule
    tag = r.tag
    prem = step.premisses
    if tag == "subst":
        r2 = {v: eval_term(rho, t) for v, t in r.theta_map.items()}
        for v in prem[0].free_vars():
            if v not in r2:
                r2[v] = rho.get(v, 0)
        return 0, r2
    f = resolve_principal(step)
    if tag == "cut":
        rc = _ext(rho, Sequent.of([f]))
        val, e = model.eval(f, rc)
        if not e:
            raise BoundLimited(f"cut formula {f} evaluated inexactly")
        return (1 if val else 0), rc
    if tag in ("exL", "allR"):
        y = r.eigen
        want = tag == "exL"
        target = model.stage(f, rho) if want else None
        for n in model.universe.elements:
            r2 = dict(rho)
            r2[y] = n
            aux = quant_aux(f, r)
            v, _ = model.eval(aux, r2)
            if v != want:
                continue
            if want and target is not None and model.stage(aux, r2) > target:
                continue
            if _false_at(model, prem[0], _ext(r2, prem[0])):
                return 0, _ext(r2, prem[0])
        raise BoundLimited(f"no falsifying eigenvalue for {tag} within the bound")
    if tag in ("orL", "idl") and f is not None:
        target = model.stage(f, rho)
        order = list(range(len(prem)))
        if tag == "orL":
            def aux_stage(i):
                g = f.left if i == 0 else f.right
                return model.stage(g, rho)
            good = [i for i in order if aux_stage(i) is not None and
                    (target is None or aux_stage(i) <= target)]
            order = good + [i for i in order if i not in good]
        for i in order:
            r2 = _ext(rho, prem[i])
            if _false_at(model, prem[i], r2):
                return i, r2
        raise SemanticsError(f"{tag}: no premiss falsified (rule unsound?)")
    for i in range(len(prem)):
        r2 = _ext(rho, prem[i])
        if _false_at(model, prem[i], r2):
            return i, r2
    raise SemanticsError(f"{tag}: no premiss falsified (rule unsound?)")
