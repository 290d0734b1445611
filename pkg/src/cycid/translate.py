"""Proof generators and the compiler from inductive to cyclic proofs.

Contexts are threaded through generated fragments: a fragment for formula phi
under contexts G, D derives G, phi[A] => D, phi[B] from hypothesis nodes
G, A(y) => D, B(y), one per mapped set variable, with y not free in G, D.
Fragments are glued to surrounding proofs with weakening.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .calculus import (
    CYCLIC, FINITARY, HYP, RuleInstance, Sequent, mk_theta,
    resolve_principal, xind_premiss_formulas,
)
from .proofs import CyclicProof, Node, ProofTree, as_graph, minimize, relabel, tree_of
from .syntax import (
    Abs, And, Eq, Exists, Forall, Formula, IndPred, NotPositive, Or,
    Pred, SetVar, Succ, Term, Var, ZERO, free_set_vars, free_vars, fresh_var,
    is_positive, subst, subst_pred, term_vars,
)

CONTEXT_NOTE = "contexts are threaded by weakening at fragment boundaries"


class _Builder:
    """Hash-consed node store with forward references for cycles."""

    def __init__(self, prefix: str = "g"):
        self.nodes: Dict[str, Node] = {}
        self.prefix = prefix
        self._cons: Dict[tuple, str] = {}
        self._n = 0

    def _label(self) -> str:
        label = f"{self.prefix}{self._n}"
        self._n += 1
        return label

    def seq(self, label: str) -> Sequent:
        return self.nodes[label].sequent

    def node(self, seq: Sequent, rule: RuleInstance, kids: Tuple[str, ...] = ()) -> str:
        key = (seq, rule, tuple(kids))
        if key in self._cons:
            return self._cons[key]
        label = self._label()
        self.nodes[label] = Node(seq, rule, tuple(kids))
        self._cons[key] = label
        return label

    def reserve(self, seq: Sequent) -> str:
        label = self._label()
        self.nodes[label] = Node(seq, RuleInstance(HYP, hyp="pending"), ())
        return label

    def fill(self, label: str, rule: RuleInstance, kids: Tuple[str, ...]):
        self.nodes[label] = Node(self.nodes[label].sequent, rule, tuple(kids))

    def weaken(self, seq: Sequent, child: str) -> str:
        if self.seq(child) == seq:
            return child
        return self.node(seq, RuleInstance("weaken"), (child,))

    def subst(self, seq: Sequent, theta: Mapping[str, Term], child: str) -> str:
        theta = {v: t for v, t in theta.items() if t != Var(v)}
        if not theta:
            return child
        return self.node(seq, RuleInstance("subst", theta=mk_theta(theta)), (child,))

    def graph(self, root: str, mode: str, comments=()) -> CyclicProof:
        g = CyclicProof(dict(self.nodes), root, mode, list(comments))
        keep = set(g.reachable())
        g.nodes = {k: v for k, v in g.nodes.items() if k in keep}
        return g


@dataclass(frozen=True)
class Hyp:
    """A node deriving G, A(var) => D, B(var)."""
    A: Abs
    B: Abs
    label: str
    var: str


def _seq_vars(*seqs: Sequent) -> set:
    out = set()
    for s in seqs:
        out |= s.free_vars()
    return out


class _Functor:
    def __init__(self, b: _Builder, mode: str):
        self.b = b
        self.mode = mode
        self.loops: Dict[tuple, str] = {}

    def derive(self, phi: Formula, G: frozenset, D: frozenset, maps: Mapping[str, Hyp]) -> str:
        """Label of a node deriving G, phi[A] => D, phi[B]."""
        live = {k: h for k, h in maps.items() if k in free_set_vars(phi)}
        for k in live:
            if not is_positive(phi, k):
                raise NotPositive(f"{k} occurs negatively in {phi}")
        A = {k: h.A for k, h in live.items()}
        B = {k: h.B for k, h in live.items()}
        fa, fb = subst_pred(phi, A), subst_pred(phi, B)
        concl = Sequent(G | {fa}, D | {fb})
        b = self.b
        if not live:
            return b.node(concl, RuleInstance("id", princ=fa))
        avoid = _seq_vars(concl) | {h.var for h in maps.values()} | _seq_vars(
            *(b.seq(h.label) for h in maps.values()))
        if isinstance(phi, Pred) and isinstance(phi.sym, SetVar):
            h = live[phi.sym.name]
            return b.subst(concl, {h.var: phi.arg}, h.label)
        if isinstance(phi, Or):
            la, ra = subst_pred(phi.left, A), subst_pred(phi.right, A)
            lb, rb = subst_pred(phi.left, B), subst_pred(phi.right, B)
            both = D | {lb, rb}
            left = b.weaken(Sequent(G | {la}, both), self.derive(phi.left, G, D, maps))
            right = b.weaken(Sequent(G | {ra}, both), self.derive(phi.right, G, D, maps))
            mid = b.node(Sequent(G | {fa}, both), RuleInstance("orL", princ=fa), (left, right))
            return b.node(concl, RuleInstance("orR", princ=fb), (mid,))
        if isinstance(phi, And):
            la, ra = subst_pred(phi.left, A), subst_pred(phi.right, A)
            lb, rb = subst_pred(phi.left, B), subst_pred(phi.right, B)
            both = G | {la, ra}
            left = b.weaken(Sequent(both, D | {lb}), self.derive(phi.left, G, D, maps))
            right = b.weaken(Sequent(both, D | {rb}), self.derive(phi.right, G, D, maps))
            mid = b.node(Sequent(both, D | {fb}), RuleInstance("andR", princ=fb), (left, right))
            return b.node(concl, RuleInstance("andL", princ=fa), (mid,))
        if isinstance(phi, (Exists, Forall)):
            w = fresh_var(avoid | free_vars(phi) | {phi.var}, base="w")
            body = subst(phi.body, {phi.var: Var(w)})
            ba, bb = subst_pred(body, A), subst_pred(body, B)
            inner = self.derive(body, G, D, maps)
            if isinstance(phi, Exists):
                mid = b.node(Sequent(G | {ba}, D | {fb}), RuleInstance("exR", princ=fb, term=Var(w)), (inner,))
                return b.node(concl, RuleInstance("exL", princ=fa, eigen=w), (mid,))
            mid = b.node(Sequent(G | {fa}, D | {bb}), RuleInstance("allL", princ=fa, term=Var(w)), (inner,))
            return b.node(concl, RuleInstance("allR", princ=fb, eigen=w), (mid,))
        if isinstance(phi, Pred) and isinstance(phi.sym, IndPred):
            return self._template(phi, G, D, maps, live, avoid)
        raise NotPositive(f"cannot map set variables through {phi}")

    def _template(self, phi, G, D, maps, live, avoid) -> str:
        b = self.b
        I = phi.sym
        A = {k: h.A for k, h in live.items()}
        B = {k: h.B for k, h in live.items()}
        IA = subst_pred(Pred(I, Var(I.ind_var)), A).sym
        IB = subst_pred(Pred(I, Var(I.ind_var)), B).sym
        u = phi.arg
        concl = Sequent(G | {Pred(IA, u)}, D | {Pred(IB, u)})
        # the body over a fresh variable z, with X left free
        z = fresh_var(avoid | term_vars(u), base="z")
        body = subst(I.body, {I.ind_var: Var(z)})
        if self.mode == FINITARY:
            inv = Pred(IB, Var(z))
            stepped, _ = xind_premiss_formulas(IA, z, inv)
            unfolded = IB.unfold(Var(z))
            inner_phi = subst_pred(body, {I.set_var: Abs.of_pred(IB)})
            inner = self.derive(inner_phi, G, D, maps)
            w = b.weaken(Sequent(G | {stepped}, D | {Pred(IB, u), unfolded}), inner)
            left = b.node(Sequent(G | {stepped}, D | {Pred(IB, u), inv}),
                          RuleInstance("idr", princ=inv), (w,))
            right = b.node(Sequent(G | {Pred(IB, u)}, D | {Pred(IB, u)}),
                           RuleInstance("id", princ=Pred(IB, u)))
            return b.node(concl, RuleInstance("xind", princ=Pred(IA, u), eigen=z, inv=inv, pred=IA),
                          (left, right))
        key = (IA, IB, G, D, tuple(sorted(maps.items(), key=lambda kv: kv[0])))
        if key in self.loops:
            loop, z = self.loops[key]
        else:
            za, zb = Pred(IA, Var(z)), Pred(IB, Var(z))
            loop = b.reserve(Sequent(G | {za}, D | {zb}))
            self.loops[key] = (loop, z)
            ua = IA.unfold(Var(z))
            sub = dict(maps)
            sub[I.set_var] = Hyp(Abs.of_pred(IA), Abs.of_pred(IB), loop, z)
            inner = self.derive(body, G, D, sub)
            right = b.node(Sequent(G | {ua}, D | {zb}), RuleInstance("idr", princ=zb), (inner,))
            b.fill(loop, RuleInstance("idl", princ=za, pred=IA), (right,))
        return b.subst(concl, {z: u}, loop)


def _hyp_node(b: _Builder, G, D, A: Abs, B: Abs, var: str, name: str) -> str:
    seq = Sequent(G | {A(Var(var))}, D | {B(Var(var))})
    return b.node(seq, RuleInstance(HYP, hyp=name))


def functoriality(phi: Formula, maps: Mapping[str, Tuple[Abs, Abs]], mode: str = FINITARY,
                  gamma: Iterable[Formula] = (), delta: Iterable[Formula] = (),
                  hyp_names: Optional[Mapping[str, str]] = None) -> CyclicProof:
    """Derive G, phi[A] => D, phi[B] from open leaves G, A(y) => D, B(y)."""
    G, D = frozenset(gamma), frozenset(delta)
    for k in maps:
        if not is_positive(phi, k):
            raise NotPositive(f"{k} occurs negatively in {phi}")
    b = _Builder()
    avoid = _seq_vars(Sequent(G | {phi}, D))
    hyps = {}
    for k in sorted(maps):
        A, B = maps[k]
        y = fresh_var(avoid | A.free_vars() | B.free_vars(), base="y")
        avoid.add(y)
        name = (hyp_names or {}).get(k, f"hyp_{k}")
        hyps[k] = Hyp(A, B, _hyp_node(b, G, D, A, B, y, name), y)
    root = _Functor(b, mode).derive(phi, G, D, hyps)
    return b.graph(root, mode, [CONTEXT_NOTE] if (G or D) else [])


def functoriality_finite(phi: Formula, Y: str, Z: str, **kw) -> ProofTree:
    """phi(Y) => phi(Z) from Y(y) => Z(y), without left unfolding."""
    g = functoriality(phi, {Y: (Abs.of_pred(SetVar(Y)), Abs.of_pred(SetVar(Z)))}, FINITARY, **kw)
    return tree_of(g)


def functoriality_cyclic(phi: Formula, Y: str, Z: str, **kw) -> CyclicProof:
    """phi(Y) => phi(Z) from Y(y) => Z(y), looping on left unfoldings."""
    return functoriality(phi, {Y: (Abs.of_pred(SetVar(Y)), Abs.of_pred(SetVar(Z)))}, CYCLIC, **kw)


def close_hypotheses(p: CyclicProof, rule: RuleInstance = RuleInstance("nAxiom")) -> CyclicProof:
    """Replace every open leaf by `rule` (an axiom)."""
    nodes = {k: (Node(n.sequent, rule, ()) if n.rule.tag == HYP else n) for k, n in p.nodes.items()}
    return CyclicProof(nodes, p.root, p.mode, list(p.comments))


# ---------------------------------------------------------------------------
# derived rules

def _ind_left(b: _Builder, pred: IndPred, t: Term, G: frozenset, D: frozenset) -> str:
    """Finitary derivation of G, I(t) => D from the open leaf G, phi(I, t) => D."""
    avoid = _seq_vars(Sequent(G | {Pred(pred, t)}, D))
    y = fresh_var(avoid, base="y")
    z = fresh_var(avoid | {y}, base="z")
    inv = pred.unfold(Var(y))
    stepped, _ = xind_premiss_formulas(pred, y, inv)
    # stepped = phi(psi, y) with psi = phi(I, -); map X from psi to I
    A = Abs(z, pred.unfold(Var(z)))
    B = Abs.of_pred(pred, z)
    hyp = b.node(Sequent.of([A(Var(z))], [B(Var(z))]), RuleInstance("idr", princ=B(Var(z))),
                 (b.node(Sequent.of([A(Var(z))], [A(Var(z))]), RuleInstance("id", princ=A(Var(z)))),))
    body = subst(pred.body, {pred.ind_var: Var(y)})
    f = _Functor(b, FINITARY)
    inner = f.derive(body, frozenset(), frozenset(), {pred.set_var: Hyp(A, B, hyp, z)})
    left = b.weaken(Sequent(G | {stepped}, D | {inv}), inner)
    leaf = b.node(Sequent(G | {pred.unfold(t)}, D), RuleInstance(HYP, hyp="unfolded"))
    return b.node(Sequent(G | {Pred(pred, t)}, D),
                  RuleInstance("xind", princ=Pred(pred, t), eigen=y, inv=inv, pred=pred),
                  (left, leaf))


def derive_idl(pred: IndPred, t: Optional[Term] = None, gamma=(), delta=()) -> ProofTree:
    """The left unfolding rule as a finitary derivation: G, I(t) => D from
    the open leaf G, phi(I, t) => D, via xind with invariant phi(I, -)."""
    t = t if t is not None else Var("x")
    b = _Builder()
    root = _ind_left(b, pred, t, frozenset(gamma), frozenset(delta))
    return tree_of(b.graph(root, FINITARY))


def _ind_from_n(b: _Builder, phi: Formula, x: str, t: Term, G: frozenset, D: frozenset,
                base: str, step: str, step_var: Optional[str] = None,
                base_label: Optional[str] = None, step_label: Optional[str] = None) -> str:
    """The N-induction scaffold; open leaves unless premiss labels are given."""
    from .library import nat
    N = nat()
    at = lambda s: subst(phi, {x: s})
    avoid = _seq_vars(Sequent(G, D | {at(t)})) | free_vars(phi) | {x} | term_vars(t)
    y = step_var or fresh_var(avoid, base="y")
    avoid.add(y)
    z = fresh_var(avoid, base="z")
    w = fresh_var(avoid | {z}, base="w")
    hu = fresh_var(avoid | {z, w}, base="u")
    hv = fresh_var(avoid | {z, w, hu}, base="v")
    template = at(Var(hv))
    Nz, Nw = Pred(N, Var(z)), Pred(N, Var(w))
    loop = b.reserve(Sequent(G | {Nz}, D | {at(Var(z))}))
    # zero case
    base_seq = Sequent(G, D | {at(ZERO)})
    base_leaf = (b.weaken(base_seq, base_label) if base_label is not None
                 else b.node(base_seq, RuleInstance(HYP, hyp=base)))
    eq0 = Eq(Var(z), ZERO)
    zero = b.node(Sequent(G | {eq0}, D | {at(Var(z))}),
                  RuleInstance("eqL", princ=eq0, template=template, holes=(hu, hv)), (base_leaf,))
    # successor case
    sw = Succ(Var(w))
    step_seq = Sequent(G | {at(Var(y))}, D | {at(Succ(Var(y)))})
    step_leaf = (b.weaken(step_seq, step_label) if step_label is not None
                 else b.node(step_seq, RuleInstance(HYP, hyp=step)))
    step_inst = b.subst(Sequent(G | {at(Var(w))}, D | {at(sw)}), {y: Var(w)}, step_leaf)
    right = b.weaken(Sequent(G | {Nw, at(Var(w))}, D | {at(sw)}), step_inst)
    back = b.subst(Sequent(G | {Nw}, D | {at(Var(w))}), {z: Var(w)}, loop)
    left = b.weaken(Sequent(G | {Nw}, D | {at(sw), at(Var(w))}), back)
    cut = b.node(Sequent(G | {Nw}, D | {at(sw)}), RuleInstance("cut", princ=at(Var(w))), (left, right))
    eqs = Eq(Var(z), sw)
    rew = b.node(Sequent(G | {Nw, eqs}, D | {at(Var(z))}),
                 RuleInstance("eqL", princ=eqs, template=template, holes=(hu, hv)), (cut,))
    conj = And(Nw, eqs)
    andl = b.node(Sequent(G | {conj}, D | {at(Var(z))}), RuleInstance("andL", princ=conj), (rew,))
    unfolded = N.unfold(Var(z))
    ex = unfolded.right
    exl = b.node(Sequent(G | {ex}, D | {at(Var(z))}),
                 RuleInstance("exL", princ=ex, eigen=w), (andl,))
    orl = b.node(Sequent(G | {unfolded}, D | {at(Var(z))}),
                 RuleInstance("orL", princ=unfolded), (zero, exl))
    b.fill(loop, RuleInstance("idl", princ=Nz, pred=N), (orl,))
    # root: cut against N(t)
    Nt = Pred(N, t)
    inst = b.subst(Sequent(G | {Nt}, D | {at(t)}), {z: t}, loop)
    nax = b.node(Sequent(G, D | {at(t), Nt}), RuleInstance("nAxiom", princ=Nt))
    return b.node(Sequent(G, D | {at(t)}), RuleInstance("cut", princ=Nt), (nax, inst))


def derive_ind_from_n(phi: Formula, x: str, t: Term, gamma=(), delta=(),
                      step_var: Optional[str] = None) -> CyclicProof:
    """G => D, phi(t) from open leaves G => D, phi(0) and
    G, phi(y) => D, phi(s y), by a cycle on the unfolding of N."""
    b = _Builder()
    root = _ind_from_n(b, phi, x, t, frozenset(gamma), frozenset(delta), "base", "step", step_var)
    return b.graph(root, CYCLIC)


# ---------------------------------------------------------------------------
# induction to cycles

def _xind_to_cycle(b: _Builder, conc: Sequent, rule: RuleInstance, left: str, right: str) -> str:
    """Replace an xind step by a cut against a cycle on idl."""
    f = rule.princ
    I, t, y, psi = f.sym, f.arg, rule.eigen, rule.inv
    C, D = conc.ant, conc.suc
    psi_t = subst(psi, {y: t})
    stepped, _ = xind_premiss_formulas(I, y, psi)
    unfolded = I.unfold(Var(y))
    loop = b.reserve(Sequent(C | {Pred(I, Var(y))}, D | {psi}))
    body = subst(I.body, {I.ind_var: Var(y)})
    fun = _Functor(b, CYCLIC).derive(
        body, C, D, {I.set_var: Hyp(Abs.of_pred(I, y), Abs(y, psi), loop, y)})
    cut_l = b.weaken(Sequent(C | {unfolded}, D | {psi, stepped}), fun)
    cut_r = b.weaken(Sequent(C | {unfolded, stepped}, D | {psi}), left)
    inner = b.node(Sequent(C | {unfolded}, D | {psi}), RuleInstance("cut", princ=stepped), (cut_l, cut_r))
    b.fill(loop, RuleInstance("idl", princ=Pred(I, Var(y)), pred=I), (inner,))
    top = b.subst(Sequent(C, D | {psi_t}), {y: t}, loop)
    rhs = b.weaken(Sequent(C | {psi_t}, D), right)
    return b.node(conc, RuleInstance("cut", princ=psi_t), (top, rhs))


def _ind_pa_to_cycle(b: _Builder, conc: Sequent, rule: RuleInstance, base: str, step: str) -> str:
    return _ind_from_n(b, rule.inv, rule.eigen, rule.term, conc.ant, conc.suc,
                       "base", "step", step_var=rule.eigen, base_label=base, step_label=step)


def id_to_cid(p) -> CyclicProof:
    """Compile a finitary proof into a cyclic one with the same root sequent."""
    g = as_graph(p, FINITARY)
    b = _Builder("c")
    done: Dict[str, str] = {}

    def go(label: str) -> str:
        if label in done:
            return done[label]
        n = g.nodes[label]
        kids = [go(c) for c in n.children]
        rule = n.rule
        if rule.tag in ("xind", "indPA") and rule.princ is None:
            rule = replace(rule, princ=resolve_principal(g.step(label)))
        if rule.tag == "xind":
            out = _xind_to_cycle(b, n.sequent, rule, kids[0], kids[1])
        elif rule.tag == "indPA":
            out = _ind_pa_to_cycle(b, n.sequent, rule, kids[0], kids[1])
        else:
            out = b.node(n.sequent, rule, tuple(kids))
        done[label] = out
        return out

    root = go(g.root)
    out = b.graph(root, CYCLIC, [CONTEXT_NOTE])
    return relabel(minimize(out))
