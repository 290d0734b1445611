"""Finite proof trees, cyclic proof graphs, and the proof file format.

File format, one record per line (``#`` starts a comment)::

    mode: finitary | cyclic
    root: <label>
    ind <Name> := (<X>, <x>, <formula>)
    node <label>: <tag> {k=v, ...} seq: [<ant>] => [<suc>] premisses: [<label>, ...]

``node``, the parameter block, ``seq:`` and ``premisses:`` may be omitted, so
``n0: id [P(x)] => [P(x)]`` is a complete file.  Parameters: ``princ``, ``t``,
``y``, ``theta={x:=t, ...}``, ``inv``, ``template``, ``holes=(u,v)``,
``pred``, ``index``, ``name`` (hypothesis leaves).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

from .calculus import (
    CYCLIC, FINITARY, HYP, InferenceStep, RuleError, RuleInstance, Sequent,
    TAGS, check_step, mk_theta, resolve_principal,
)
from .grammar import (
    ParseError, Parser, assign_names, show_decls, show_formula, show_term,
    tokenize,
)
from .syntax import (
    Var, all_preds, free_vars, fresh_var, subst, subst_term, term_vars,
)


@dataclass(frozen=True)
class Node:
    sequent: Sequent
    rule: RuleInstance
    children: Tuple[str, ...] = ()


@dataclass
class CyclicProof:
    """A finite graph of inference steps; edges may point back up.

    Also used for derivation fragments: nodes tagged ``hyp`` are open leaves.
    """
    nodes: Dict[str, Node]
    root: str
    mode: str = CYCLIC
    comments: List[str] = field(default_factory=list)

    def step(self, label: str) -> InferenceStep:
        n = self.nodes[label]
        return InferenceStep(n.sequent, tuple(self.nodes[c].sequent for c in n.children), n.rule)

    def edges(self):
        for label, n in self.nodes.items():
            for i, c in enumerate(n.children):
                yield label, i, c

    def reachable(self) -> List[str]:
        seen, order = {self.root}, [self.root]
        q = deque([self.root])
        while q:
            u = q.popleft()
            for c in self.nodes[u].children:
                if c in self.nodes and c not in seen:
                    seen.add(c)
                    order.append(c)
                    q.append(c)
        return order

    def has_cycle(self) -> bool:
        state = {}

        def visit(u):
            state[u] = 1
            for c in self.nodes[u].children:
                s = state.get(c)
                if s == 1:
                    return True
                if s is None and visit(c):
                    return True
            state[u] = 2
            return False

        return any(visit(u) for u in self.nodes if u not in state)

    @property
    def root_sequent(self) -> Sequent:
        return self.nodes[self.root].sequent

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class ProofTree:
    """A finite tree of steps.  `rule` is None on leaves cut off by unfolding."""
    sequent: Sequent
    rule: Optional[RuleInstance]
    children: Tuple["ProofTree", ...] = ()
    label: Optional[str] = None
    comments: Tuple[str, ...] = ()

    @property
    def is_open(self) -> bool:
        return self.rule is None

    def step(self) -> InferenceStep:
        return InferenceStep(self.sequent, tuple(c.sequent for c in self.children), self.rule)

    def walk(self):
        todo = [(self, 0)]
        while todo:
            t, d = todo.pop()
            yield t, d
            todo.extend((c, d + 1) for c in reversed(t.children))

    def height(self) -> int:
        return max(d for _, d in self.walk())

    def to_graph(self, mode: str = FINITARY) -> CyclicProof:
        nodes: Dict[str, Node] = {}
        counter = [0]
        labels = [t.label for t, _ in self.walk()]
        keep = None not in labels and len(set(labels)) == len(labels)

        def go(t):
            label = t.label if keep else f"n{counter[0]}"
            counter[0] += 1
            nodes[label] = None
            kids = tuple(go(c) for c in t.children)
            rule = t.rule if t.rule is not None else RuleInstance(HYP, hyp="open")
            nodes[label] = Node(t.sequent, rule, kids)
            return label

        root = go(self)
        return CyclicProof(nodes, root, mode, list(self.comments))


FiniteProof = ProofTree
DerivationFragment = Union[ProofTree, CyclicProof]


def tree_of(p: CyclicProof) -> ProofTree:
    """Expand an acyclic graph into a tree."""
    if p.has_cycle():
        raise ValueError("proof graph has a cycle")

    def go(label):
        n = p.nodes[label]
        return ProofTree(n.sequent, n.rule, tuple(go(c) for c in n.children), label)

    t = go(p.root)
    return replace(t, comments=tuple(p.comments)) if p.comments else t


def as_graph(p: DerivationFragment, mode: Optional[str] = None) -> CyclicProof:
    if isinstance(p, CyclicProof):
        return p
    return p.to_graph(mode or FINITARY)


# ---------------------------------------------------------------------------
# checking

@dataclass
class CheckReport:
    mode: str
    errors: List[Tuple[str, str, RuleError]]
    verdict: object = None  # trace.ProgressVerdict for cyclic proofs

    @property
    def locally_ok(self) -> bool:
        return not self.errors

    @property
    def ok(self) -> bool:
        if self.errors:
            return False
        return self.verdict is None or self.verdict.progressing

    @property
    def is_proof(self) -> bool:
        """Locally correct and, if cyclic, progressing."""
        return self.ok


class StructureError(RuleError):
    pass


def check_proof(p: DerivationFragment, mode: Optional[str] = None,
                allow_open: bool = False, progress: bool = True) -> CheckReport:
    """Check every node; for cyclic proofs also run the progress check.

    Errors are (label, tag, error) triples.
    """
    g = as_graph(p, mode)
    mode = mode or g.mode
    errors = []
    if g.root not in g.nodes:
        errors.append((g.root, "-", StructureError(f"root {g.root} is not a node")))
        return CheckReport(mode, errors)
    for label in g.nodes:
        n = g.nodes[label]
        missing = [c for c in n.children if c not in g.nodes]
        if missing:
            errors.append((label, n.rule.tag, StructureError(f"unknown premiss {missing[0]}")))
            continue
        if n.rule.tag == HYP and not allow_open:
            errors.append((label, HYP, StructureError("open hypothesis leaf")))
            continue
        try:
            check_step(g.step(label), mode)
        except RuleError as e:
            errors.append((label, n.rule.tag, e))
    reach = set(g.reachable()) if not errors else set(g.nodes)
    for label in g.nodes:
        if label not in reach:
            errors.append((label, g.nodes[label].rule.tag, StructureError("unreachable from root")))
    if mode == FINITARY and not errors and g.has_cycle():
        errors.append((g.root, g.nodes[g.root].rule.tag,
                       StructureError("finitary proof has a cycle")))
    verdict = None
    if mode == CYCLIC and not errors and progress:
        from .trace import check_progress
        verdict = check_progress(g)
    return CheckReport(mode, errors, verdict)


# ---------------------------------------------------------------------------
# unfolding and substitution elimination

def unfold(p: CyclicProof, depth: int) -> ProofTree:
    """The unrolling of p cut off `depth` edges below the root."""

    def go(label, d):
        n = p.nodes[label]
        if d >= depth and n.children:
            return ProofTree(n.sequent, None, (), label)
        return ProofTree(n.sequent, n.rule, tuple(go(c, d + 1) for c in n.children), label)

    return go(p.root, 0)


def _subst_rule(rule: RuleInstance, theta, conclusion: Sequent, premisses) -> Tuple[RuleInstance, List[dict]]:
    """Apply theta to a rule's parameters.

    Returns the new rule and, per premiss, the substitution to push down.
    An eigenvariable captured by theta is renamed apart.
    """
    child_theta = dict(theta)
    new = {}
    if rule.eigen is not None:
        y = rule.eigen
        child_theta.pop(y, None)
        prem_vars = set()
        for s in premisses:
            prem_vars |= s.free_vars()
        incoming = set()
        for v in prem_vars - {y}:
            incoming |= term_vars(theta.get(v, Var(v)))
        target_vars = conclusion.subst(theta).free_vars()
        if y in incoming or y in target_vars:
            y2 = fresh_var(incoming | target_vars | prem_vars | set(theta), base=y)
            child_theta[y] = Var(y2)
            new["eigen"] = y2
    sub_f = lambda f: None if f is None else subst(f, child_theta if f is rule.inv else theta)
    if rule.princ is not None:
        new["princ"] = subst(rule.princ, theta)
    if rule.term is not None:
        new["term"] = subst_term(rule.term, theta)
    if rule.inv is not None:
        new["inv"] = subst(rule.inv, child_theta)
    if rule.template is not None:
        u, v = rule.holes
        inner = {k: t for k, t in theta.items() if k not in (u, v)}
        hole_clash = set()
        for t in inner.values():
            hole_clash |= term_vars(t)
        if u in hole_clash or v in hole_clash:
            avoid = hole_clash | free_vars(rule.template) | set(inner)
            u2 = fresh_var(avoid, "u")
            v2 = fresh_var(avoid | {u2}, "v")
            tmpl = subst(rule.template, {u: Var(u2), v: Var(v2)})
            new["holes"] = (u2, v2)
            new["template"] = subst(tmpl, inner)
        else:
            new["template"] = subst(rule.template, inner)
    del sub_f
    return replace(rule, **new), [child_theta for _ in premisses]


def _compose(outer, inner):
    """The substitution 'inner, then outer'."""
    out = {v: subst_term(t, outer) for v, t in inner.items()}
    for v, t in outer.items():
        out.setdefault(v, t)
    return out


def eliminate_subst_prefix(p: CyclicProof, depth: int, max_skips: int = 10_000) -> ProofTree:
    """A finite prefix, `depth` edges deep, of the unrolling with every
    substitution step pushed into the sequents above it."""

    def go(label, theta, d):
        skips = 0
        n = p.nodes[label]
        while n.rule.tag == "subst":
            theta = _compose(theta, n.rule.theta_map)
            label = n.children[0]
            n = p.nodes[label]
            skips += 1
            if skips > max_skips:
                raise RuntimeError("cycle of substitution steps")
        conclusion = n.sequent.subst(theta)
        if d >= depth and n.children:
            return ProofTree(conclusion, None, (), label)
        step = p.step(label)
        rule = replace(n.rule, princ=resolve_principal(step)) if n.rule.tag != HYP else n.rule
        rule, thetas = _subst_rule(rule, theta, n.sequent, step.premisses)
        kids = tuple(go(c, t, d + 1) for c, t in zip(n.children, thetas))
        return ProofTree(conclusion, rule, kids, label)

    return go(p.root, {}, 0)


# ---------------------------------------------------------------------------
# regularity helpers

def minimize(p: CyclicProof) -> CyclicProof:
    """Merge nodes that root identical unrollings (partition refinement)."""
    labels = p.reachable()
    block = {}
    sig0 = {}
    for l in labels:
        n = p.nodes[l]
        key = (n.sequent, n.rule, len(n.children))
        block[l] = sig0.setdefault(key, len(sig0))
    while True:
        sigs = {}
        new_block = {}
        for l in labels:
            key = (block[l], tuple(block[c] for c in p.nodes[l].children))
            new_block[l] = sigs.setdefault(key, len(sigs))
        if len(sigs) == len(set(block.values())):
            break
        block = new_block
    rep = {}
    for l in labels:
        rep.setdefault(block[l], l)
    nodes = {}
    for l in labels:
        if rep[block[l]] != l:
            continue
        n = p.nodes[l]
        nodes[l] = Node(n.sequent, n.rule, tuple(rep[block[c]] for c in n.children))
    return CyclicProof(nodes, rep[block[p.root]], p.mode, list(p.comments))


def relabel(p: CyclicProof, prefix: str = "n") -> CyclicProof:
    """Labels n0, n1, ... in breadth-first order from the root."""
    order = p.reachable()
    new = {l: f"{prefix}{i}" for i, l in enumerate(order)}
    nodes = {new[l]: Node(p.nodes[l].sequent, p.nodes[l].rule,
                          tuple(new[c] for c in p.nodes[l].children)) for l in order}
    return CyclicProof(nodes, new[p.root], p.mode, list(p.comments))


def to_bud_companion(p: CyclicProof) -> ProofTree:
    """A tree whose back edges become bud leaves labelled 'bud:<companion>'."""
    on_path = set()

    def go(label):
        n = p.nodes[label]
        on_path.add(label)
        kids = []
        for c in n.children:
            if c in on_path:
                kids.append(ProofTree(p.nodes[c].sequent, None, (), f"bud:{c}"))
            else:
                kids.append(go(c))
        on_path.discard(label)
        return ProofTree(n.sequent, n.rule, tuple(kids), label)

    return go(p.root)


# ---------------------------------------------------------------------------
# file format

def show_sequent(s: Sequent, names=None) -> str:
    ant = ", ".join(sorted(show_formula(f, names) for f in s.ant))
    suc = ", ".join(sorted(show_formula(f, names) for f in s.suc))
    return f"[{ant}] => [{suc}]"


def _rule_formulas(r: RuleInstance):
    return [f for f in (r.princ, r.inv, r.template) if f is not None]


def _show_params(r: RuleInstance, names) -> str:
    ps = []
    if r.pred is not None:
        ps.append(f"pred={names[r.pred]}")
    if r.princ is not None:
        ps.append(f"princ={show_formula(r.princ, names)}")
    if r.term is not None:
        ps.append(f"t={show_term(r.term)}")
    if r.eigen is not None:
        ps.append(f"y={r.eigen}")
    if r.theta is not None:
        inner = ", ".join(f"{v}:={show_term(t)}" for v, t in r.theta)
        ps.append(f"theta={{{inner}}}")
    if r.inv is not None:
        ps.append(f"inv={show_formula(r.inv, names)}")
    if r.template is not None:
        ps.append(f"template={show_formula(r.template, names)}")
        if r.holes != ("u", "v"):
            ps.append(f"holes=({r.holes[0]},{r.holes[1]})")
    if r.index is not None:
        ps.append(f"index={r.index}")
    if r.hyp is not None:
        ps.append(f"name={r.hyp}")
    return "{" + ", ".join(ps) + "}" if ps else ""


def serialize_proof(p: DerivationFragment, mode: Optional[str] = None) -> str:
    g = as_graph(p, mode)
    formulas = []
    for n in g.nodes.values():
        formulas.extend(n.sequent.formulas())
        formulas.extend(_rule_formulas(n.rule))
    from .syntax import Pred, ZERO
    preds = set(all_preds(formulas))
    preds |= all_preds(Pred(n.rule.pred, ZERO) for n in g.nodes.values() if n.rule.pred is not None)
    names = assign_names(preds)
    lines = [f"# {c}" for c in g.comments]
    lines.append(f"mode: {mode or g.mode}")
    lines.append(f"root: {g.root}")
    lines.extend(show_decls(preds, names))
    order = g.reachable() + [l for l in g.nodes if l not in set(g.reachable())]
    for label in order:
        n = g.nodes[label]
        params = _show_params(n.rule, names)
        params = f" {params}" if params else ""
        kids = ", ".join(n.children)
        lines.append(f"node {label}: {n.rule.tag}{params} seq: {show_sequent(n.sequent, names)} "
                     f"premisses: [{kids}]")
    return "\n".join(lines) + "\n"


class _LineParser(Parser):
    def cedent(self):
        self.expect("[")
        out = []
        if not self.accept("]"):
            out.append(self.formula())
            while self.accept(","):
                out.append(self.formula())
            self.expect("]")
        return out

    def sequent(self) -> Sequent:
        ant = self.cedent()
        self.expect("=>")
        suc = self.cedent()
        return Sequent.of(ant, suc)

    def params(self) -> dict:
        out = {}
        if not self.accept("{"):
            return out
        if self.accept("}"):
            return out
        while True:
            tok = self.tok
            key = self.ident()
            self.expect("=")
            if key in out:
                self.error(f"duplicate parameter {key!r}", tok)
            out[key] = self.param_value(key, tok)
            if self.accept("}"):
                return out
            self.expect(",")

    def param_value(self, key, tok):
        if key in ("princ", "inv", "template"):
            return self.formula()
        if key == "t":
            return self.term()
        if key in ("y", "name"):
            return self.ident()
        if key == "pred":
            name = self.ident()
            if name not in self.env:
                self.error(f"undeclared inductive predicate {name!r}", tok)
            return self.env[name]
        if key == "index":
            t = self.tok
            if t.kind != "num":
                self.error("index must be a number")
            self.i += 1
            return int(t.text)
        if key == "holes":
            self.expect("(")
            u = self.var()
            self.expect(",")
            v = self.var()
            self.expect(")")
            return (u, v)
        if key == "theta":
            self.expect("{")
            pairs = {}
            if not self.accept("}"):
                while True:
                    v = self.var()
                    self.expect(":=")
                    pairs[v] = self.term()
                    if self.accept("}"):
                        break
                    self.expect(",")
            return mk_theta(pairs)
        self.error(f"unknown parameter {key!r}", tok)

    def labels(self):
        self.expect("[")
        out = []
        if not self.accept("]"):
            out.append(self.ident())
            while self.accept(","):
                out.append(self.ident())
            self.expect("]")
        return out


_PARAM_FIELDS = {"princ": "princ", "t": "term", "y": "eigen", "theta": "theta",
                 "inv": "inv", "template": "template", "holes": "holes",
                 "pred": "pred", "index": "index", "name": "hyp"}


def parse_proof(text: str, env: Optional[dict] = None) -> DerivationFragment:
    """Parse a proof file.

    Returns a CyclicProof when the file declares cyclic mode or has a back
    edge, otherwise a FiniteProof (a tree; shared nodes are copied).
    """
    from .library import standard_env
    env = dict(standard_env() if env is None else env)
    mode = None
    root = None
    nodes: Dict[str, Node] = {}
    comments = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            comments.append(stripped[1:].strip())
            continue
        p = _LineParser(tokenize(line, lineno), env)
        first = p.tok
        if first.text == "mode" and p.peek().text == ":":
            p.i += 2
            m = p.ident()
            if m not in (FINITARY, CYCLIC):
                p.error(f"unknown mode {m!r}", first)
            mode = m
        elif first.text == "root" and p.peek().text == ":":
            p.i += 2
            root = p.ident()
        elif first.text == "ind" and p.peek().kind == "ident":
            p.i += 1
            name = p.ident()
            p.expect(":=")
            p.ind_decl(name)
        else:
            p.accept("node")
            ltok = p.tok
            label = p.ident()
            p.expect(":")
            ttok = p.tok
            tag = p.ident()
            if tag not in TAGS and tag != HYP:
                p.error(f"unknown rule tag {tag!r}", ttok)
            params = p.params()
            p.accept("seq")
            p.accept(":")
            seq = p.sequent()
            kids = []
            if p.accept("premisses"):
                p.expect(":")
                kids = p.labels()
            if not p.at_end():
                p.error("trailing input on node line")
            if label in nodes:
                p.error(f"duplicate node label {label!r}", ltok)
            rule = RuleInstance(tag, **{_PARAM_FIELDS[k]: v for k, v in params.items()})
            nodes[label] = Node(seq, rule, tuple(kids))
        if not p.at_end() and first.text in ("mode", "root", "ind"):
            p.error("trailing input")
    if not nodes:
        raise ParseError("no nodes", 1, 1)
    if root is None:
        root = next(iter(nodes))
    for label, n in nodes.items():
        for c in n.children:
            if c not in nodes:
                raise ParseError(f"node {label}: unknown premiss {c!r}")
    g = CyclicProof(nodes, root, mode or CYCLIC, comments)
    if mode == CYCLIC or g.has_cycle():
        return g
    g.mode = FINITARY
    return tree_of(g)


def load_proof(path, env=None) -> DerivationFragment:
    with open(path, encoding="utf-8") as fh:
        return parse_proof(fh.read(), env)


def proof_mode(p: DerivationFragment) -> str:
    return p.mode if isinstance(p, CyclicProof) else FINITARY
