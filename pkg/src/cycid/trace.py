"""Trace graphs and the progressing-trace condition for cyclic proofs.

A trace graph relates antecedent formulas of a node to antecedent formulas of
one of its premisses; the flag marks an unfolding of a principal formula.
Whether every infinite branch carries a progressing trace is decided by
closing the edge graphs under composition (size-change style): the proof
progresses iff every idempotent loop graph has a flagged self-arc.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from .calculus import HYP, InferenceStep, eq_template_pair, principal_auxiliary, resolve_principal
from .proofs import CyclicProof
from .syntax import Formula, IndPred, Pred, pred_order, positive_preds_in, preds_in, subst

Edge = Tuple[Formula, Formula, bool]
PathEdge = Tuple[str, int, str]


class SourceTargetMismatch(ValueError):
    pass


class PropertyViolated(AssertionError):
    pass


@dataclass(frozen=True)
class TraceGraph:
    source: str
    target: str
    edges: FrozenSet[Edge]

    def arcs(self) -> Dict[Tuple[Formula, Formula], bool]:
        return {(a, b): p for a, b, p in self.edges}

    def __len__(self):
        return len(self.edges)


def _merge(pairs) -> FrozenSet[Edge]:
    best: Dict[Tuple[Formula, Formula], bool] = {}
    for a, b, p in pairs:
        best[(a, b)] = best.get((a, b), False) or p
    return frozenset((a, b, p) for (a, b), p in best.items())


def edge_trace_graph(step: InferenceStep, premiss_index: int,
                     source: str = "", target: str = "") -> TraceGraph:
    """Immediate-ancestor pairs from the conclusion's antecedent to the
    antecedent of premiss `premiss_index`."""
    r = step.rule
    conc = step.conclusion.ant
    prem = step.premisses[premiss_index].ant
    pairs = []
    if r.tag == "subst":
        theta = r.theta_map
        for psi in prem:
            img = subst(psi, theta)
            if img in conc:
                pairs.append((img, psi, False))
    elif r.tag != HYP:
        pairs.extend((f, f, False) for f in conc & prem)
        if r.tag == "eqL":
            eq = resolve_principal(step)
            pair = eq_template_pair(r, eq)
            if pair is not None:
                before, after = pair
                if after in conc and before in prem:
                    pairs.append((after, before, False))
        for ap in principal_auxiliary(step):
            if (ap.premiss_index == premiss_index and ap.conclusion_side == "L"
                    and ap.side == "L" and ap.premiss is not ap.conclusion
                    and ap.premiss != ap.conclusion):
                pairs.append((ap.conclusion, ap.premiss, True))
    return TraceGraph(source, target, _merge(pairs))


def identity_graph(node: str, formulas) -> TraceGraph:
    return TraceGraph(node, node, frozenset((f, f, False) for f in formulas))


def compose(g1: TraceGraph, g2: TraceGraph) -> TraceGraph:
    """Relational composition: first g1, then g2."""
    if g1.target != g2.source:
        raise SourceTargetMismatch(f"{g1.source}->{g1.target} then {g2.source}->{g2.target}")
    out_of: Dict[Formula, List[Tuple[Formula, bool]]] = {}
    for b, c, p in g2.edges:
        out_of.setdefault(b, []).append((c, p))
    pairs = []
    for a, b, p in g1.edges:
        for c, q in out_of.get(b, ()):
            pairs.append((a, c, p or q))
    return TraceGraph(g1.source, g2.target, _merge(pairs))


GraphFn = Callable[[CyclicProof, str, int, str], TraceGraph]


def default_graph_fn(p: CyclicProof, u: str, i: int, v: str) -> TraceGraph:
    return edge_trace_graph(p.step(u), i, u, v)


def all_edge_graphs(p: CyclicProof, graph_fn: Optional[GraphFn] = None):
    """(u, i, v, graph) for every edge reachable from the root."""
    fn = graph_fn or default_graph_fn
    out = []
    for u in p.reachable():
        for i, v in enumerate(p.nodes[u].children):
            out.append((u, i, v, fn(p, u, i, v)))
    return out


# ---------------------------------------------------------------------------
# verdicts

@dataclass(frozen=True)
class TraceWitness:
    """A cycle of graph edges and a trace around it that returns to its
    starting formula, principal at least once."""
    path: Tuple[PathEdge, ...]
    formulas: Tuple[Formula, ...]   # len(path) + 1 entries, first == last
    progress: Tuple[bool, ...]      # per path edge

    @property
    def nodes(self) -> Tuple[str, ...]:
        return tuple(u for u, _, _ in self.path)


@dataclass
class Progressing:
    witnesses: List[TraceWitness] = field(default_factory=list)
    closure_size: int = 0
    progressing: bool = True


@dataclass
class Violation:
    stem: List[PathEdge]
    cycle: List[PathEdge]
    graph: Optional[TraceGraph] = None
    closure_size: int = 0
    progressing: bool = False

    @property
    def cycle_nodes(self) -> List[str]:
        return [u for u, _, _ in self.cycle]


ProgressVerdict = object  # Progressing | Violation


def _sccs(nodes, succ) -> List[List[str]]:
    """Tarjan, iterative."""
    index, low, on, stack, out = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def _stem(p: CyclicProof, target: str) -> List[PathEdge]:
    prev = {p.root: None}
    q = deque([p.root])
    while q:
        u = q.popleft()
        if u == target:
            break
        for i, v in enumerate(p.nodes[u].children):
            if v not in prev:
                prev[v] = (u, i, v)
                q.append(v)
    path = []
    cur = target
    while prev[cur] is not None:
        e = prev[cur]
        path.append(e)
        cur = e[0]
    return path[::-1]


def trace_along(graphs: List[TraceGraph], start: Formula) -> Optional[Tuple[Tuple[Formula, ...], Tuple[bool, ...]]]:
    """A trace from `start` back to `start` through `graphs` with at least one
    progress point, or None."""
    n = len(graphs)
    layers = [{(start, False): None}]
    for g in graphs:
        nxt = {}
        for (f, prog), _ in layers[-1].items():
            for a, b, p in g.edges:
                if a == f:
                    key = (b, prog or p)
                    if key not in nxt:
                        nxt[key] = (f, prog, p)
        layers.append(nxt)
    if (start, True) not in layers[n]:
        return None
    formulas, flags = [start], []
    key = (start, True)
    for k in range(n, 0, -1):
        f, prog, p = layers[k][key]
        formulas.append(f)
        flags.append(p)
        key = (f, prog)
    return tuple(reversed(formulas)), tuple(reversed(flags))


def check_progress(p: CyclicProof, graph_fn: Optional[GraphFn] = None,
                   max_witnesses: int = 64) -> object:
    """Decide the progressing-trace condition.

    Returns Progressing (with trace witnesses for loops) or Violation with a
    lasso: a stem from the root and a cycle whose repetition has no
    progressing trace.
    """
    edges = all_edge_graphs(p, graph_fn)
    reach = p.reachable()
    succ = {u: [] for u in reach}
    for u, _, v, _ in edges:
        succ[u].append(v)
    comp_of = {}
    for k, comp in enumerate(_sccs(reach, succ)):
        for u in comp:
            comp_of[u] = k
    by_source: Dict[str, List[Tuple[PathEdge, TraceGraph]]] = {}
    for u, i, v, g in edges:
        if comp_of[u] == comp_of[v]:
            by_source.setdefault(u, []).append(((u, i, v), g))

    # closure: element -> shortest path producing it
    seen: Dict[TraceGraph, Tuple[PathEdge, ...]] = {}
    work = deque()
    for u, lst in by_source.items():
        for e, g in lst:
            if g not in seen:
                seen[g] = (e,)
                work.append(g)
    while work:
        g = work.popleft()
        path = seen[g]
        for e, h in by_source.get(g.target, ()):
            gh = compose(g, h)
            if gh not in seen:
                seen[gh] = path + (e,)
                work.append(gh)

    witnesses = []
    graph_of = {(u, i): g for u, i, _, g in edges}
    for g, path in seen.items():
        if g.source != g.target:
            continue
        if compose(g, g) != g:
            continue
        loops = sorted((a for a, b, prog in g.edges if prog and a == b), key=str)
        if not loops:
            return Violation(_stem(p, g.source), list(path), g, len(seen))
        if len(witnesses) < max_witnesses:
            gs = [graph_of[(u, i)] for u, i, _ in path]
            tr = trace_along(gs, loops[0])
            if tr is None:
                raise PropertyViolated("self-arc without a trace along its path")
            witnesses.append(TraceWitness(tuple(path), tr[0], tr[1]))
    witnesses.sort(key=lambda w: (len(w.path), w.path))
    return Progressing(witnesses, len(seen))


# ---------------------------------------------------------------------------
# independent oracle

def _rel_compose(r1: dict, r2: dict) -> dict:
    out = {}
    for (a, b), p in r1.items():
        for (b2, c), q in r2.items():
            if b == b2:
                out[(a, c)] = out.get((a, c), False) or p or q
    return out


def _freeze(r: dict):
    return frozenset(r.items())


def naive_progress_oracle(p: CyclicProof, max_cycle_len: Optional[int] = None,
                          graph_fn: Optional[GraphFn] = None) -> object:
    """Enumerate closed walks from each reachable node and test the
    idempotent power of each walk's composed relation.

    Walks are deduplicated by (current node, composed relation); with
    max_cycle_len None the search is exhaustive.
    """
    rels = {}
    out_edges: Dict[str, List[Tuple[int, str]]] = {}
    for u, i, v, g in all_edge_graphs(p, graph_fn):
        rels[(u, i)] = g.arcs()
        out_edges.setdefault(u, []).append((i, v))
    for start in p.reachable():
        frontier = deque()
        visited = set()
        for i, v in out_edges.get(start, ()):
            r = rels[(start, i)]
            key = (v, _freeze(r))
            if key not in visited:
                visited.add(key)
                frontier.append((v, r, ((start, i, v),)))
        while frontier:
            node, r, walk = frontier.popleft()
            if node == start:
                powers = [r]
                cur = r
                while True:
                    cur = _rel_compose(cur, r)
                    if _freeze(cur) in {_freeze(x) for x in powers}:
                        break
                    powers.append(cur)
                # some power is idempotent
                for k, g in enumerate(powers):
                    if _freeze(_rel_compose(g, g)) == _freeze(g):
                        if not any(prog for (a, b), prog in g.items() if a == b):
                            return Violation(_stem(p, start), list(walk) * (k + 1))
                        break
            if max_cycle_len is not None and len(walk) >= max_cycle_len:
                continue
            for i, v in out_edges.get(node, ()):
                r2 = _rel_compose(r, rels[(node, i)])
                key = (v, _freeze(r2))
                if key not in visited:
                    visited.add(key)
                    frontier.append((v, r2, walk + ((node, i, v),)))
    return Progressing()


# ---------------------------------------------------------------------------
# analysis of progressing traces

@dataclass(frozen=True)
class TraceAnalysis:
    pred: IndPred
    positive_from: int
    maximal: bool


def analyze_trace(p: CyclicProof, w: TraceWitness) -> TraceAnalysis:
    """Identify the inductive predicate unfolded infinitely often on a
    repeated witness cycle and check it dominates the trace.

    Raises PropertyViolated if the structural facts fail, which would point
    at a bug in the checker rather than in the proof.
    """
    unfolded = []
    for (u, i, v), f, prog in zip(w.path, w.formulas, w.progress):
        if not prog:
            continue
        if p.nodes[u].rule.tag == "idl" and isinstance(f, Pred) and isinstance(f.sym, IndPred):
            unfolded.append(f.sym)
    if not unfolded:
        raise PropertyViolated("no inductive unfolding at any progress point of the cycle")
    top = unfolded[0]
    for q in unfolded[1:]:
        if pred_order(q, top, total=True) == "above":
            top = q
    for k, f in enumerate(w.formulas):
        if top not in positive_preds_in(f):
            raise PropertyViolated(f"{top.name} does not occur positively in trace formula {k}")
    maximal = True
    for f in w.formulas:
        for q in preds_in(f):
            rel = pred_order(q, top)
            if rel == "above":
                raise PropertyViolated(f"{q.name} above {top.name} on the trace")
            if rel not in ("below", "equal"):
                maximal = False
    return TraceAnalysis(top, 0, maximal)
