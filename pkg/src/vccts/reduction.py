"""Internal reductions: communication on dual symbols along edges, with
full graph surgery and residual maps, plus bounded reachability.

A reaction removes the two partner locations, splices in the freshly
located children of both prefixes, wires every input-side child to
every output-side child, and lets children inherit their parent's other
neighbours.  Restriction never blocks an internal reaction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .graphs import GLOBAL_ALLOCATOR, make_graph
from .netstate import (
    InputHead, NetState, OutputHead, SymbolFreshener, _flatten_rec,
    _merge_parts, cs_head, make_state, state_symbol_names,
)
from .syntax import subst_value
from .values import value_str


@dataclass
class ReductionStep:
    source: NetState
    target: NetState
    fired: tuple            # (p, q, symbol, value, summand_i, summand_j)
    residual: dict          # |target| -> |source|

    def describe(self) -> str:
        p, q, sym, v, _i, _j = self.fired
        return "%s --%s(%s)--> %s" % (q, sym, value_str(v), p)


def _spawn_children(children, value_subst, state, env, alloc, extra_parts_sorts=()):
    """Flatten prefix children at fresh locations, hoisting and renaming
    their restrictions against everything else in the state."""
    freshener = SymbolFreshener(state_symbol_names(state, env))
    parts = []
    for child in children:
        t = child
        if value_subst is not None:
            var, val = value_subst
            t = subst_value(t, var, val)
        parts.append(_flatten_rec(t, env, alloc, freshener))
    return parts, freshener


def _finish_merge(all_parts, untouched_comps, env, freshener):
    from .syntax import sort_of
    external = frozenset()
    for t in untouched_comps:
        external |= sort_of(t, env)
    merged, restricted = _merge_parts(all_parts, env, freshener, external_free=external)
    return merged, restricted


def fire_comm(state: NetState, p, q, i, j, env, alloc=None):
    """React input summand i at p with output summand j at q.

    Returns (target, residual, value, in_locs, out_locs) where in_locs /
    out_locs are the location sets of the spawned child families.
    """
    alloc = alloc or GLOBAL_ALLOCATOR
    hp = cs_head(state.comp[p], env)[i]
    hq = cs_head(state.comp[q], env)[j]
    assert isinstance(hp, InputHead) and isinstance(hq, OutputHead)
    assert hp.sym == hq.sym
    v = hq.value

    in_parts, freshener = _spawn_children(hp.children, (hp.var, v), state, env, alloc)
    out_parts = []
    for child in hq.children:
        out_parts.append(_flatten_rec(child, env, alloc, freshener))
    untouched = [state.comp[r] for r in state.graph.vertices if r not in (p, q)]
    merged, hoisted = _finish_merge(in_parts + out_parts, untouched, env, freshener)
    in_parts = merged[:len(in_parts)]
    out_parts = merged[len(in_parts):]

    in_locs = set()
    out_locs = set()
    comp = {}
    edges = set()
    for part in in_parts:
        in_locs |= part.graph.vertices
        comp.update(part.comp)
        edges |= part.graph.edges
    for part in out_parts:
        out_locs |= part.graph.vertices
        comp.update(part.comp)
        edges |= part.graph.edges

    old = [r for r in state.graph.vertices if r not in (p, q)]
    vertices = set(old) | in_locs | out_locs
    for r in old:
        comp[r] = state.comp[r]

    # (b) the connection between p and q is inherited by all cross pairs
    for a in in_locs:
        for b in out_locs:
            edges.add((min(a, b), max(a, b)))
    # (c) inheritance through the residual function
    p_nbrs = state.graph.neighbors(p) - {q}
    q_nbrs = state.graph.neighbors(q) - {p}
    for r in old:
        if r in p_nbrs:
            for a in in_locs:
                edges.add((min(a, r), max(a, r)))
        if r in q_nbrs:
            for b in out_locs:
                edges.add((min(b, r), max(b, r)))
    for a, b in state.graph.edges:
        if a in state.graph.vertices and b in state.graph.vertices \
                and a not in (p, q) and b not in (p, q):
            edges.add((a, b))

    graph = make_graph(vertices, edges)
    residual = {r: r for r in old}
    residual.update({a: p for a in in_locs})
    residual.update({b: q for b in out_locs})
    target = make_state(graph, comp, state.restricted | hoisted, env)
    return target, residual, v, frozenset(in_locs), frozenset(out_locs)


def fire_prefix(state: NetState, p, head, value, env, alloc=None):
    """Fire one prefix summand at p on its own (the visible-step surgery).

    For an input head the received value is substituted into the
    children; for an output head `value` must equal the evaluated
    payload.  Returns (target, residual, lvec) with lvec the per-child
    location sets in child order.
    """
    alloc = alloc or GLOBAL_ALLOCATOR
    if isinstance(head, InputHead):
        subst = (head.var, value)
    else:
        assert isinstance(head, OutputHead) and value == head.value
        subst = None
    parts, freshener = _spawn_children(head.children, subst, state, env, alloc)
    untouched = [state.comp[r] for r in state.graph.vertices if r != p]
    parts, hoisted = _finish_merge(parts, untouched, env, freshener)

    lvec = tuple(frozenset(part.graph.vertices) for part in parts)
    child_locs = set()
    comp = {}
    edges = set()
    for part in parts:
        child_locs |= part.graph.vertices
        comp.update(part.comp)
        edges |= part.graph.edges

    old = [r for r in state.graph.vertices if r != p]
    for r in old:
        comp[r] = state.comp[r]
    p_nbrs = state.graph.neighbors(p)
    for r in old:
        if r in p_nbrs:
            for a in child_locs:
                edges.add((min(a, r), max(a, r)))
    for a, b in state.graph.edges:
        if a != p and b != p:
            edges.add((a, b))

    graph = make_graph(set(old) | child_locs, edges)
    residual = {r: r for r in old}
    residual.update({a: p for a in child_locs})
    target = make_state(graph, comp, state.restricted | hoisted, env)
    return target, residual, lvec


def comm_redexes(state: NetState, env):
    """All (p, q, i, j, symbol, value) with p input / q output on dual
    symbols across an edge, in deterministic order."""
    out = []
    locs = state.locations()
    heads = {p: cs_head(state.comp[p], env) for p in locs}
    for p in locs:
        for q in locs:
            if p == q or not state.graph.has_edge(p, q):
                continue
            for i, hp in enumerate(heads[p]):
                if not isinstance(hp, InputHead):
                    continue
                for j, hq in enumerate(heads[q]):
                    if isinstance(hq, OutputHead) and hq.sym == hp.sym:
                        out.append((p, q, i, j, hp.sym, hq.value))
    return out


def internal_steps(state: NetState, env) -> list:
    """One ReductionStep per communication redex.  Distinct summand
    pairs give distinct steps; the empty list means no redex."""
    steps = []
    for p, q, i, j, sym, _v in comm_redexes(state, env):
        target, residual, v, _in, _out = fire_comm(state, p, q, i, j, env)
        steps.append(ReductionStep(state, target, (p, q, sym, v, i, j), residual))
    return steps


@dataclass
class Reachability:
    states: dict            # canonical key -> NetState
    initial: str
    successors: dict        # key -> sorted list of successor keys
    status: str             # "complete" | "truncated"
    parents: dict           # key -> (parent key, fired) for witness traces


def reachable(state: NetState, env, max_states=2000, max_depth=10_000) -> Reachability:
    """BFS over internal steps, quotiented by canonical keys."""
    k0 = state.key()
    states = {k0: state}
    successors = {}
    parents = {k0: None}
    frontier = deque([(k0, 0)])
    status = "complete"
    while frontier:
        key, depth = frontier.popleft()
        if depth >= max_depth:
            status = "truncated"
            continue
        succ = set()
        for step in internal_steps(states[key], env):
            tk = step.target.key()
            succ.add(tk)
            if tk not in states:
                if len(states) >= max_states:
                    status = "truncated"
                    continue
                states[tk] = step.target
                parents[tk] = (key, step.fired)
                frontier.append((tk, depth + 1))
        successors[key] = sorted(succ)
    return Reachability(states, k0, successors, status, parents)


def trace_to(reach: Reachability, key) -> list:
    """Witness step sequence from the initial state to `key`."""
    out = []
    cur = key
    while reach.parents.get(cur) is not None:
        parent, fired = reach.parents[cur]
        out.append(fired)
        cur = parent
    out.reverse()
    return out


def reduces_to_idle(state: NetState, env, max_states=2000, max_depth=10_000):
    """Search for a reachable state whose components are all idle.

    Returns (found, witness_trace, status); a truncated search that
    found nothing reports found=False with status 'truncated'.
    """
    reach = reachable(state, env, max_states, max_depth)
    for key, st in reach.states.items():
        if st.is_idle(env):
            return True, trace_to(reach, key), reach.status
    return False, None, reach.status
