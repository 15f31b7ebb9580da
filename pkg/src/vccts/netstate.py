"""Runtime states: a location graph, one guarded sum per location, and a
single global set of restricted symbols.

`flatten` turns a canonical term into this shape, hoisting nested
restrictions after renaming their symbols apart, and allocating fresh
global locations for every vertex.  `cs_head` resolves a component to
its guarded-sum head form with conditionals evaluated and constants
unfolded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .graphs import (
    GLOBAL_ALLOCATOR, LocGraph, canonical_key, make_graph,
)
from .syntax import (
    Canon, Cond, Const, DefEnv, GraphTerm, Idle, Input, Nil,
    NotCanonical, Output, PSym, ProcVar, Restrict, Sum, SyntaxError_,
    check_canonical, free_data_vars, rename_symbols, sort_of, subst_values,
    term_fingerprint, term_str,
)
from .values import eval_bexpr, eval_expr

CS_FUEL = 10_000


class GuardError(Exception):
    """A constant unfolded forever without reaching a prefix head."""


# ---------------------------------------------------------------------------
# Head forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InputHead:
    sym: str
    var: str
    children: tuple


@dataclass(frozen=True)
class OutputHead:
    sym: str
    value: object
    children: tuple


@dataclass(frozen=True)
class NilHead:
    pass


@dataclass(frozen=True)
class IdleHead:
    pass


NIL_HEAD = NilHead()
IDLE_HEAD = IdleHead()


def cs_head(term, env: DefEnv):
    """Resolve a recursive canonical guarded sum to its head summands.

    Conditionals are decided with the evaluator, constants are unfolded
    with their arguments substituted, and nested sums are flattened in
    left-to-right source order.  The result is a tuple of heads, each a
    prefix, 0 or *.
    """
    cached = env._cs_cache.get(term)
    if cached is not None:
        return cached
    out = tuple(_resolve(term, env, [CS_FUEL]))
    env._cs_cache[term] = out
    return out


def _resolve(term, env, fuel):
    # chase conditionals and constant unfoldings at the head iteratively
    # so the fuel guard trips long before the interpreter stack would
    while True:
        fuel[0] -= 1
        if fuel[0] < 0:
            raise GuardError(
                "guarded-sum resolution did not terminate (unguarded recursion?)")
        if isinstance(term, Cond):
            term = term.then if eval_bexpr(term.cond) else term.other
        elif isinstance(term, Const):
            params, body = env.lookup(term.name)
            if len(params) != len(term.args):
                raise SyntaxError_("constant %s arity mismatch" % term.name)
            vals = [eval_expr(a) for a in term.args]
            term = subst_values(body, params, vals)
        else:
            break
    if isinstance(term, Idle):
        return [IDLE_HEAD]
    if isinstance(term, Nil):
        return [NIL_HEAD]
    if isinstance(term, Input):
        return [InputHead(term.sym, term.var, term.children)]
    if isinstance(term, Output):
        return [OutputHead(term.sym, eval_expr(term.expr), term.children)]
    if isinstance(term, Sum):
        return _resolve(term.left, env, fuel) + _resolve(term.right, env, fuel)
    raise SyntaxError_("not a guarded sum: %s" % term_str(term))


def normalize_component(term, env: DefEnv):
    """Canonical shape for a stored component: conditionals decided,
    nested sums rebuilt left-nested, output payloads and constant
    arguments evaluated to literals.  Constants are not unfolded, so
    indicator constants keep their name and parameters in dumps."""
    from .values import Lit
    summands = []

    def norm(t):
        if isinstance(t, Cond):
            norm(t.then if eval_bexpr(t.cond) else t.other)
        elif isinstance(t, Sum):
            norm(t.left)
            norm(t.right)
        elif isinstance(t, Output):
            summands.append(Output(t.sym, Lit(eval_expr(t.expr)), t.children))
        elif isinstance(t, Const):
            summands.append(Const(t.name, tuple(Lit(eval_expr(a)) for a in t.args)))
        elif isinstance(t, (Idle, Nil, Input)):
            summands.append(t)
        else:
            raise SyntaxError_("component is not a guarded sum: %s" % term_str(t))

    norm(term)
    out = summands[0]
    for s in summands[1:]:
        out = Sum(out, s)
    return out


def barbs_of_component(term, env: DefEnv) -> frozenset:
    """Offered symbols-with-polarity at the head of one component."""
    out = set()
    for h in cs_head(term, env):
        if isinstance(h, InputHead):
            out.add(PSym(h.sym, False))
        elif isinstance(h, OutputHead):
            out.add(PSym(h.sym, True))
    return frozenset(out)


def component_is_idle(term, env: DefEnv) -> bool:
    heads = cs_head(term, env)
    return bool(heads) and all(isinstance(h, IdleHead) for h in heads)


# ---------------------------------------------------------------------------
# NetState
# ---------------------------------------------------------------------------

class NetState:
    """Immutable runtime state.  Identity is by canonical key."""

    __slots__ = ("graph", "comp", "restricted", "_key")

    def __init__(self, graph: LocGraph, comp: dict, restricted=frozenset()):
        if set(comp) != set(graph.vertices):
            raise SyntaxError_("component map not total on the vertex set")
        self.graph = graph
        self.comp = dict(comp)
        self.restricted = frozenset(restricted)
        self._key = None

    def locations(self):
        return sorted(self.graph.vertices)

    def coloring(self):
        return {p: term_fingerprint(t) for p, t in self.comp.items()}

    def key(self) -> str:
        if self._key is None:
            body = canonical_key(self.graph, self.coloring())
            self._key = body + "!R{%s}" % ",".join(sorted(self.restricted))
        return self._key

    def is_idle(self, env) -> bool:
        return all(component_is_idle(t, env) for t in self.comp.values())

    def pretty(self, env=None) -> str:
        lines = []
        for p in self.locations():
            lines.append("%4s: %s" % (p, term_str(self.comp[p])))
        if self.graph.edges:
            lines.append("edges: " + ", ".join("%s--%s" % e for e in self.graph.edge_pairs()))
        if self.restricted:
            lines.append("restricted: {%s}" % ", ".join(sorted(self.restricted)))
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "vertices": self.locations(),
            "edges": [list(e) for e in self.graph.edge_pairs()],
            "components": {str(p): term_str(self.comp[p]) for p in self.locations()},
            "restricted": sorted(self.restricted),
        }

    def __repr__(self):
        return "<NetState %d locs, %d edges>" % (len(self.graph.vertices),
                                                 len(self.graph.edges))


def prune_restriction(graph, comp, restricted, env) -> frozenset:
    """Drop restricted symbols that occur nowhere in the state."""
    if not restricted:
        return frozenset()
    used = set()
    for t in comp.values():
        used |= sort_of(t, env)
    return frozenset(s for s in restricted if s in used)


def make_state(graph, comp, restricted, env) -> NetState:
    comp = {p: normalize_component(t, env) for p, t in comp.items()}
    return NetState(graph, comp, prune_restriction(graph, comp, restricted, env))


# ---------------------------------------------------------------------------
# Flattening
# ---------------------------------------------------------------------------

@dataclass
class FlatPart:
    graph: LocGraph
    comp: dict
    restricted: frozenset


def _const_sorts(term, env) -> frozenset:
    """Union of the sorts of constants referenced inside a term."""
    if isinstance(term, Const):
        return sort_of(term, env)
    if isinstance(term, (Input, Output)):
        out = frozenset()
        for c in term.children:
            out |= _const_sorts(c, env)
        return out
    if isinstance(term, GraphTerm):
        out = frozenset()
        for _v, t in term.places:
            out |= _const_sorts(t, env)
        return out
    if isinstance(term, Sum):
        return _const_sorts(term.left, env) | _const_sorts(term.right, env)
    if isinstance(term, Restrict):
        return _const_sorts(term.body, env)
    if isinstance(term, Cond):
        return _const_sorts(term.then, env) | _const_sorts(term.other, env)
    return frozenset()


class SymbolFreshener:
    """Mints unused symbol names by priming: f, f', f'', ..."""

    def __init__(self, taken):
        self.taken = set(taken)

    def reserve(self, name):
        self.taken.add(name)

    def fresh_like(self, name):
        cand = name + "'"
        while cand in self.taken:
            cand += "'"
        self.taken.add(cand)
        return cand


def _part_free_sort(part: FlatPart, env) -> frozenset:
    out = frozenset()
    for t in part.comp.values():
        out |= sort_of(t, env)
    return out - part.restricted


def _rename_part(part: FlatPart, mapping, env) -> FlatPart:
    for t in part.comp.values():
        clash = _const_sorts(t, env) & set(mapping)
        if clash:
            raise SyntaxError_(
                "cannot alpha-convert restricted symbol(s) %s: they occur in "
                "recursive constant definitions; rename them in the source"
                % ", ".join(sorted(clash)))
    comp = {p: rename_symbols(t, mapping) for p, t in part.comp.items()}
    restricted = frozenset(mapping.get(s, s) for s in part.restricted)
    return FlatPart(part.graph, comp, restricted)


def _merge_parts(parts, env, freshener, external_free=frozenset()) -> tuple:
    """Resolve restricted-name clashes between sibling parts.

    A part's restricted name must move out of the way when it occurs
    free in any sibling (or in the surrounding state), or when an
    earlier part already claimed it.  Returns the renamed parts and the
    union of their restriction sets.
    """
    free_sorts = [_part_free_sort(p, env) for p in parts]
    taken = set()
    out = []
    for i, part in enumerate(parts):
        mapping = {}
        others_free = set(external_free)
        for j, fs in enumerate(free_sorts):
            if j != i:
                others_free |= fs
        for s in sorted(part.restricted):
            if s in others_free or s in taken:
                mapping[s] = freshener.fresh_like(s)
            else:
                freshener.reserve(s)
        if mapping:
            part = _rename_part(part, mapping, env)
        taken |= part.restricted
        out.append(part)
    return out, taken


def _flatten_rec(term, env, alloc, freshener) -> FlatPart:
    cls = check_canonical(term, env)
    if isinstance(cls, NotCanonical):
        raise SyntaxError_("not canonical at %s: %s" % (cls.path or "<root>", cls.reason))
    if cls in (Canon.CGS, Canon.RCGS):
        p = alloc.fresh()
        return FlatPart(make_graph([p]), {p: term}, frozenset())
    if isinstance(term, GraphTerm):
        subs = {}
        order = []
        for v, t in term.places:
            subs[v] = _flatten_rec(t, env, alloc, freshener)
            order.append(v)
        parts, restricted = _merge_parts([subs[v] for v in order], env, freshener)
        for v, part in zip(order, parts):
            subs[v] = part
        vertices = set()
        comp = {}
        edges = set()
        for v in order:
            part = subs[v]
            vertices |= part.graph.vertices
            comp.update(part.comp)
            edges |= part.graph.edges
        for a, b in term.links:
            for p in subs[a].graph.vertices:
                for q in subs[b].graph.vertices:
                    edges.add((min(p, q), max(p, q)))
        return FlatPart(make_graph(vertices, edges), comp, frozenset(restricted))
    if isinstance(term, Restrict):
        sub = _flatten_rec(term.body, env, alloc, freshener)
        mapping = {}
        for s in sorted(sub.restricted & term.syms):
            mapping[s] = freshener.fresh_like(s)
        if mapping:
            sub = _rename_part(sub, mapping, env)
        for s in term.syms:
            freshener.reserve(s)
        return FlatPart(sub.graph, sub.comp, sub.restricted | term.syms)
    if isinstance(term, Const):
        params, body = env.lookup(term.name)
        vals = [eval_expr(a) for a in term.args]
        return _flatten_rec(subst_values(body, params, vals), env, alloc, freshener)
    if isinstance(term, ProcVar):
        raise SyntaxError_("cannot flatten an open process variable %s" % term.name)
    raise SyntaxError_("cannot flatten %s" % term_str(term))


def flatten(term, env: DefEnv, alloc=None) -> NetState:
    """Flatten a data-closed canonical process into a runtime state."""
    fv = free_data_vars(term)
    if fv:
        raise SyntaxError_("process is not data-closed: free %s" % ", ".join(sorted(fv)))
    cls = check_canonical(term, env)
    if isinstance(cls, NotCanonical):
        raise SyntaxError_("not canonical at %s: %s" % (cls.path or "<root>", cls.reason))
    alloc = alloc or GLOBAL_ALLOCATOR
    freshener = SymbolFreshener(_all_symbol_names(term, env))
    part = _flatten_rec(term, env, alloc, freshener)
    return make_state(part.graph, part.comp, part.restricted, env)


def _all_symbol_names(term, env) -> set:
    names = set(env.symbol_names())
    def walk(t):
        if isinstance(t, (Input, Output)):
            names.add(t.sym)
            for c in t.children:
                walk(c)
        elif isinstance(t, GraphTerm):
            for _v, s in t.places:
                walk(s)
        elif isinstance(t, Sum):
            walk(t.left); walk(t.right)
        elif isinstance(t, Restrict):
            names.update(t.syms)
            walk(t.body)
        elif isinstance(t, Cond):
            walk(t.then); walk(t.other)
    walk(term)
    return names


def state_symbol_names(state: NetState, env) -> set:
    names = set(env.symbol_names()) | set(state.restricted)
    for t in state.comp.values():
        names |= sort_of(t, env)
    return names


# ---------------------------------------------------------------------------
# Barbs
# ---------------------------------------------------------------------------

def barb_signature(state: NetState, env: DefEnv):
    """Per-location offered symbol sets, with restricted symbols removed.

    Any barb query is decidable from this family: a finite set B is a
    barb iff B has a system of distinct representatives among these
    per-location sets.
    """
    fam = []
    for p in state.locations():
        offered = barbs_of_component(state.comp[p], env)
        offered = frozenset(b for b in offered if b.name not in state.restricted)
        fam.append(offered)
    return fam


def _match_distinct(targets, offers) -> bool:
    """Is there an injection of targets into offer slots (Kuhn's algorithm)?"""
    slots = list(offers)
    assign = {}

    def try_assign(i, seen):
        for j, offered in enumerate(slots):
            if j in seen or targets[i] not in offered:
                continue
            seen.add(j)
            if j not in assign or try_assign(assign[j], seen):
                assign[j] = i
                return True
        return False

    for i in range(len(targets)):
        if not try_assign(i, set()):
            return False
    return True


def has_barb(state: NetState, barbs, env: DefEnv) -> bool:
    """True iff pairwise-distinct locations offer every element of B and
    none of them is restricted."""
    bs = list(barbs)
    for b in bs:
        if not isinstance(b, PSym):
            raise SyntaxError_("barb elements must be polarized symbols")
        if b.name in state.restricted:
            return False
    fam = barb_signature(state, env)
    return _match_distinct(bs, fam)


def satisfiable_barbs(state: NetState, env: DefEnv, alphabet=None) -> frozenset:
    """All satisfiable barb sets B over the given alphabet (default: the
    symbols the state actually offers)."""
    fam = barb_signature(state, env)
    offered = set()
    for f in fam:
        offered |= f
    if alphabet is not None:
        offered &= set(alphabet)
    offered = sorted(offered, key=lambda b: (b.name, b.co))
    out = set()
    limit = len(fam)
    def grow(idx, chosen):
        out.add(frozenset(chosen))
        if len(chosen) >= limit:
            return
        for k in range(idx, len(offered)):
            chosen.append(offered[k])
            if _match_distinct(chosen, fam):
                grow(k + 1, chosen)
            chosen.pop()
    grow(0, [])
    return frozenset(out)


def state_to_json_str(state: NetState) -> str:
    return json.dumps(state.to_json(), indent=2, sort_keys=True)
