"""The localized labelled transition system.

Labels are either tau or `p : action . (L1,...,Ln)` where the L_i are
the location sets of the spawned children.  Several labels may fire in
one step when the multiset is pairwise unrelated: visible labels at
distinct locations must use distinct symbols of the polarized alphabet
(a symbol and its co-symbol are distinct, so dual actions may fire
together; matched dual pairs across an edge become taus).

Input transitions use early semantics: one step per value drawn from a
finite, per-run value universe.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass

from .graphs import GLOBAL_ALLOCATOR, canonical_key, compose_residuals, identity_residual
from .netstate import InputHead, NetState, OutputHead, cs_head
from .reduction import comm_redexes, fire_comm, fire_prefix
from .syntax import PSym
from .values import value_key, value_str


@dataclass(frozen=True, eq=False)
class Action:
    sym: str
    co: bool
    value: object

    def psym(self) -> PSym:
        return PSym(self.sym, self.co)

    def __eq__(self, other):
        return isinstance(other, Action) and self.sym == other.sym \
            and self.co == other.co and value_key(self.value) == value_key(other.value)

    def __hash__(self):
        return hash((self.sym, self.co, value_key(self.value)))

    def __repr__(self):
        return "%s%s%s" % ("~" if self.co else "", self.sym, value_str(self.value))


@dataclass(frozen=True)
class VisLabel:
    loc: object
    action: Action
    lvec: tuple          # one frozenset of locations per child

    def __repr__(self):
        vec = ", ".join("{%s}" % ", ".join(map(str, sorted(s))) for s in self.lvec)
        return "%s:%s.(%s)" % (self.loc, self.action, vec)


class Tau:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "tau"


TAU = Tau()


class Multiset:
    """Multiset of labels with the union / clamped-difference algebra."""

    def __init__(self, items=()):
        self._c = Counter(items)

    def union(self, other) -> "Multiset":
        out = Multiset()
        out._c = self._c + other._c
        return out

    def difference(self, other) -> "Multiset":
        out = Multiset()
        c = Counter(self._c)
        for k, n in other._c.items():
            c[k] = max(0, c[k] - n)
        out._c = Counter({k: n for k, n in c.items() if n > 0})
        return out

    def size(self) -> int:
        return sum(self._c.values())

    def count(self, item) -> int:
        return self._c.get(item, 0)

    def items(self):
        return self._c.items()

    def elements(self):
        return list(self._c.elements())

    def visible(self):
        return [l for l in self.elements() if isinstance(l, VisLabel)]

    def actions(self) -> Counter:
        return Counter(l.action for l in self.visible())

    def __eq__(self, other):
        return isinstance(other, Multiset) and self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __repr__(self):
        return "{%s}" % ", ".join(repr(l) for l in sorted(
            self.elements(), key=lambda x: (isinstance(x, VisLabel), repr(x))))


def punrel(labels) -> bool:
    """Pairwise unrelated: visible labels at distinct locations carry
    distinct polarized symbols; tau is unrelated to everything."""
    vis = [l for l in (labels.elements() if isinstance(labels, Multiset) else labels)
           if isinstance(l, VisLabel)]
    for a, b in itertools.combinations(vis, 2):
        if a.loc != b.loc and a.action.psym() == b.action.psym():
            return False
    return True


# ---------------------------------------------------------------------------
# Firings: the atoms a (multi-)step is assembled from.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VisFire:
    loc: object
    index: int           # summand index at loc
    action: Action


@dataclass(frozen=True)
class CommFire:
    p: object            # input side
    q: object            # output side
    i: int
    j: int
    sym: str
    value: object


@dataclass
class LabeledStep:
    source: NetState
    target: NetState
    labels: Multiset
    residual: dict
    firings: tuple

    def cross_edges(self, left_locs, right_locs):
        """Cross pairs of the target with respect to a split of the
        source locations (the D' record of a composed step)."""
        left = set(left_locs)
        right = set(right_locs)
        out = set()
        for a, b in self.target.graph.edges:
            ra, rb = self.residual[a], self.residual[b]
            if ra in left and rb in right:
                out.add((a, b))
            elif ra in right and rb in left:
                out.add((b, a))
        return out

    def describe(self) -> str:
        return "%r" % self.labels


def _vis_candidates(state: NetState, env, universe):
    """All visible firings: one input per universe value per input head,
    one output per output head; restricted symbols produce nothing."""
    out = []
    for p in state.locations():
        for idx, head in enumerate(cs_head(state.comp[p], env)):
            if isinstance(head, InputHead):
                if head.sym in state.restricted:
                    continue
                for v in universe:
                    out.append(VisFire(p, idx, Action(head.sym, False, v)))
            elif isinstance(head, OutputHead):
                if head.sym in state.restricted:
                    continue
                out.append(VisFire(p, idx, Action(head.sym, True, head.value)))
    return out


def _comm_candidates(state: NetState, env):
    return [CommFire(p, q, i, j, sym, v)
            for p, q, i, j, sym, v in comm_redexes(state, env)]


def _locations(fire):
    if isinstance(fire, VisFire):
        return {fire.loc}
    return {fire.p, fire.q}


def _combo_admissible(state, combo) -> bool:
    """Is this set of firings one simultaneous step?

    Visible labels persist through every level of a nested composition,
    so they must be pairwise unrelated.  Communications can always be
    matched pairwise-early (compose their two endpoints first), so they
    impose no symbol constraints of their own.  A dual visible pair with
    the same value across an edge is forcibly matched at the level where
    the endpoints meet and can never stay visible.
    """
    locs = set()
    for f in combo:
        fl = _locations(f)
        if locs & fl:
            return False
        locs |= fl
    vis = [f for f in combo if isinstance(f, VisFire)]
    seen = set()
    for f in vis:
        ps = f.action.psym()
        if ps in seen:
            return False
        seen.add(ps)
    for a, b in itertools.combinations(vis, 2):
        if a.action.sym == b.action.sym and a.action.co != b.action.co \
                and value_key(a.action.value) == value_key(b.action.value) \
                and state.graph.has_edge(a.loc, b.loc):
            return False
    return True


def _apply_firings(state: NetState, combo, env, alloc):
    """Fire a combo sequentially (order-insensitive by the diamond
    property) and collect labels and the composed residual."""
    cur = state
    residual = identity_residual(state.graph)
    labels = []
    for f in sorted(combo, key=_fire_sort_key):
        if isinstance(f, VisFire):
            head = cs_head(cur.comp[f.loc], env)[f.index]
            target, res, lvec = fire_prefix(cur, f.loc, head, f.action.value, env, alloc)
            labels.append(VisLabel(f.loc, f.action, lvec))
        else:
            target, res, _v, _inl, _outl = fire_comm(cur, f.p, f.q, f.i, f.j, env, alloc)
            labels.append(TAU)
        residual = compose_residuals(residual, res)
        cur = target
    return cur, residual, Multiset(labels)


def _fire_sort_key(f):
    if isinstance(f, VisFire):
        return (0, f.loc, f.index, repr(f.action))
    return (1, f.p, f.q, f.i, f.j)


def single_transitions(state: NetState, env, universe, alloc=None) -> list:
    """All single-labelled steps: early inputs over the universe,
    outputs with their evaluated payloads, and taus across edges."""
    alloc = alloc or GLOBAL_ALLOCATOR
    steps = []
    for f in _vis_candidates(state, env, universe):
        target, residual, labels = _apply_firings(state, (f,), env, alloc)
        steps.append(LabeledStep(state, target, labels, residual, (f,)))
    for f in _comm_candidates(state, env):
        target, residual, labels = _apply_firings(state, (f,), env, alloc)
        steps.append(LabeledStep(state, target, labels, residual, (f,)))
    return steps


def multi_transitions(state: NetState, env, universe, max_width=None, alloc=None) -> list:
    """All pairwise-unrelated multi-steps of size up to max_width
    (default: the number of components)."""
    alloc = alloc or GLOBAL_ALLOCATOR
    if max_width is None:
        max_width = len(state.graph.vertices)
    candidates = _vis_candidates(state, env, universe) + _comm_candidates(state, env)
    steps = []
    seen = set()

    def grow(start, combo):
        if combo:
            key = tuple(sorted(map(_fire_sort_key, combo)))
            if key in seen:
                return
            seen.add(key)
            target, residual, labels = _apply_firings(state, combo, env, alloc)
            steps.append(LabeledStep(state, target, labels, residual, tuple(combo)))
        if len(combo) >= max_width:
            return
        for k in range(start, len(candidates)):
            nxt = combo + [candidates[k]]
            if _combo_admissible(state, nxt):
                grow(k + 1, nxt)

    grow(0, [])
    return steps


# ---------------------------------------------------------------------------
# Weak transitions
# ---------------------------------------------------------------------------

def state_key_with_residual(state: NetState, residual: dict) -> str:
    colors = {p: "%s@%s" % (fp, residual[p])
              for p, fp in state.coloring().items()}
    return canonical_key(state.graph, colors) + "!R{%s}" % ",".join(sorted(state.restricted))


def tau_closure(state: NetState, env, max_states=2000, alloc=None):
    """All (state, residual) reachable by tau steps, deduplicated up to
    isomorphism that respects the residual back to the root."""
    alloc = alloc or GLOBAL_ALLOCATOR
    root_res = identity_residual(state.graph)
    items = [(state, root_res)]
    seen = {state_key_with_residual(state, root_res)}
    frontier = [(state, root_res)]
    status = "complete"
    while frontier:
        cur, res = frontier.pop()
        for p, q, i, j, _sym, _v in comm_redexes(cur, env):
            target, step_res, _v2, _inl, _outl = fire_comm(cur, p, q, i, j, env, alloc)
            total = compose_residuals(res, step_res)
            key = state_key_with_residual(target, total)
            if key in seen:
                continue
            if len(items) >= max_states:
                status = "truncated"
                continue
            seen.add(key)
            items.append((target, total))
            frontier.append((target, total))
    return items, status


@dataclass
class WeakResult:
    target: NetState
    matched: tuple        # ((action, defender location in the pre-tau state), ...)
    residual: dict        # composed over all three phases
    landing: dict         # residual of the first tau phase only


def _visible_steps_matching(state: NetState, env, wanted: Counter, alloc):
    """Pure-visible multi-steps whose action multiset equals `wanted`."""
    universe = sorted({a.value for a in wanted}, key=value_str)
    cands = [f for f in _vis_candidates(state, env, universe)
             if wanted.get(f.action, 0) > 0]
    out = []
    seen = set()

    def grow(start, combo, remaining):
        if sum(remaining.values()) == 0:
            key = tuple(sorted(map(_fire_sort_key, combo)))
            if key not in seen:
                seen.add(key)
                target, residual, labels = _apply_firings(state, combo, env, alloc)
                out.append((target, residual, tuple(combo)))
            return
        for k in range(start, len(cands)):
            f = cands[k]
            if remaining.get(f.action, 0) <= 0:
                continue
            nxt = combo + [f]
            if not _combo_admissible(state, nxt):
                continue
            remaining[f.action] -= 1
            grow(k + 1, nxt, remaining)
            remaining[f.action] += 1

    grow(0, [], Counter(wanted))
    return out


def weak_transitions(state: NetState, env, actions, max_tau_states=2000, alloc=None):
    """tau* . visible-multiset . tau* composites matching the given
    action multiset (locations free).

    Each result records, per fired label, the defender location mapped
    through the first tau phase (the side condition of the bisimulation
    game), and the fully composed residual.  For an empty multiset this
    is the plain tau* closure.
    """
    alloc = alloc or GLOBAL_ALLOCATOR
    wanted = Counter(actions)
    phase1, status = tau_closure(state, env, max_tau_states, alloc)
    results = []
    seen = set()

    def emit(target, matched, total, landing):
        key = (state_key_with_residual(target, total), tuple(sorted(
            (repr(a), l) for a, l in matched)))
        if key in seen:
            return
        seen.add(key)
        results.append(WeakResult(target, matched, total, landing))

    if not wanted:
        for st, res in phase1:
            emit(st, (), res, res)
        return results, status

    for mid_state, rho in phase1:
        for target1, rho1, combo in _visible_steps_matching(mid_state, env, wanted, alloc):
            matched = tuple(sorted(((f.action, rho[f.loc]) for f in combo),
                                   key=lambda t: (repr(t[0]), t[1])))
            base = compose_residuals(rho, rho1)
            phase3, st3 = tau_closure(target1, env, max_tau_states, alloc)
            if st3 == "truncated":
                status = "truncated"
            for final, rho2 in phase3:
                emit(final, matched, compose_residuals(base, rho2), rho)
    return results, status


# ---------------------------------------------------------------------------
# Diamond property support
# ---------------------------------------------------------------------------

def _refire(state, fire, env, alloc):
    if isinstance(fire, VisFire):
        head = cs_head(state.comp[fire.loc], env)[fire.index]
        target, res, _lvec = fire_prefix(state, fire.loc, head, fire.action.value,
                                         env, alloc)
        return target, res
    target, res, _v, _inl, _outl = fire_comm(state, fire.p, fire.q, fire.i, fire.j,
                                             env, alloc)
    return target, res


@dataclass
class DiamondReport:
    checked: int
    counterexamples: list

    def ok(self) -> bool:
        return not self.counterexamples


def diamond_check(state: NetState, env, universe, alloc=None) -> DiamondReport:
    """For every size-2 unrelated multi-step, both sequential
    interleavings must exist, land on the same state up to isomorphism,
    and compose to the same residual."""
    alloc = alloc or GLOBAL_ALLOCATOR
    checked = 0
    bad = []
    for step in multi_transitions(state, env, universe, max_width=2, alloc=alloc):
        if len(step.firings) != 2:
            continue
        checked += 1
        f1, f2 = step.firings
        want = state_key_with_residual(step.target, step.residual)
        for order in ((f1, f2), (f2, f1)):
            try:
                mid, r1 = _refire(state, order[0], env, alloc)
                fin, r2 = _refire(mid, order[1], env, alloc)
            except Exception as exc:     # noqa: BLE001 - reported, not raised
                bad.append((step, order, "second step not enabled: %s" % exc))
                continue
            got = state_key_with_residual(fin, compose_residuals(r1, r2))
            if got != want:
                bad.append((step, order, "interleaving disagrees with the joint step"))
    return DiamondReport(checked, bad)


def decompose_check(state: NetState, env, universe, alloc=None):
    """Every multi-step must be realizable as single steps enumerating
    its labels with residuals composing to the joint residual."""
    alloc = alloc or GLOBAL_ALLOCATOR
    failures = []
    checked = 0
    for step in multi_transitions(state, env, universe, alloc=alloc):
        n = len(step.firings)
        if n < 2:
            continue
        checked += 1
        want = state_key_with_residual(step.target, step.residual)
        orders = itertools.permutations(step.firings) if n <= 3 \
            else [tuple(sorted(step.firings, key=_fire_sort_key))]
        ok_any = False
        for order in orders:
            try:
                cur = state
                total = identity_residual(state.graph)
                for f in order:
                    cur, res = _refire(cur, f, env, alloc)
                    total = compose_residuals(total, res)
                if state_key_with_residual(cur, total) == want:
                    ok_any = True
                else:
                    failures.append((step, order, "decomposition disagrees"))
            except Exception as exc:     # noqa: BLE001
                failures.append((step, order, str(exc)))
        if not ok_any:
            failures.append((step, None, "no single-step realization found"))
    return checked, failures
