"""Process terms, canonicality, substitution, sorts, and definitions.

Processes live on graph vertices and communicate over dual n-ary
symbols along edges.  A symbol f of arity n spawns n child processes on
each side of a communication.  The distinguished idle symbol "*" has
arity 0 and is self-dual.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .values import (
    EvalError, Expr, Lit, Var, expr_str, expr_vars, subst_expr, value_str,
)

IDLE_SYMBOL = "*"


class SyntaxError_(Exception):
    """Raised on malformed terms, bad arities, unresolved constants."""


@dataclass(frozen=True)
class PSym:
    """A symbol with polarity: plain f (input side) or co ~f (output side).

    The idle symbol is self-dual, so its co flag is forced to False.
    """
    name: str
    co: bool = False

    def __post_init__(self):
        if self.name == IDLE_SYMBOL and self.co:
            object.__setattr__(self, "co", False)

    def dual(self) -> "PSym":
        if self.name == IDLE_SYMBOL:
            return self
        return PSym(self.name, not self.co)

    def __repr__(self):
        return "~" + self.name if self.co else self.name


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Idle:
    def __repr__(self):
        return "*"


@dataclass(frozen=True)
class Nil:
    def __repr__(self):
        return "0"


@dataclass(frozen=True)
class ProcVar:
    name: str


@dataclass(frozen=True)
class Input:
    sym: str
    var: str
    children: tuple


@dataclass(frozen=True)
class Output:
    sym: str
    expr: Expr
    children: tuple


@dataclass(frozen=True)
class GraphTerm:
    """A finite graph of subterms over abstract vertex names.

    Vertex names are local to the literal; the runtime allocates fresh
    global locations when the term is flattened.  Vertices may carry any
    canonical subterm: guarded sums stand for single components, and
    nested graphs or restrictions are spliced in with every neighbour of
    the host vertex wired to every vertex of the splice.
    """
    places: tuple          # ((vertex_name, term), ...) in source order
    links: frozenset = frozenset()   # {(a, b)} with a < b, vertex names

    def vertex_names(self):
        return [v for v, _ in self.places]

    def term_at(self, name):
        for v, t in self.places:
            if v == name:
                return t
        raise SyntaxError_("no vertex %s in graph literal" % name)


@dataclass(frozen=True)
class Sum:
    left: "ProcTerm"
    right: "ProcTerm"


@dataclass(frozen=True)
class Restrict:
    body: "ProcTerm"
    syms: frozenset      # plain symbol names only


@dataclass(frozen=True)
class Cond:
    cond: Expr
    then: "ProcTerm"
    other: "ProcTerm"


@dataclass(frozen=True)
class Const:
    name: str
    args: tuple = ()     # expressions, closed at runtime


ProcTerm = object

IDLE = Idle()
NIL = Nil()


def graph_term(places, links=()):
    """Build a GraphTerm, normalising and checking the edge relation."""
    places = tuple(places)
    names = [v for v, _ in places]
    if len(set(names)) != len(names):
        raise SyntaxError_("duplicate vertex name in graph literal")
    norm = set()
    for a, b in links:
        if a == b:
            raise SyntaxError_("self-loop %s -- %s in graph literal" % (a, b))
        if a not in names or b not in names:
            raise SyntaxError_("edge %s -- %s mentions unknown vertex" % (a, b))
        norm.add((a, b) if a <= b else (b, a))
    return GraphTerm(places, frozenset(norm))


def par(left, right):
    """Parallel composition: complete cross edges between the operands."""
    return graph_term((("l", left), ("r", right)), (("l", "r"),))


def oplus(left, right):
    """Juxtaposition with no cross edges (the operands cannot interact)."""
    return graph_term((("l", left), ("r", right)))


def par_all(terms):
    out = None
    for t in terms:
        out = t if out is None else par(out, t)
    if out is None:
        raise SyntaxError_("empty parallel composition")
    return out


def oplus_all(terms):
    out = None
    for t in terms:
        out = t if out is None else oplus(out, t)
    if out is None:
        raise SyntaxError_("empty composition")
    return out


# ---------------------------------------------------------------------------
# Definitions
# ---------------------------------------------------------------------------

_env_counter = [0]


class DefEnv:
    """Signature plus constant definitions (and named entry processes).

    Treated as immutable once built; `extended` returns a copy with more
    material.  The version token keys per-environment caches.
    """

    def __init__(self, signature=None, defs=None, processes=None):
        self.sig = dict(signature or {})
        self.sig[IDLE_SYMBOL] = 0
        self.defs = dict(defs or {})
        self.processes = dict(processes or {})
        _env_counter[0] += 1
        self.version = _env_counter[0]
        self._cs_cache = {}
        self._sort_cache = {}

    def arity(self, sym: str) -> int:
        if sym not in self.sig:
            raise SyntaxError_("undeclared symbol %s" % sym)
        return self.sig[sym]

    def lookup(self, name: str):
        if name not in self.defs:
            raise SyntaxError_("unresolved constant %s" % name)
        return self.defs[name]

    def extended(self, signature=None, defs=None, processes=None) -> "DefEnv":
        sig = dict(self.sig)
        sig.update(signature or {})
        dd = dict(self.defs)
        for name, entry in (defs or {}).items():
            if name in dd and dd[name] != entry:
                raise SyntaxError_("constant %s already defined" % name)
            dd[name] = entry
        pp = dict(self.processes)
        pp.update(processes or {})
        return DefEnv(sig, dd, pp)

    def symbol_names(self):
        return set(self.sig)


# ---------------------------------------------------------------------------
# Well-formedness
# ---------------------------------------------------------------------------

def validate_term(term, env: DefEnv, path="") -> None:
    """Check arities, graph shape and restriction sets, recursively."""
    if isinstance(term, (Idle, Nil, ProcVar)):
        return
    if isinstance(term, Input):
        n = env.arity(term.sym)
        if n == 0:
            raise SyntaxError_("%s: prefix on the idle symbol" % path)
        if len(term.children) != n:
            raise SyntaxError_("%s: %s expects %d children, got %d"
                               % (path, term.sym, n, len(term.children)))
        for i, c in enumerate(term.children):
            validate_term(c, env, "%s.%s[%d]" % (path, term.sym, i))
        return
    if isinstance(term, Output):
        n = env.arity(term.sym)
        if n == 0:
            raise SyntaxError_("%s: prefix on the idle symbol" % path)
        if len(term.children) != n:
            raise SyntaxError_("%s: ~%s expects %d children, got %d"
                               % (path, term.sym, n, len(term.children)))
        for i, c in enumerate(term.children):
            validate_term(c, env, "%s.~%s[%d]" % (path, term.sym, i))
        return
    if isinstance(term, GraphTerm):
        for v, t in term.places:
            validate_term(t, env, "%s.%s" % (path, v))
        return
    if isinstance(term, Sum):
        validate_term(term.left, env, path + ".+L")
        validate_term(term.right, env, path + ".+R")
        return
    if isinstance(term, Restrict):
        for s in term.syms:
            if s == IDLE_SYMBOL:
                raise SyntaxError_("%s: cannot restrict the idle symbol" % path)
            env.arity(s)
        validate_term(term.body, env, path + ".body")
        return
    if isinstance(term, Cond):
        validate_term(term.then, env, path + ".then")
        validate_term(term.other, env, path + ".else")
        return
    if isinstance(term, Const):
        params, _body = env.lookup(term.name)
        if len(params) != len(term.args):
            raise SyntaxError_("%s: %s takes %d parameters, got %d"
                               % (path, term.name, len(params), len(term.args)))
        return
    raise SyntaxError_("%s: not a process term: %r" % (path, term))


class Canon(Enum):
    CGS = "CGS"
    RCGS = "RCGS"
    CP = "CP"


@dataclass(frozen=True)
class NotCanonical:
    reason: str
    path: str

    def __bool__(self):
        return False


def check_canonical(term, env: DefEnv, path="", _memo=None):
    """Classify a term as CGS, RCGS or CP, or explain why it is neither.

    Returns the strongest derivable class (CGS implies RCGS; a guarded
    sum also serves in CP positions as a one-vertex graph).  Recursive
    constants are handled with an assume-and-check memo.
    """
    if _memo is None:
        _memo = {}
    if isinstance(term, Idle) or isinstance(term, Nil):
        return Canon.CGS
    if isinstance(term, ProcVar):
        return Canon.CP
    if isinstance(term, (Input, Output)):
        for i, c in enumerate(term.children):
            r = check_canonical(c, env, "%s.%s[%d]" % (path, term.sym, i), _memo)
            if isinstance(r, NotCanonical):
                return r
        return Canon.CGS
    if isinstance(term, Sum):
        for side, sub in (("+L", term.left), ("+R", term.right)):
            r = check_canonical(sub, env, path + "." + side, _memo)
            if isinstance(r, NotCanonical):
                return r
            if r is not Canon.CGS:
                return NotCanonical("unguarded %s in sum" % _shape_name(sub),
                                    path + "." + side)
        return Canon.CGS
    if isinstance(term, Cond):
        for side, sub in (("then", term.then), ("else", term.other)):
            r = check_canonical(sub, env, path + "." + side, _memo)
            if isinstance(r, NotCanonical):
                return r
            if r is not Canon.CGS:
                return NotCanonical("conditional branch is not a guarded sum",
                                    path + "." + side)
        return Canon.CGS
    if isinstance(term, GraphTerm):
        for v, t in term.places:
            r = check_canonical(t, env, "%s.%s" % (path, v), _memo)
            if isinstance(r, NotCanonical):
                return r
        return Canon.CP
    if isinstance(term, Restrict):
        r = check_canonical(term.body, env, path + ".body", _memo)
        if isinstance(r, NotCanonical):
            return r
        return Canon.CP
    if isinstance(term, Const):
        params, body = env.lookup(term.name)
        if len(params) != len(term.args):
            return NotCanonical("arity mismatch on constant %s" % term.name, path)
        if term.name in _memo:
            return _memo[term.name]
        _memo[term.name] = Canon.RCGS      # optimistic, checked below
        r = check_canonical(body, env, "%s.%s" % (path, term.name), _memo)
        if isinstance(r, NotCanonical):
            del _memo[term.name]
            return r
        result = Canon.CP if r is Canon.CP else Canon.RCGS
        _memo[term.name] = result
        return result
    return NotCanonical("not a process term: %r" % (term,), path)


def _shape_name(term) -> str:
    if isinstance(term, ProcVar):
        return "process variable %s" % term.name
    if isinstance(term, GraphTerm):
        return "graph"
    if isinstance(term, Restrict):
        return "restriction"
    if isinstance(term, Const):
        return "constant %s" % term.name
    return type(term).__name__


def is_canonical(term, env) -> bool:
    return not isinstance(check_canonical(term, env), NotCanonical)


def check_guarded(env: DefEnv) -> None:
    """Every constant body must reach prefix/0/* heads through constants
    and conditionals in finitely many steps; otherwise cs() would spin."""
    def chase(term, seen, path):
        if isinstance(term, (Idle, Nil, Input, Output)):
            return
        if isinstance(term, Sum):
            chase(term.left, seen, path)
            chase(term.right, seen, path)
            return
        if isinstance(term, Cond):
            chase(term.then, seen, path)
            chase(term.other, seen, path)
            return
        if isinstance(term, Const):
            if term.name in seen:
                raise SyntaxError_("unguarded recursion through constant %s (%s)"
                                   % (term.name, path))
            _p, body = env.lookup(term.name)
            chase(body, seen | {term.name}, path + ">" + term.name)
            return
        # graphs/restrictions/variables have no sum head to resolve
        return

    for name, (_params, body) in env.defs.items():
        chase(body, {name}, name)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def subst_value(term, var: str, val):
    """Capture-free substitution of a value for a free data variable."""
    if isinstance(term, (Idle, Nil, ProcVar)):
        return term
    if isinstance(term, Input):
        if term.var == var:
            return term      # binder shadows
        return Input(term.sym, term.var,
                     tuple(subst_value(c, var, val) for c in term.children))
    if isinstance(term, Output):
        return Output(term.sym, subst_expr(term.expr, var, val),
                      tuple(subst_value(c, var, val) for c in term.children))
    if isinstance(term, GraphTerm):
        return GraphTerm(tuple((v, subst_value(t, var, val)) for v, t in term.places),
                         term.links)
    if isinstance(term, Sum):
        return Sum(subst_value(term.left, var, val), subst_value(term.right, var, val))
    if isinstance(term, Restrict):
        return Restrict(subst_value(term.body, var, val), term.syms)
    if isinstance(term, Cond):
        return Cond(subst_expr(term.cond, var, val),
                    subst_value(term.then, var, val),
                    subst_value(term.other, var, val))
    if isinstance(term, Const):
        return Const(term.name, tuple(subst_expr(a, var, val) for a in term.args))
    raise SyntaxError_("not a process term: %r" % (term,))


def subst_values(term, names, vals):
    for x, v in zip(names, vals):
        term = subst_value(term, x, v)
    return term


def subst_process(host, var: str, payload):
    """Replace every free occurrence of a process variable."""
    if isinstance(host, ProcVar):
        return payload if host.name == var else host
    if isinstance(host, (Idle, Nil)):
        return host
    if isinstance(host, Input):
        return Input(host.sym, host.var,
                     tuple(subst_process(c, var, payload) for c in host.children))
    if isinstance(host, Output):
        return Output(host.sym, host.expr,
                      tuple(subst_process(c, var, payload) for c in host.children))
    if isinstance(host, GraphTerm):
        return GraphTerm(tuple((v, subst_process(t, var, payload)) for v, t in host.places),
                         host.links)
    if isinstance(host, Sum):
        return Sum(subst_process(host.left, var, payload),
                   subst_process(host.right, var, payload))
    if isinstance(host, Restrict):
        return Restrict(subst_process(host.body, var, payload), host.syms)
    if isinstance(host, Cond):
        return Cond(host.cond, subst_process(host.then, var, payload),
                    subst_process(host.other, var, payload))
    if isinstance(host, Const):
        return host
    raise SyntaxError_("not a process term: %r" % (host,))


def free_data_vars(term) -> frozenset:
    if isinstance(term, (Idle, Nil, ProcVar)):
        return frozenset()
    if isinstance(term, Input):
        out = frozenset()
        for c in term.children:
            out |= free_data_vars(c)
        return out - {term.var}
    if isinstance(term, Output):
        out = expr_vars(term.expr)
        for c in term.children:
            out |= free_data_vars(c)
        return out
    if isinstance(term, GraphTerm):
        out = frozenset()
        for _v, t in term.places:
            out |= free_data_vars(t)
        return out
    if isinstance(term, Sum):
        return free_data_vars(term.left) | free_data_vars(term.right)
    if isinstance(term, Restrict):
        return free_data_vars(term.body)
    if isinstance(term, Cond):
        out = expr_vars(term.cond)
        return out | free_data_vars(term.then) | free_data_vars(term.other)
    if isinstance(term, Const):
        out = frozenset()
        for a in term.args:
            out |= expr_vars(a)
        return out
    raise SyntaxError_("not a process term: %r" % (term,))


# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------

def sort_of(term, env: DefEnv, _active=None) -> frozenset:
    """The least set of plain symbols a process can ever mention.

    Feeds fresh-symbol generation: a symbol outside the sort can never
    be observed on or interact with the process.
    """
    if _active is None:
        key = term
        cached = env._sort_cache.get(key)
        if cached is not None:
            return cached
        result = sort_of(term, env, frozenset())
        env._sort_cache[key] = result
        return result
    if isinstance(term, (Idle, Nil, ProcVar)):
        return frozenset()
    if isinstance(term, (Input, Output)):
        out = frozenset((term.sym,))
        for c in term.children:
            out |= sort_of(c, env, _active)
        return out
    if isinstance(term, GraphTerm):
        out = frozenset()
        for _v, t in term.places:
            out |= sort_of(t, env, _active)
        return out
    if isinstance(term, Sum):
        return sort_of(term.left, env, _active) | sort_of(term.right, env, _active)
    if isinstance(term, Restrict):
        return sort_of(term.body, env, _active) - term.syms
    if isinstance(term, Cond):
        return sort_of(term.then, env, _active) | sort_of(term.other, env, _active)
    if isinstance(term, Const):
        if term.name in _active:
            return frozenset()
        _params, body = env.lookup(term.name)
        return sort_of(body, env, _active | {term.name})
    raise SyntaxError_("not a process term: %r" % (term,))


# ---------------------------------------------------------------------------
# Printing and fingerprints
# ---------------------------------------------------------------------------

def term_str(term) -> str:
    if isinstance(term, Idle):
        return "*"
    if isinstance(term, Nil):
        return "0"
    if isinstance(term, ProcVar):
        return term.name
    if isinstance(term, Input):
        return "%s(%s).(%s)" % (term.sym, term.var,
                                ", ".join(term_str(c) for c in term.children))
    if isinstance(term, Output):
        return "~%s(%s).(%s)" % (term.sym, expr_str(term.expr),
                                 ", ".join(term_str(c) for c in term.children))
    if isinstance(term, GraphTerm):
        bits = "; ".join("%s: %s" % (v, term_str(t)) for v, t in term.places)
        if term.links:
            edges = ", ".join("%s -- %s" % (a, b) for a, b in sorted(term.links))
            return "graph { %s; edges { %s } }" % (bits, edges)
        return "graph { %s }" % bits
    if isinstance(term, Sum):
        return "%s + %s" % (term_str(term.left), term_str(term.right))
    if isinstance(term, Restrict):
        return "(%s) restrict {%s}" % (term_str(term.body), ", ".join(sorted(term.syms)))
    if isinstance(term, Cond):
        return "(if %s then %s else %s)" % (expr_str(term.cond),
                                            term_str(term.then), term_str(term.other))
    if isinstance(term, Const):
        if term.args:
            return "%s(%s)" % (term.name, ", ".join(expr_str(a) for a in term.args))
        return "%s()" % term.name
    raise SyntaxError_("not a process term: %r" % (term,))


_fp_cache = {}


def term_fingerprint(term, _binders=None) -> str:
    """Stable serialisation used for state identity.  Bound data
    variables are numbered by binder depth so alpha-variants coincide."""
    if _binders is None:
        key = term
        hit = _fp_cache.get(key)
        if hit is not None:
            return hit
        out = term_fingerprint(term, ())
        _fp_cache[key] = out
        return out
    b = _binders
    if isinstance(term, Idle):
        return "*"
    if isinstance(term, Nil):
        return "0"
    if isinstance(term, ProcVar):
        return "X:" + term.name
    if isinstance(term, Input):
        inner = ",".join(term_fingerprint(c, b + (term.var,)) for c in term.children)
        return "i!%s(%s)" % (term.sym, inner)
    if isinstance(term, Output):
        inner = ",".join(term_fingerprint(c, b) for c in term.children)
        return "o!%s[%s](%s)" % (term.sym, _expr_fp(term.expr, b), inner)
    if isinstance(term, GraphTerm):
        names = term.vertex_names()
        idx = {v: i for i, v in enumerate(names)}
        comps = ";".join(term_fingerprint(t, b) for _v, t in term.places)
        edges = ",".join(sorted("%d-%d" % (min(idx[a], idx[b_]), max(idx[a], idx[b_]))
                                for a, b_ in term.links))
        return "g{%s|%s}" % (comps, edges)
    if isinstance(term, Sum):
        return "(%s)+(%s)" % (term_fingerprint(term.left, b), term_fingerprint(term.right, b))
    if isinstance(term, Restrict):
        return "(%s)\\{%s}" % (term_fingerprint(term.body, b), ",".join(sorted(term.syms)))
    if isinstance(term, Cond):
        return "if[%s](%s)(%s)" % (_expr_fp(term.cond, b),
                                   term_fingerprint(term.then, b),
                                   term_fingerprint(term.other, b))
    if isinstance(term, Const):
        return "k!%s(%s)" % (term.name, ",".join(_expr_fp(a, b) for a in term.args))
    raise SyntaxError_("not a process term: %r" % (term,))


def _expr_fp(e, binders) -> str:
    from .values import Bin, ListE, PairE, Un
    if isinstance(e, Var):
        for depth in range(len(binders) - 1, -1, -1):
            if binders[depth] == e.name:
                return "?%d" % depth
        return "v:" + e.name
    if isinstance(e, Lit):
        return "l:" + value_str(e.value)
    if isinstance(e, Un):
        return "%s(%s)" % (e.op, _expr_fp(e.arg, binders))
    if isinstance(e, Bin):
        return "%s(%s,%s)" % (e.op, _expr_fp(e.left, binders), _expr_fp(e.right, binders))
    if isinstance(e, PairE):
        return "pair(%s,%s)" % (_expr_fp(e.fst, binders), _expr_fp(e.snd, binders))
    if isinstance(e, ListE):
        return "list(%s)" % ",".join(_expr_fp(it, binders) for it in e.items)
    raise EvalError("not an expression: %r" % (e,))


def rename_symbols(term, mapping: dict):
    """Rename symbols throughout a term (used when hoisting restrictions)."""
    if isinstance(term, (Idle, Nil, ProcVar)):
        return term
    if isinstance(term, Input):
        return Input(mapping.get(term.sym, term.sym), term.var,
                     tuple(rename_symbols(c, mapping) for c in term.children))
    if isinstance(term, Output):
        return Output(mapping.get(term.sym, term.sym), term.expr,
                      tuple(rename_symbols(c, mapping) for c in term.children))
    if isinstance(term, GraphTerm):
        return GraphTerm(tuple((v, rename_symbols(t, mapping)) for v, t in term.places),
                         term.links)
    if isinstance(term, Sum):
        return Sum(rename_symbols(term.left, mapping), rename_symbols(term.right, mapping))
    if isinstance(term, Restrict):
        return Restrict(rename_symbols(term.body, mapping),
                        frozenset(mapping.get(s, s) for s in term.syms))
    if isinstance(term, Cond):
        return Cond(term.cond, rename_symbols(term.then, mapping),
                    rename_symbols(term.other, mapping))
    if isinstance(term, Const):
        return term
    raise SyntaxError_("not a process term: %r" % (term,))
