import random

import pytest

from vccts.encodings import (
    LEAF, abp_env, abp_success_components, abp_system,
    automaton_to_process, example_counter_instance, node,
    recognizes, tree_automaton, tree_to_process, vccs_compose,
)
from vccts.netstate import flatten
from vccts.reduction import reachable, reduces_to_idle
from vccts.syntax import (
    Canon, Const, DefEnv, IDLE, Input, NIL, NotCanonical, Output,
    check_canonical, par, term_fingerprint, term_str,
)
from vccts.values import Lit, value_eq

from gen import random_dag_automaton, random_recognized_tree


def test_recognizer_examples():
    aut, q0, t = example_counter_instance()
    assert not recognizes(aut, q0, t)
    good = node("f", node("g1", LEAF, LEAF), node("g2", LEAF, LEAF))
    assert recognizes(aut, q0, good)
    assert recognizes(aut, q0, LEAF)           # idle leaves accepted anywhere
    assert not recognizes(aut, q0, node("g1", LEAF, LEAF))


def test_automaton_encoding_literal_shape():
    aut, q0, _t = example_counter_instance()
    entry, env = automaton_to_process(aut, q0, DefEnv())
    body = env.defs["St_Q"][1]
    assert term_str(body) == "f(x).(g1(x).(*, *), g2(x).(*, *))"
    assert check_canonical(entry, env) is Canon.RCGS
    for name in env.defs:
        assert not isinstance(check_canonical(env.defs[name][1], env), NotCanonical)


def test_automaton_empty_state_and_self_loop():
    aut = tree_automaton(["Q", "R"], {"a": 1}, [("Q", "a", ("Q",))])
    entry, env = automaton_to_process(aut, "Q", DefEnv())
    # self loop unrolls once then names itself
    assert term_str(env.defs["St_Q"][1]) == "a(x).(St_Q())"
    assert term_str(env.defs["St_R"][1]) == "*"
    from vccts.syntax import check_guarded
    check_guarded(env)


def test_tree_to_process_examples():
    assert tree_to_process(LEAF, 1) == IDLE
    aut, q0, t = example_counter_instance()
    assert term_str(tree_to_process(t, 1)) == \
        "~f(1).(~g1(1).(~g2(1).(*, *), *), *)"
    single = node("f", LEAF, LEAF)
    assert tree_to_process(single, 0) == Output("f", Lit(0), (IDLE, IDLE))


def test_counterexample_instance_reduces_to_idle():
    aut, q0, t = example_counter_instance()
    entry, env = automaton_to_process(aut, q0, DefEnv())
    state = flatten(par(entry, tree_to_process(t, 1)), env)
    ok, trace, status = reduces_to_idle(state, env)
    assert ok and status == "complete"
    assert not recognizes(aut, q0, t)


def test_recognized_trees_reduce_to_idle():
    rng = random.Random(67)
    done = 0
    while done < 40:
        aut = random_dag_automaton(rng)
        state = sorted(aut.states)[0]
        t = random_recognized_tree(rng, aut, state)
        assert recognizes(aut, state, t)
        entry, env = automaton_to_process(aut, state, DefEnv())
        s = flatten(par(entry, tree_to_process(t, rng.choice((0, 1)))), env)
        ok, _trace, status = reduces_to_idle(s, env, max_states=4000)
        assert status == "complete" and ok
        done += 1


def test_vccs_compose_shapes():
    env = DefEnv({"f": 1, "g": 1})
    two = vccs_compose([Output("f", Lit(1), (NIL,)), Output("g", Lit(2), (NIL,))],
                       (), env)
    assert len(two.graph.vertices) == 2 and len(two.graph.edges) == 1
    one = vccs_compose([Output("f", Lit(1), (NIL,))], (), env)
    assert len(one.graph.vertices) == 1 and not one.graph.edges
    three = vccs_compose([NIL, NIL, NIL], (), env)
    assert len(three.graph.edges) == 3      # complete triangle


def test_vccs_compose_rejects_wide_symbols():
    env = DefEnv({"k": 2})
    from vccts.syntax import SyntaxError_
    with pytest.raises(SyntaxError_):
        vccs_compose([Input("k", "x", (NIL, NIL))], (), env)


def test_abp_definitions_canonical():
    env = abp_env()
    for name, (_p, body) in env.defs.items():
        assert not isinstance(check_canonical(body, env), NotCanonical), name


def test_abp_reaches_success_state():
    for msgs in ((), (1,), (1, 2), (1, 2, 3)):
        state, env, _init = abp_system(msgs, 0)
        r = reachable(state, env, max_states=20000)
        assert r.status == "complete"
        wanted = sorted(term_fingerprint(t) for t in abp_success_components(msgs))
        hits = [k for k, st in r.states.items()
                if sorted(term_fingerprint(t) for t in st.comp.values()) == wanted]
        assert hits, "success state missing for %r" % (msgs,)


def test_abp_success_survives_oplus_context():
    from vccts.equivalence import compose_states
    msgs = (1, 2)
    state, env, _init = abp_system(msgs, 0)
    bystander = flatten(Output("send", Lit(0), (NIL,)), env)
    composed = compose_states(state, bystander, [], env)
    r = reachable(composed, env, max_states=20000)
    assert r.status == "complete"
    wanted = sorted(term_fingerprint(t) for t in abp_success_components(msgs))
    hits = [k for k, st in r.states.items()
            if sorted(term_fingerprint(t) for t in st.comp.values()
                      if term_fingerprint(t) in wanted) == wanted
            and len(st.comp) == len(wanted) + 1]
    assert hits


def test_abp_conservation_invariant():
    # at every round boundary, received ++ unsent == original messages
    msgs = (1, 2, 3)
    state, env, _init = abp_system(msgs, 0)
    r = reachable(state, env, max_states=20000)
    rounds = 0
    for st in r.states.values():
        p1 = [t for t in st.comp.values()
              if isinstance(t, Const) and t.name == "P1"]
        p2 = [t for t in st.comp.values()
              if isinstance(t, Const) and t.name == "P2"]
        succ = [t for t in st.comp.values()
                if isinstance(t, Const) and t.name == "Succ"]
        if p1 and p2:
            unsent = p1[0].args[0].value
            received = p2[0].args[0].value
            assert value_eq(received + unsent, msgs)
            rounds += 1
        if succ:
            assert value_eq(succ[0].args[0].value, msgs)
    assert rounds >= len(msgs)


def test_bad_bit_rejected():
    from vccts.syntax import SyntaxError_
    with pytest.raises(SyntaxError_):
        abp_system((1,), bit=2)


def test_automaton_json_roundtrip():
    from vccts.encodings import automaton_from_json, automaton_to_json
    aut, _q0, _t = example_counter_instance()
    assert automaton_from_json(automaton_to_json(aut)) == aut
    from vccts.syntax import SyntaxError_
    with pytest.raises(SyntaxError_):
        automaton_from_json({"states": ["Q"]})


def test_sigma_tree_from_term():
    from vccts.encodings import sigma_tree_from_term
    from vccts.parser import parse_term_src
    env = DefEnv({"f": 2, "g1": 2, "g2": 2})
    t = parse_term_src("f(x).(g1(x).(*, *), g2(x).(*, *))", env)
    tree = sigma_tree_from_term(t)
    assert tree == node("f", node("g1", LEAF, LEAF), node("g2", LEAF, LEAF))
    from vccts.syntax import SyntaxError_
    with pytest.raises(SyntaxError_):
        sigma_tree_from_term(parse_term_src("~f(1).(*, *)", env))
