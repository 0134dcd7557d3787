import random

from hypothesis import given, settings
from hypothesis import strategies as st

from support import random_machine, sweep, targets
from xduce import (Decomposer, Fst, build_dna2aa, build_lowercase, build_newspeak, build_safety_showcase,
                   build_token_to_byte, check_safety, dfa_decomposition, has_finite_closure)
from xduce.finiteness import (FINITE_CLOSURE, IP_UNIVERSAL, SAFE_BY_SUCCESSORS, UNSAFE, is_strict_prefix_monotone,
                              is_universal_state, precover_dfa, quotient_bound_check)
from xduce.fst import EPS, accepts, apply, is_prefix
from xduce.finiteness import strings_upto


def t(x):
    return tuple(x)


def test_finite_closure_showcase():
    f = build_safety_showcase()
    assert has_finite_closure(f, 2)
    assert not has_finite_closure(f, 3)
    dead = Fst(2, [0], [], [(0, "a", "a", 1)], ("a",), ("a",))
    assert has_finite_closure(dead, 0)


def test_showcase_classes():
    rep = check_safety(build_safety_showcase())
    assert rep.classes == (SAFE_BY_SUCCESSORS, SAFE_BY_SUCCESSORS, FINITE_CLOSURE, IP_UNIVERSAL)
    # the absorbing state loops with empty output, which the cycle check flags
    assert rep.eps_output_cycle is not None and not rep.safe
    assert rep.to_dict()["verdict"] == "not guaranteed finite"


def test_dna_safe():
    rep = check_safety(build_dna2aa())
    assert rep.safe and set(rep.classes) == {IP_UNIVERSAL}
    assert rep.verdict == "finite decomposition guaranteed"


def test_silent_loop_unsafe():
    f = Fst(1, [0], [0], [(0, "x", EPS, 0)], ("x", "y"), ("z",))
    rep = check_safety(f)
    assert not rep.safe and rep.eps_output_cycle == [(0, "x", EPS, 0)]


def test_unsafe_state():
    # state 0 is neither universal nor finite, and loops on itself
    f = Fst(1, [0], [0], [(0, "a", "a", 0)], ("a", "b"), ("a",))
    rep = check_safety(f)
    assert rep.classes == (UNSAFE,) and not rep.safe


def test_dfa_decomposition_examples():
    d = dfa_decomposition(build_lowercase(), "ab")
    assert d.quotient_strings(4) == {t(x) for x in ("AB", "Ab", "aB", "ab")}
    assert d.remainder_strings(4) == set()
    d = dfa_decomposition(build_newspeak(), "ba")
    assert d.quotient_strings(5) == {t("baa"), t("bab")}
    assert d.remainder_strings(5) == {t("ba")}
    d = dfa_decomposition(build_lowercase(), "")
    assert d.quotient_strings(3) == {()}
    d = dfa_decomposition(build_newspeak(), "g")
    assert d.quotient_strings(4) == set() and d.remainder_strings(4) == set()


def test_quotient_states_have_no_arcs():
    d = dfa_decomposition(build_newspeak(), "ba")
    assert not any(s in d.q_accepting for s, *_ in d.arcs)


def test_is_universal_state_examples():
    loop = Fst(1, [0], [0], [(0, "a", "a", 0), (0, "b", "b", 0)], ("a", "b"), ("a", "b"))
    assert is_universal_state(loop, 0)
    gap = Fst(1, [0], [0], [(0, "a", "a", 0)], ("a", "b"), ("a", "b"))
    assert not is_universal_state(gap, 0)
    p = precover_dfa(build_lowercase(), "ab")
    s = min(p.initial)
    for c in "ab":
        s = p.transitions(s, c)[0][1]
    assert is_universal_state(p, s)


def brute_universal(dfa, s):
    from xduce.fst import force_start
    g = force_start(dfa, s)
    return all(accepts(g, x) for x in strings_upto(dfa.in_alphabet, 2 * dfa.num_states))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 199), st.integers(0, 2))
def test_is_universal_state_matches_brute_force(i, k):
    f, _ = sweep()[i]
    y = targets(f.out_alphabet, 2)[k % len(targets(f.out_alphabet, 2))]
    p = precover_dfa(f, y)
    if p.num_states > 6:
        return
    for s in p.states:
        assert is_universal_state(p, s) == brute_universal(p, s)


def test_dfa_matches_string_decomposition_on_sweep():
    for f, _ in sweep()[:100]:
        dec = Decomposer(f)
        for y in targets(f.out_alphabet, 2):
            d = dec.decompose(y)
            dd = dfa_decomposition(f, y)
            assert dd.quotient_strings(5) == {x for x in d.quotient if len(x) <= 5}
            assert dd.remainder_strings(5) == {x for x in d.remainder if len(x) <= 5}


def test_safety_implies_termination():
    rng = random.Random(17)
    checked = 0
    while checked < 150:
        f = random_machine(rng)
        if f.num_states == 0 or not f.initial or not check_safety(f).safe:
            continue
        dec = Decomposer(f)
        for y in targets(f.out_alphabet, 3):
            dec.decompose(y)
        checked += 1


def total_prefix_monotone(f, n=5):
    images = {}
    for x in strings_upto(f.in_alphabet, n):
        y = apply(f, x)
        if y is None:
            return False
        images[x] = y
    return all(is_prefix(images[x[:k]], y) for x, y in images.items() for k in range(len(x)) if x[:k] in images)


def test_prefix_monotone_machines_have_empty_remainders():
    fixtures = [build_lowercase(), build_dna2aa(), build_token_to_byte([("p", "ab"), ("q", "b")])]
    fixtures += [f for f, _ in sweep() if total_prefix_monotone(f)][:40]
    assert len(fixtures) > 10
    for f in fixtures:
        dec = Decomposer(f)
        for y in targets(f.out_alphabet, 2 if len(f.out_alphabet) > 4 else 3):
            assert dec.decompose(y).remainder == ()


def test_strict_prefix_monotone():
    assert is_strict_prefix_monotone(build_lowercase())
    assert is_strict_prefix_monotone(build_token_to_byte([("p", "ab"), ("q", "b")]))
    assert not is_strict_prefix_monotone(build_dna2aa(), 3)
    assert not is_strict_prefix_monotone(build_newspeak())


def test_quotient_bound_report():
    res = quotient_bound_check(build_lowercase(), 2)
    assert res["ok"] and res["max_quotient"] == 2 ** 2
    assert quotient_bound_check(build_token_to_byte([("p", "ab"), ("q", "b")]), 3)["ok"]
