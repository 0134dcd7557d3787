import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from support import random_machine, sweep
from xduce import build_dna2aa, build_identity, build_lowercase, build_newspeak, build_safety_showcase
from xduce.fst import (EPS, AmbiguityError, Fst, FstError, accepts, apply, as_string, build_prefix_acceptor,
                       compose, compute_ip_universal, determinize_acceptor, dumps, find_eps_output_cycle,
                       force_start, has_eps_output_cycle, input_project, is_prefix, lcp, load_fst_text,
                       push_output_labels, remove_epsilon, save_fst_text, trim)
from xduce.finiteness import strings_upto

LOWERCASE_TEXT = """\
# lowercase two letters
arc 0 A a 0
arc 0 B b 0
arc 0 a a 0
arc 0 b b 0
initial 0
accept 0
"""

SHOWCASE_TEXT = """\
alphabet_in a b
alphabet_out a b d
states 4
initial 0
accept 1 2 3
arc 0 a a 1
arc 0 b b 2
arc 1 a a 3
arc 1 b d 2
arc 3 a <eps> 3
arc 3 b <eps> 3
"""


def s(x):
    return as_string(x)


def test_load_lowercase_text():
    f = load_fst_text(LOWERCASE_TEXT)
    assert f.num_states == 1 and len(f.arcs) == 4
    assert apply(f, "aB") == s("ab")


def test_load_showcase_text():
    f = load_fst_text(io.StringIO(SHOWCASE_TEXT))
    assert f.num_states == 4 and len(f.arcs) == 6
    assert f.same_as(build_safety_showcase())


def test_empty_arc_section_accepts_only_empty_string():
    f = load_fst_text("states 1\ninitial 0\naccept 0\n")
    assert f.arcs == () and f.accepting == {0}
    assert apply(f, "") == ()


@pytest.mark.parametrize("text, msg", [
    ("states 2\narc 0 a a 5\n", "line 2"),
    ("states 2\nstates 2\n", "duplicate state declaration"),
    ("initial 0 0\n", "duplicate state declaration"),
    ("bogus 1\n", "unknown directive"),
    ("arc 0 a\n", "line 1"),
    ("arc 0 a a 3\nstates 2\n", "dangling"),
])
def test_parse_errors(text, msg):
    with pytest.raises(FstError, match=msg):
        load_fst_text(text)


def test_roundtrip_with_escapes():
    f = Fst(2, [0], [1], [(0, "a b", "\n", 1), (1, "#", EPS, 1)])
    buf = io.StringIO()
    save_fst_text(f, buf)
    g = load_fst_text(buf.getvalue())
    assert g.same_as(f)
    assert dumps(g) == dumps(f)


def test_apply_examples():
    assert "".join(apply(build_dna2aa(), "TGTTACATACAAAATTGTCCTCTAGGT")) == "CYIQNCPLG"
    assert apply(build_lowercase(), "Ab") == s("ab")
    assert apply(build_identity("xy"), "xyyx") == s("xyyx")
    assert apply(build_newspeak(), "bad") == s("ungood")


def test_apply_outside_domain():
    f = Fst(1, [0], [0], [(0, "a", "a", 0)], ("a", "b"), ("a",))
    assert apply(f, "ab") is None


def test_apply_detects_ambiguity():
    f = Fst(2, [0], [1], [(0, "a", "x", 1), (0, "a", "y", 1)], ("a",), ("x", "y"))
    with pytest.raises(AmbiguityError):
        apply(f, "a")


def test_prefix_helpers():
    assert is_prefix(s("ab"), s("abc")) and not is_prefix(s("b"), s("abc"))
    assert lcp([s("abc"), s("abd")]) == s("ab")
    acc = build_prefix_acceptor("ab", "abc")
    assert accepts(acc, "abca") and not accepts(acc, "ba") and not accepts(acc, "a")


def test_compose_lowercase_then_identity():
    f = build_lowercase()
    g = compose(f, build_identity(f.out_alphabet))
    for x in strings_upto(f.in_alphabet, 3):
        assert apply(g, x) == apply(f, x)


def test_compose_rejects_mismatch():
    with pytest.raises(FstError):
        compose(build_lowercase(), build_identity("xy"))


def test_compose_with_epsilons_is_functional():
    f = Fst(2, [0], [0], [(0, "a", EPS, 1), (1, EPS, "x", 0)], ("a",), ("x",))
    g = Fst(2, [0], [0], [(0, "x", EPS, 1), (1, EPS, "y", 0)], ("x",), ("y",))
    h = compose(f, g)
    for n in range(4):
        assert apply(h, "a" * n) == ("y",) * n


def test_determinize_and_remove_epsilon():
    a = Fst(3, [0], [2], [(0, EPS, EPS, 1), (1, "a", "a", 2), (0, "a", "a", 2), (2, "b", "b", 0)],
            ("a", "b"), ("a", "b"))
    d = determinize_acceptor(remove_epsilon(a))
    for x in strings_upto("ab", 5):
        assert accepts(d, x) == accepts(a, x)
    assert all(len(d.transitions(q, c)) <= 1 for q in d.states for c in "ab")


def test_ip_universal_examples():
    assert compute_ip_universal(build_lowercase()) == {0}
    assert len(compute_ip_universal(build_dna2aa())) == 21
    assert compute_ip_universal(build_safety_showcase()) == {3}


def test_eps_output_cycle():
    f = Fst(1, [0], [0], [(0, "x", EPS, 0)], ("x",), ("y",))
    found, cycle = has_eps_output_cycle(f)
    assert found and cycle == [(0, "x", EPS, 0)]
    assert find_eps_output_cycle(build_dna2aa()) is None


def test_trim_and_force_start():
    f = Fst(3, [0], [1], [(0, "a", "a", 1), (0, "b", "b", 2)], ("a", "b"), ("a", "b"))
    t = trim(f)
    assert t.num_states == 2 and len(t.arcs) == 1
    g = force_start(build_safety_showcase(), 3)
    assert apply(g, "abab") == ()


def test_input_project():
    p = input_project(build_lowercase())
    assert p.is_acceptor() and accepts(p, "AbB")


def _same_function(f, g, length=5):
    return all(apply(f, x) == apply(g, x) for x in strings_upto(f.in_alphabet, length))


def test_push_output_labels_on_newspeak():
    f = build_newspeak()
    g = push_output_labels(f)
    assert _same_function(f, g)
    assert push_output_labels(g).same_as(g)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_push_output_labels_preserves_function_and_is_idempotent(seed):
    f = random_machine(random.Random(seed))
    if f.num_states == 0:
        return
    g = push_output_labels(f)
    assert _same_function(f, g, 4)
    assert push_output_labels(g).same_as(g)


def test_sweep_machines_are_functional():
    for f, _ in sweep()[:50]:
        for x in strings_upto(f.in_alphabet, 4):
            apply(f, x)
