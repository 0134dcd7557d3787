import io
import math
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xduce.lm import (EOS, CachedLm, FiniteSupportLm, GeometricUniformLm, batched_next_dist, load_lm,
                      prefix_prob_src, string_prob_src)


def test_finite_support_conditionals():
    lm = FiniteSupportLm([("ab", 0.5), ("a", 0.25), ("b", 0.25)])
    assert lm.next_dist(()) == {EOS: 0.0, "a": 0.75, "b": 0.25}
    d = lm.next_dist(("a",))
    assert math.isclose(d[EOS], 1 / 3) and math.isclose(d["b"], 2 / 3)
    assert lm.next_dist(("b", "b")) == {EOS: 1.0}


def test_finite_support_validation():
    with pytest.raises(ValueError):
        FiniteSupportLm([("a", 0.5)])
    with pytest.raises(ValueError):
        FiniteSupportLm([("a", 0.5), ("a", 0.5)])


def test_geometric_closed_form():
    lm = GeometricUniformLm(0.5, "ABab")
    assert prefix_prob_src(lm, "Ab") == 0.125 ** 2
    assert string_prob_src(lm, "Ab") == 0.125 ** 2 * 0.5
    with pytest.raises(ValueError):
        GeometricUniformLm(0.0, "a")


def test_cached_lm_counts_and_matches():
    base = GeometricUniformLm(0.25, "xy")
    lm = CachedLm(base)
    assert lm.prefix_prob("xyx") == prefix_prob_src(base, "xyx")
    calls = lm.calls
    lm.prefix_prob("xyx")
    lm.string_prob("xyx")
    assert lm.calls == calls + 1
    assert lm.string_prob("xyx") == string_prob_src(base, "xyx")


def test_cached_lm_lru_bound():
    lm = CachedLm(GeometricUniformLm(0.5, "ab"), max_entries=2)
    for p in ["", "a", "b", "ab"]:
        lm.next_dist(tuple(p))
    assert len(lm._memo) == 2


def test_batched_and_prefetch():
    lm = CachedLm(FiniteSupportLm([("ab", 0.5), ("ba", 0.5)]))
    assert batched_next_dist(lm, ["", "a"]) == [lm.next_dist(()), lm.next_dist(("a",))]
    assert lm.prefetch([("a", "b"), ("b",), ("c",)]) == [0.5, 0.5, 0.0]


def test_cached_lm_threads():
    lm = CachedLm(GeometricUniformLm(0.5, "ab"))
    out = []

    def work():
        out.append(lm.prefix_prob("abab"))

    ts = [threading.Thread(target=work) for _ in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert set(out) == {0.25 ** 4}


def test_load_lm_formats():
    lm = load_lm({"type": "finite", "entries": [["ab", 1.0]]})
    assert lm.probs == {("a", "b"): 1.0}
    lm = load_lm(io.StringIO('{"type": "geometric", "stop": 0.5, "alphabet": ["a"]}'))
    assert lm.next_dist(()) == {EOS: 0.5, "a": 0.5}
    with pytest.raises(ValueError):
        load_lm({"type": "neural"})


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.text("ab", max_size=4), st.floats(0.01, 1.0), min_size=1, max_size=8))
def test_support_probabilities_recovered(weights):
    z = sum(weights.values())
    items = sorted(weights.items())
    probs = [w / z for _, w in items]
    probs[-1] = 1.0 - sum(probs[:-1])
    lm = FiniteSupportLm([(x, p) for (x, _), p in zip(items, probs)])
    cached = CachedLm(lm)
    for (x, _), p in zip(items, probs):
        assert math.isclose(cached.string_prob(x), p, rel_tol=1e-9, abs_tol=1e-12)
    assert math.isclose(math.fsum(lm.next_dist(()).values()), 1.0)
