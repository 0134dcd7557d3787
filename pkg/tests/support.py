"""Shared fixtures: random functional machines and random source models."""

import functools
import random

from xduce import FiniteSupportLm, Fst, check_safety
from xduce.fst import EPS, trim

SYMBOLS_IN = ("a", "b", "c")
SYMBOLS_OUT = ("x", "y", "z")


def random_machine(rng, max_base=4, max_states=6):
    """A functional machine: a random deterministic base whose states are then
    split into copies that share incoming arcs and lose some outgoing ones."""
    xs = SYMBOLS_IN[: rng.randint(1, 3)]
    ys = SYMBOLS_OUT[: rng.randint(1, 3)]
    n = rng.choice([1] + [k for k in range(2, max_base + 1) for _ in range(3)])

    def out():
        return EPS if rng.random() < 0.2 else rng.choice(ys)

    base = []
    accepting = set()
    for s in range(n):
        if rng.random() < 0.15:
            base.append((s, EPS, out(), rng.randrange(n)))
            continue
        if rng.random() < 0.6:
            accepting.add(s)
        for a in xs:
            if rng.random() < 0.8:
                base.append((s, a, out(), rng.randrange(n)))
    copies = {s: [s] for s in range(n)}
    total = n
    for s in range(n):
        if total < max_states and rng.random() < 0.4:
            copies[s].append(total)
            total += 1
    arcs = []
    for s, a, b, d in base:
        for sc in copies[s]:
            if sc != s and rng.random() < 0.3:
                continue
            for dc in copies[d]:
                arcs.append((sc, a, b, dc))
    acc = [c for s in accepting for c in copies[s]]
    return trim(Fst(total, [0], acc, arcs, xs, ys))


def random_finite_lm(rng, alphabet, max_strings=20, max_len=5):
    k = rng.randint(1, max_strings)
    support = set()
    for _ in range(k):
        support.add(tuple(rng.choice(alphabet) for _ in range(rng.randint(0, max_len))))
    return normalized_lm(sorted(support), [rng.random() + 0.05 for _ in support])


def normalized_lm(support, weights):
    z = sum(weights)
    probs = [w / z for w in weights]
    probs[-1] = 1.0 - sum(probs[:-1])
    return FiniteSupportLm(list(zip(support, probs)))


@functools.lru_cache(maxsize=None)
def sweep(count=200, seed=20261015):
    """``count`` (machine, model) pairs whose machines pass the safety check
    and have a nonempty domain."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        f = random_machine(rng)
        if f.num_states == 0 or not f.initial or not check_safety(f).safe:
            continue
        if f.num_states == 1 and rng.random() < 0.7:
            continue
        out.append((f, random_finite_lm(rng, f.in_alphabet)))
    return tuple(out)


def targets(alphabet, max_len=3):
    from itertools import product
    return [t for k in range(max_len + 1) for t in product(alphabet, repeat=k)]
