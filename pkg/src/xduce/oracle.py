"""Brute-force ground truth for small machines.

Source strings are enumerated up to a length bound and mapped with ``apply``.
Cylinder membership is decided on an eagerly built deterministic precover
acceptor, so nothing here shares code with the lazy frontier search.
"""

import math
from dataclasses import dataclass

from .finiteness import is_universal_state, precover_dfa, strings_upto
from .fst import apply, as_string, is_prefix
from .lm import EOS


def enumerate_strings(alphabet, max_len):
    return list(strings_upto(tuple(alphabet), max_len))


def image_table(f, max_len):
    """``{x: f(x)}`` for every domain string of length at most ``max_len``."""
    table = {}
    for x in strings_upto(f.in_alphabet, max_len):
        y = apply(f, x)
        if y is not None:
            table[x] = y
    return table


@dataclass(frozen=True)
class OracleResult:
    precover: frozenset
    quotient: frozenset
    remainder: frozenset
    preimage: frozenset


def _dfa_state(dfa, x):
    if not dfa.initial:
        return None
    s = min(dfa.initial)
    for a in x:
        arcs = dfa.transitions(s, a)
        if not arcs:
            return None
        s = arcs[0][1]
    return s


def oracle_decompose(f, y, max_len, images=None, check_extensions=True):
    """Quotient, remainder, precover and preimage of ``y`` restricted to source
    strings of length at most ``max_len``."""
    y = as_string(y)
    images = image_table(f, max_len) if images is None else images
    dfa = precover_dfa(f, y)
    universal = {}

    def in_cylinder(x):
        s = _dfa_state(dfa, x)
        if s is None:
            return False
        if s not in universal:
            universal[s] = is_universal_state(dfa, s)
        return universal[s]

    members = {x for x, out in images.items() if len(x) <= max_len and is_prefix(y, out)}
    cyl = {x for x in members if in_cylinder(x)}
    quotient = {x for x in cyl if not any(x[:k] in cyl for k in range(len(x)))}
    if check_extensions:
        # cheap independent confirmation: short extensions stay in the precover
        for x in quotient:
            for z in strings_upto(f.in_alphabet, min(2, max_len - len(x))):
                assert x + z in members, (x, z)
    preimage = {x for x in members if images[x] == y}
    return OracleResult(frozenset(members), frozenset(quotient), frozenset(members - cyl), frozenset(preimage))


def _support_images(f, lm):
    return [(p, apply(f, x)) for x, p in lm.probs.items() if p > 0.0]


def oracle_prefix_prob(f, lm, y):
    """Sum of support probabilities whose image starts with ``y``."""
    y = as_string(y)
    return math.fsum(p for p, out in _support_images(f, lm) if out is not None and is_prefix(y, out))


def oracle_prob(f, lm, y):
    y = as_string(y)
    return math.fsum(p for p, out in _support_images(f, lm) if out == y)


def oracle_next_dist(f, lm, y):
    """Exact next-symbol distribution of the pushforward, or None when ``y``
    has no mass."""
    y = as_string(y)
    n = len(y)
    z = oracle_prefix_prob(f, lm, y)
    if z <= 0.0:
        return None
    acc = {}
    for p, out in _support_images(f, lm):
        if out is None or not is_prefix(y, out):
            continue
        key = EOS if len(out) == n else out[n]
        acc.setdefault(key, []).append(p)
    return {k: math.fsum(v) / z for k, v in acc.items()}
