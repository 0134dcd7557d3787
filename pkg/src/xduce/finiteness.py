"""Finiteness checks and the state-based decomposition.

``check_safety`` tests a sufficient condition for every target prefix to have
a finite quotient and remainder. ``dfa_decomposition`` builds the determinized
precover machine eagerly and reads the quotient and remainder off it as two
automata; it always terminates, even when the string sets are infinite.
"""

from collections import deque
from dataclasses import dataclass, field
from itertools import product

from .fst import (EPS, Fst, apply, as_string, build_prefix_acceptor, compose, compute_ip_universal,
                  coreachable_states, determinize_acceptor, find_eps_output_cycle, input_project,
                  is_prefix, reachable_states, remove_epsilon, trim)

IP_UNIVERSAL = "ip_universal"
FINITE_CLOSURE = "finite_closure"
SAFE_BY_SUCCESSORS = "safe_by_successors"
UNSAFE = "unsafe"


def _sccs(nodes, succ):
    """Strongly connected components (iterative Tarjan)."""
    index, low, comp = {}, {}, {}
    stack, on = [], set()
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            w = next(it, None)
            if w is not None:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(succ(w))))
                elif w in on:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on.discard(w)
                    comp[w] = v
                    if w == v:
                        break
    return comp


def has_finite_closure(f, s):
    """Whether the machine started at ``s`` relates finitely many pairs: no
    cycle through a non-silent arc on any accepting path."""
    keep = reachable_states(f, [s]) & coreachable_states(f)
    if not keep:
        return True
    arcs = [(p, a, b, q) for p, a, b, q in f.arcs if p in keep and q in keep]
    succ = {p: [] for p in keep}
    for p, _, _, q in arcs:
        succ[p].append(q)
    comp = _sccs(sorted(keep), succ.__getitem__)
    return not any(comp[p] == comp[q] and (a != EPS or b != EPS) for p, a, b, q in arcs)


@dataclass
class SafetyReport:
    classes: tuple
    safe: bool
    eps_output_cycle: list | None
    universal: frozenset = field(default_factory=frozenset)

    @property
    def verdict(self):
        return "finite decomposition guaranteed" if self.safe else "not guaranteed finite"

    def to_dict(self):
        counts = {c: self.classes.count(c) for c in (IP_UNIVERSAL, FINITE_CLOSURE, SAFE_BY_SUCCESSORS, UNSAFE)}
        return {
            "verdict": self.verdict,
            "safe": self.safe,
            "states": len(self.classes),
            "classes": list(self.classes),
            "counts": counts,
            "eps_output_cycle": None if self.eps_output_cycle is None
            else [list(arc) for arc in self.eps_output_cycle],
        }


def check_safety(f, universal=None):
    """Classify states as universal, finite-closure, safe because all their
    successors are safe (least fixpoint), or unsafe; and look for a cycle of
    epsilon-output arcs."""
    universal = compute_ip_universal(f) if universal is None else frozenset(universal)
    finite = {s for s in f.states if s not in universal and has_finite_closure(f, s)}
    safe = set(universal) | finite
    changed = True
    while changed:
        changed = False
        for s in f.states:
            if s not in safe and all(d in safe for _, _, d in f.out_arcs(s)):
                safe.add(s)
                changed = True
    classes = []
    for s in f.states:
        if s in universal:
            classes.append(IP_UNIVERSAL)
        elif s in finite:
            classes.append(FINITE_CLOSURE)
        elif s in safe:
            classes.append(SAFE_BY_SUCCESSORS)
        else:
            classes.append(UNSAFE)
    cycle = find_eps_output_cycle(f)
    return SafetyReport(tuple(classes), len(safe) == f.num_states and cycle is None, cycle, universal)


# ---------------------------------------------------------------------------
# state-based decomposition

def precover_dfa(f, y):
    """Trimmed deterministic acceptor for the precover of ``y``."""
    y = as_string(y)
    g = compose(f, build_prefix_acceptor(y, f.out_alphabet))
    return trim(determinize_acceptor(remove_epsilon(input_project(g))))


def is_universal_state(dfa, s):
    """Whether the deterministic acceptor started at ``s`` accepts everything."""
    seen = {s}
    queue = deque([s])
    while queue:
        t = queue.popleft()
        if t not in dfa.accepting:
            return False
        for a in dfa.in_alphabet:
            arcs = dfa.transitions(t, a)
            if not arcs:
                return False
            for _, d in arcs:
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
    return True


@dataclass
class DfaDecomposition:
    num_states: int
    start: int | None
    arcs: tuple
    q_accepting: frozenset
    r_accepting: frozenset
    alphabet: tuple

    def _machine(self, accepting):
        initial = [] if self.start is None else [self.start]
        return Fst(self.num_states, initial, accepting, self.arcs, self.alphabet, self.alphabet)

    def quotient_machine(self):
        return self._machine(self.q_accepting)

    def remainder_machine(self):
        return self._machine(self.r_accepting)

    def quotient_strings(self, max_len):
        return language(self.quotient_machine(), max_len)

    def remainder_strings(self, max_len):
        return language(self.remainder_machine(), max_len)


def dfa_decomposition(f, y):
    p = precover_dfa(f, y)
    if not p.initial:
        return DfaDecomposition(0, None, (), frozenset(), frozenset(), f.in_alphabet)
    start = min(p.initial)
    seen = {start}
    queue = deque([start])
    arcs, q_acc, r_acc = [], set(), set()
    while queue:
        s = queue.popleft()
        if s in p.accepting:
            if is_universal_state(p, s):
                q_acc.add(s)
                continue
            r_acc.add(s)
        for a in p.in_alphabet:
            for _, d in p.transitions(s, a):
                arcs.append((s, a, a, d))
                if d not in seen:
                    seen.add(d)
                    queue.append(d)
    return DfaDecomposition(p.num_states, start, tuple(arcs), frozenset(q_acc), frozenset(r_acc), f.in_alphabet)


def language(acceptor, max_len):
    """All strings of length at most ``max_len`` accepted by a deterministic
    epsilon-free acceptor."""
    found = set()
    layer = {((), s) for s in acceptor.initial}
    for k in range(max_len + 1):
        nxt = set()
        for x, s in layer:
            if s in acceptor.accepting:
                found.add(x)
            if k < max_len:
                for a, _, d in acceptor.out_arcs(s):
                    if a != EPS:
                        nxt.add((x + (a,), d))
        layer = nxt
    return found


# ---------------------------------------------------------------------------
# quotient size bound for strict-prefix monotone machines

def strings_upto(alphabet, max_len):
    for k in range(max_len + 1):
        yield from product(alphabet, repeat=k)


def is_strict_prefix_monotone(f, max_len=5):
    """Enumerative check (not a proof): on the domain, every proper extension
    of a source string maps to a proper extension of its image."""
    images = {}
    for x in strings_upto(f.in_alphabet, max_len):
        y = apply(f, x)
        if y is None:
            continue
        images[x] = y
        for k in range(len(x)):
            p = images.get(x[:k])
            if p is not None and not (len(p) < len(y) and is_prefix(p, y)):
                return False
    return True


def quotient_bound_check(f, y_len_max=3, mono_len=5):
    """Check the quotient size bound and the one-symbol growth relations for
    every target prefix up to ``y_len_max``, using the enumeration oracle."""
    from .oracle import oracle_decompose, image_table

    monotone = is_strict_prefix_monotone(f, mono_len)
    length = y_len_max + 1
    images = image_table(f, length)
    nx = len(f.in_alphabet)
    quotients, preimages = {}, {}
    for y in strings_upto(f.out_alphabet, y_len_max):
        res = oracle_decompose(f, y, length, images=images)
        quotients[y] = res.quotient
        preimages[y] = res.preimage
    failures = []
    for y, q in quotients.items():
        if len(q) > (nx + 1) ** len(y):
            failures.append({"y": list(y), "check": "size", "size": len(q)})
        if len(y) == y_len_max:
            continue
        children = set()
        for b in f.out_alphabet:
            children |= quotients[y + (b,)]
        grown = {x for x in q} | {x + (a,) for x in q for a in f.in_alphabet}
        if not children <= grown:
            failures.append({"y": list(y), "check": "growth"})
        if preimages[y] != q - children:
            failures.append({"y": list(y), "check": "preimage"})
    return {
        "strict_prefix_monotone": monotone,
        "targets": len(quotients),
        "max_quotient": max(len(q) for q in quotients.values()),
        "failures": failures,
        "ok": monotone and not failures,
    }
