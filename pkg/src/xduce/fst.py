"""Finite-state transducers and the automata operations built on them.

Symbols are plain string labels. The empty string is written ``EPS``
("<eps>") and may appear on either side of an arc. Strings over an alphabet
are tuples of labels; ``as_string`` converts user input (a str of one-char
labels, or any iterable of labels) into that form.
"""

import os
import warnings
from collections import defaultdict, deque

EPS = "<eps>"


def as_string(x):
    if x is None:
        return None
    if isinstance(x, str):
        return tuple(x)
    return tuple(x)


def show(x):
    """Render a string of labels for humans: concatenated when every label is
    a single character, space-separated otherwise."""
    if x is None:
        return "<none>"
    if all(len(a) == 1 for a in x):
        return "".join(x)
    return " ".join(x)


def is_prefix(a, b):
    return len(a) <= len(b) and b[: len(a)] == a


def lcp(strings):
    return tuple(os.path.commonprefix(list(strings)))


class FstError(ValueError):
    pass


class AmbiguityError(FstError):
    """Two accepting paths for one input emitted different outputs."""


class Fst:
    """Immutable transducer over states ``0 .. num_states-1``.

    ``arcs`` is a sequence of ``(src, in, out, dst)``; either label may be EPS.
    """

    def __init__(self, num_states, initial, accepting, arcs, in_alphabet=None, out_alphabet=None):
        arcs = tuple((int(s), a, b, int(d)) for s, a, b, d in arcs)
        self.num_states = int(num_states)
        self.initial = frozenset(initial)
        self.accepting = frozenset(accepting)
        self.arcs = arcs
        if in_alphabet is None:
            in_alphabet = sorted({a for _, a, _, _ in arcs if a != EPS})
        if out_alphabet is None:
            out_alphabet = sorted({b for _, _, b, _ in arcs if b != EPS})
        self.in_alphabet = tuple(in_alphabet)
        self.out_alphabet = tuple(out_alphabet)
        if EPS in self.in_alphabet or EPS in self.out_alphabet:
            raise FstError("epsilon cannot be an alphabet symbol")
        if len(set(self.in_alphabet)) != len(self.in_alphabet):
            raise FstError("duplicate input symbol")
        if len(set(self.out_alphabet)) != len(self.out_alphabet):
            raise FstError("duplicate output symbol")
        ins, outs = set(self.in_alphabet), set(self.out_alphabet)
        for s in self.initial | self.accepting:
            if not 0 <= s < self.num_states:
                raise FstError(f"state {s} out of range")
        index = defaultdict(list)
        out_arcs = [[] for _ in range(self.num_states)]
        for s, a, b, d in arcs:
            if not (0 <= s < self.num_states and 0 <= d < self.num_states):
                raise FstError(f"arc {s} {a} {b} {d}: state out of range")
            if a != EPS and a not in ins:
                raise FstError(f"input symbol {a!r} not in alphabet")
            if b != EPS and b not in outs:
                raise FstError(f"output symbol {b!r} not in alphabet")
            index[s, a].append((b, d))
            out_arcs[s].append((a, b, d))
        self._index = {k: tuple(v) for k, v in index.items()}
        self._out = tuple(tuple(v) for v in out_arcs)
        self._hash = None

    def __repr__(self):
        return f"Fst({self.num_states} states, {len(self.arcs)} arcs)"

    @property
    def states(self):
        return range(self.num_states)

    def out_arcs(self, s):
        """All arcs leaving ``s`` as ``(in, out, dst)``."""
        return self._out[s]

    def transitions(self, s, a):
        """Arcs leaving ``s`` that scan ``a`` (possibly EPS), as ``(out, dst)``."""
        return self._index.get((s, a), ())

    def is_acceptor(self):
        return all(a == b for _, a, b, _ in self.arcs)

    def same_as(self, other):
        """Structural equality: same states, sets and arc list."""
        return (self.num_states == other.num_states and self.initial == other.initial
                and self.accepting == other.accepting and self.arcs == other.arcs
                and self.in_alphabet == other.in_alphabet and self.out_alphabet == other.out_alphabet)


# ---------------------------------------------------------------------------
# text format

def _escape(label):
    if label == EPS:
        return label
    out = []
    for ch in label:
        if ch.isspace() or ch in "#\\" or not ch.isprintable():
            out.append("\\x%02x" % ord(ch) if ord(ch) < 256 else "\\u%04x" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def _unescape(token):
    if "\\" not in token:
        return token
    return token.encode("latin-1", "backslashreplace").decode("unicode_escape")


def dumps(f):
    lines = [
        "alphabet_in " + " ".join(_escape(a) for a in f.in_alphabet),
        "alphabet_out " + " ".join(_escape(b) for b in f.out_alphabet),
        f"states {f.num_states}",
        "initial " + " ".join(str(s) for s in sorted(f.initial)),
        "accept " + " ".join(str(s) for s in sorted(f.accepting)),
    ]
    for s, a, b, d in f.arcs:
        lines.append(f"arc {s} {_escape(a)} {_escape(b)} {d}")
    return "\n".join(lines) + "\n"


def save_fst_text(f, stream):
    stream.write(dumps(f))


def load_fst_text(source):
    """Parse the line-oriented arc-list format from a text stream or string."""
    text = source if isinstance(source, str) else source.read()
    alph_in = alph_out = None
    declared = None
    initial, accepting, arcs = [], [], []
    seen_initial, seen_accept = set(), set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()

        def fail(msg):
            raise FstError(f"line {lineno}: {msg}")

        def state(tok):
            try:
                v = int(tok)
            except ValueError:
                fail(f"bad state id {tok!r}")
            if v < 0:
                fail(f"bad state id {tok!r}")
            if declared is not None and v >= declared:
                fail(f"dangling state reference {v} (states {declared})")
            return v

        if head == "alphabet_in":
            if alph_in is not None:
                fail("duplicate alphabet_in")
            alph_in = [_unescape(t) for t in rest]
        elif head == "alphabet_out":
            if alph_out is not None:
                fail("duplicate alphabet_out")
            alph_out = [_unescape(t) for t in rest]
        elif head == "states":
            if declared is not None:
                fail("duplicate state declaration")
            if len(rest) != 1 or not rest[0].isdigit():
                fail("states takes one count")
            declared = int(rest[0])
            if any(s >= declared for s in initial + accepting) or any(
                    max(s, d) >= declared for s, _, _, d in arcs):
                fail("dangling state reference")
        elif head in ("initial", "accept"):
            target, seen = (initial, seen_initial) if head == "initial" else (accepting, seen_accept)
            for tok in rest:
                s = state(tok)
                if s in seen:
                    fail(f"duplicate state declaration {s} in {head}")
                seen.add(s)
                target.append(s)
        elif head == "arc":
            if len(rest) != 4:
                fail("arc needs: src in out dst")
            s, a, b, d = rest
            arcs.append((state(s), _unescape(a), _unescape(b), state(d)))
        else:
            fail(f"unknown directive {head!r}")
    if declared is None:
        ids = initial + accepting + [s for s, _, _, _ in arcs] + [d for *_, d in arcs]
        declared = max(ids) + 1 if ids else 0
    try:
        return Fst(declared, initial, accepting, arcs, alph_in, alph_out)
    except FstError as e:
        raise FstError(f"invalid machine: {e}") from None


# ---------------------------------------------------------------------------
# evaluation

def _eps_closure(f, items, limit):
    """Close a set of (state, output) pairs under epsilon-input arcs."""
    seen = set(items)
    queue = deque((it, 0) for it in items)
    while queue:
        (s, o), depth = queue.popleft()
        for b, d in f.transitions(s, EPS):
            nxt = (d, o if b == EPS else o + (b,))
            if nxt not in seen:
                if depth + 1 > limit:
                    raise FstError("epsilon-input cycle emitting output; cannot evaluate")
                seen.add(nxt)
                queue.append((nxt, depth + 1))
    return seen


def apply(f, x):
    """Output of ``f`` on ``x``, or None when ``x`` is outside the domain."""
    x = as_string(x)
    limit = f.num_states * (len(x) + 2) + 1
    cur = _eps_closure(f, {(i, ()) for i in f.initial}, limit)
    for a in x:
        nxt = set()
        for s, o in cur:
            for b, d in f.transitions(s, a):
                nxt.add((d, o if b == EPS else o + (b,)))
        if not nxt:
            return None
        cur = _eps_closure(f, nxt, limit)
    outs = {o for s, o in cur if s in f.accepting}
    if not outs:
        return None
    if len(outs) > 1:
        raise AmbiguityError(f"input {show(x)!r} has outputs {sorted(show(o) for o in outs)}")
    return outs.pop()


def accepts(a, x):
    """Membership of ``x`` in the input language of ``a``."""
    x = as_string(x)
    cur = _closure_states(a, set(a.initial))
    for sym in x:
        cur = _closure_states(a, {d for s in cur for _, d in a.transitions(s, sym)})
        if not cur:
            return False
    return bool(cur & a.accepting)


def _closure_states(f, states):
    seen = set(states)
    stack = list(states)
    while stack:
        s = stack.pop()
        for _, d in f.transitions(s, EPS):
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return seen


# ---------------------------------------------------------------------------
# constructions

def build_prefix_acceptor(y, alphabet):
    """Copy machine for the cylinder y·Y*."""
    y = as_string(y)
    alphabet = tuple(alphabet)
    known = set(alphabet)
    for c in y:
        if c not in known:
            raise FstError(f"symbol {c!r} not in alphabet")
    n = len(y)
    arcs = [(i, c, c, i + 1) for i, c in enumerate(y)]
    arcs += [(n, c, c, n) for c in alphabet]
    return Fst(n + 1, [0], [n], arcs, alphabet, alphabet)


def compose(f, g):
    """Relational composition: first ``f``, then ``g``.

    Stalled moves are ordered (all of f's epsilon-output moves before g's
    epsilon-input moves between two matched moves), so no input/output pair
    gets duplicate paths.
    """
    if not set(f.out_alphabet) <= set(g.in_alphabet):
        raise FstError("alphabet mismatch in compose: the first machine emits symbols the second cannot read")
    ids = {}
    arcs = []
    queue = deque()

    def get(key):
        if key not in ids:
            ids[key] = len(ids)
            queue.append(key)
        return ids[key]

    for i in sorted(f.initial):
        for j in sorted(g.initial):
            get((i, j, 0))
    while queue:
        p, q, flag = key = queue.popleft()
        src = ids[key]
        for a, b, p2 in f.out_arcs(p):
            if b == EPS:
                if flag == 0:
                    arcs.append((src, a, EPS, get((p2, q, 0))))
            else:
                for c, q2 in g.transitions(q, b):
                    arcs.append((src, a, c, get((p2, q2, 0))))
        for c, q2 in g.transitions(q, EPS):
            arcs.append((src, EPS, c, get((p, q2, 1))))
    accepting = [n for (p, q, _), n in ids.items() if p in f.accepting and q in g.accepting]
    initial = [n for (p, q, flag), n in ids.items() if p in f.initial and q in g.initial and flag == 0]
    return Fst(len(ids), initial, accepting, arcs, f.in_alphabet, g.out_alphabet)


def input_project(f):
    return Fst(f.num_states, f.initial, f.accepting,
               [(s, a, a, d) for s, a, _, d in f.arcs], f.in_alphabet, f.in_alphabet)


def reachable_states(f, start=None):
    start = f.initial if start is None else start
    seen = set(start)
    stack = list(start)
    while stack:
        s = stack.pop()
        for _, _, d in f.out_arcs(s):
            if d not in seen:
                seen.add(d)
                stack.append(d)
    return seen


def coreachable_states(f):
    back = defaultdict(set)
    for s, _, _, d in f.arcs:
        back[d].add(s)
    seen = set(f.accepting)
    stack = list(f.accepting)
    while stack:
        d = stack.pop()
        for s in back[d]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return seen


def subset(f, keep, initial=None):
    """Restrict ``f`` to the states in ``keep`` (renumbered in ascending order)."""
    keep = sorted(keep)
    new = {s: i for i, s in enumerate(keep)}
    initial = f.initial if initial is None else initial
    arcs = [(new[s], a, b, new[d]) for s, a, b, d in f.arcs if s in new and d in new]
    return Fst(len(keep), [new[s] for s in initial if s in new],
               [new[s] for s in f.accepting if s in new], arcs, f.in_alphabet, f.out_alphabet)


def trim(f):
    return subset(f, reachable_states(f) & coreachable_states(f))


def force_start(f, s):
    """The machine ``f`` started at state ``s``."""
    return Fst(f.num_states, [s], f.accepting, f.arcs, f.in_alphabet, f.out_alphabet)


def remove_epsilon(a):
    """Drop epsilon arcs from an acceptor, keeping the state set."""
    arcs = []
    accepting = set()
    for s in a.states:
        closure = sorted(_closure_states(a, {s}))
        seen = set()
        for t in closure:
            if t in a.accepting:
                accepting.add(s)
            for x, _, d in a.out_arcs(t):
                if x != EPS and (x, d) not in seen:
                    seen.add((x, d))
                    arcs.append((s, x, x, d))
    return Fst(a.num_states, a.initial, accepting, arcs, a.in_alphabet, a.in_alphabet)


def determinize_acceptor(a):
    """Subset construction; only reachable non-empty subsets are built."""
    start = tuple(sorted(_closure_states(a, set(a.initial))))
    ids = {start: 0}
    order = [start]
    arcs = []
    i = 0
    while i < len(order):
        cur = order[i]
        for x in a.in_alphabet:
            nxt = {d for s in cur for _, d in a.transitions(s, x)}
            if not nxt:
                continue
            key = tuple(sorted(_closure_states(a, nxt)))
            if key not in ids:
                ids[key] = len(order)
                order.append(key)
            arcs.append((i, x, x, ids[key]))
        i += 1
    accepting = [n for n, key in enumerate(order) if any(s in a.accepting for s in key)]
    return Fst(len(order), [0], accepting, arcs, a.in_alphabet, a.in_alphabet)


def compute_ip_universal(f):
    """States from which the input projection accepts every source string.

    Greatest fixpoint: start from the accepting states of the epsilon-free
    input projection and repeatedly discard states that lack a surviving
    successor on some symbol.
    """
    a = remove_epsilon(input_project(f))
    alive = set(a.accepting)
    count = defaultdict(int)
    rev = defaultdict(list)
    for s, x, _, d in a.arcs:
        rev[d].append((s, x))
        if s in alive and d in alive:
            count[s, x] += 1
    queue = deque()
    for s in sorted(alive):
        if any(count[s, x] == 0 for x in a.in_alphabet):
            queue.append(s)
    dropped = set(queue)
    alive -= dropped
    while queue:
        d = queue.popleft()
        for s, x in rev[d]:
            if s in alive:
                count[s, x] -= 1
                if count[s, x] == 0:
                    alive.discard(s)
                    queue.append(s)
    return frozenset(alive)


def find_eps_output_cycle(f):
    """A cycle whose arcs all emit epsilon, as a list of arcs, or None."""
    graph = defaultdict(list)
    for arc in f.arcs:
        if arc[2] == EPS:
            graph[arc[0]].append(arc)
    done = set()
    for root in f.states:
        if root in done:
            continue
        on_stack = {root: 0}
        path = []
        stack = [(root, iter(graph[root]))]
        while stack:
            s, it = stack[-1]
            arc = next(it, None)
            if arc is None:
                done.add(s)
                del on_stack[s]
                stack.pop()
                if path:
                    path.pop()
                continue
            d = arc[3]
            if d in on_stack:
                return path[on_stack[d]:] + [arc]
            if d not in done:
                on_stack[d] = len(stack)
                path.append(arc)
                stack.append((d, iter(graph[d])))
    return None


def has_eps_output_cycle(f):
    cycle = find_eps_output_cycle(f)
    return cycle is not None, cycle


def push_output_labels(f):
    """Move outputs toward the initial states so that they are emitted as soon
    as they are determined by the input read so far.

    The result is trimmed. Outputs longer than one symbol are spelled out on
    chains of epsilon-input arcs. A second application is a no-op.
    """
    g = trim(f)
    n = g.num_states
    if n == 0:
        return g
    # longest common prefix of all accepted continuations, per state
    val = [None] * n
    cap = 4 * (n + 1) * (len(g.arcs) + 1)
    for _ in range(cap):
        changed = False
        for s in range(n):
            cands = [()] if s in g.accepting else []
            cands += [(() if b == EPS else (b,)) + val[d] for _, b, d in g.out_arcs(s) if val[d] is not None]
            new = lcp(cands) if cands else None
            if new != val[s]:
                val[s] = new
                changed = True
        if not changed:
            break
    else:
        warnings.warn("output pushing did not converge; machine returned unchanged")
        return f
    incoming = defaultdict(list)
    for arc in g.arcs:
        incoming[arc[3]].append(arc)
    # an initial state with pending output and incoming arcs gets a fresh copy
    arcs = list(g.arcs)
    initial = set(g.initial)
    accepting = set(g.accepting)
    val = list(val)
    for i in sorted(g.initial):
        if val[i] and incoming[i]:
            j = len(val)
            val.append(val[i])
            initial.discard(i)
            initial.add(j)
            if i in accepting:
                accepting.add(j)
            arcs += [(j, a, b, d) for s, a, b, d in g.arcs if s == i]
    total = len(val)
    out = defaultdict(list)
    for arc in arcs:
        out[arc[0]].append(arc)

    def forced(s, seen=()):
        if s in accepting or len(out[s]) != 1 or s in seen:
            return ()
        _, a, b, d = out[s][0]
        if a != EPS:
            return ()
        return (() if b == EPS else (b,)) + forced(d, seen + (s,))

    exempt = {s for s in range(total) if s not in initial and val[s] and forced(s) == val[s]}

    def pending(s):
        return () if s in initial or s in exempt else val[s]

    changed = True
    while changed:
        changed = False
        for s, a, b, d in arcs:
            if d in exempt and not is_prefix(pending(s), (() if b == EPS else (b,)) + pending(d)):
                exempt.discard(d)
                changed = True
    new_arcs = []
    for s, a, b, d in arcs:
        full = (() if b == EPS else (b,)) + pending(d)
        rest = full[len(pending(s)):]
        if len(rest) <= 1:
            new_arcs.append((s, a, rest[0] if rest else EPS, d))
            continue
        src, sym = s, a
        for c in rest[:-1]:
            mid = total
            total += 1
            new_arcs.append((src, sym, c, mid))
            src, sym = mid, EPS
        new_arcs.append((src, EPS, rest[-1], d))
    if new_arcs == list(g.arcs) and total == n and initial == set(g.initial):
        return g
    return Fst(total, initial, accepting, new_arcs, g.in_alphabet, g.out_alphabet)
