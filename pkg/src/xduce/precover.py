"""Lazy precover machinery.

A frontier is the set of ``(state, buffer)`` pairs reachable after reading a
source prefix, where ``buffer`` is the output emitted so far and is kept only
while it stays compatible with the target prefix ``y`` (one is a prefix of the
other). Frontiers are canonical sorted tuples, so they can be hashed and
memoized. Nothing is materialized ahead of time; the checks below walk the
implicit determinized precover machine on demand.
"""

from collections import defaultdict, deque

from .errors import NonTerminationError
from .fst import EPS, FstError, compute_ip_universal, coreachable_states


def compatible(b, y):
    n = min(len(b), len(y))
    return b[:n] == y[:n]


class Precover:
    """Frontier computations and decomposition checks for one transducer.

    Results are memoized per ``(y, x)``; a frontier for ``y`` is derived by
    filtering a cached frontier for a prefix of ``y`` whenever one exists.
    ``univ_filter`` enables the covering-universal-state shortcut in
    ``is_cylinder``.
    """

    def __init__(self, f, universal=None, univ_filter=True):
        self.f = f
        self.universal = compute_ip_universal(f) if universal is None else frozenset(universal)
        self.univ_filter = univ_filter
        self.coaccessible = frozenset(coreachable_states(f))
        self._inputs = frozenset(f.in_alphabet)
        self._out_rank = {b: i for i, b in enumerate(f.out_alphabet)}
        self._runs = {}
        self._cyl = {}
        self._live = {}
        self.stats = defaultdict(int)

    def clear(self):
        self._runs.clear()
        self._cyl.clear()
        self._live.clear()

    # -- frontier construction ----------------------------------------------

    def closure(self, items, y, truncate=False):
        """Add epsilon-input successors with compatible buffers.

        With ``truncate``, buffers are cut at ``len(y)``; otherwise a guard
        raises when an epsilon-input cycle keeps emitting output.
        """
        f = self.f
        n = len(y)
        seen = set(items)
        queue = deque((it, 0) for it in seen)
        limit = f.num_states * (n + 2)
        while queue:
            (s, b), depth = queue.popleft()
            for out, d in f.transitions(s, EPS):
                if out == EPS:
                    nb = b
                elif len(b) >= n:
                    nb = b if truncate else b + (out,)
                elif y[len(b)] == out:
                    nb = b + (out,)
                else:
                    continue
                el = (d, nb)
                if el in seen:
                    continue
                if depth >= limit and not truncate:
                    raise NonTerminationError(
                        "closure does not terminate: an epsilon-input cycle keeps emitting "
                        "output (run `xduce check` on the machine)")
                seen.add(el)
                queue.append((el, depth + 1))
        return tuple(sorted(seen))

    def step(self, frontier, a, y, truncate=False):
        f = self.f
        n = len(y)
        nxt = set()
        for s, b in frontier:
            for out, d in f.transitions(s, a):
                if out == EPS:
                    nxt.add((d, b))
                elif len(b) >= n:
                    nxt.add((d, b if truncate else b + (out,)))
                elif y[len(b)] == out:
                    nxt.add((d, b + (out,)))
        if not nxt:
            return ()
        return self.closure(nxt, y, truncate)

    def run(self, y, x):
        """Frontier after reading ``x`` with target ``y``."""
        y, x = tuple(y), tuple(x)
        key = (y, x)
        hit = self._runs.get(key)
        if hit is not None:
            return hit
        if y:
            # common cases in the searches: filter the frontier for y[:-1],
            # or take one step from the cached parent
            parent = self._runs.get((y[:-1], x))
            if parent is not None:
                self.stats["filtered"] += 1
                res = tuple(el for el in parent if compatible(el[1], y))
                self._runs[key] = res
                return res
        if x:
            parent = self._runs.get((y, x[:-1]))
            if parent is not None:
                a = x[-1]
                if a not in self._inputs:
                    raise FstError(f"symbol {a!r} is not in the source alphabet")
                res = self.step(parent, a, y) if parent else ()
                self.stats["steps"] += 1
                self._runs[key] = res
                return res
        for k in range(len(y) - 1, -1, -1):
            parent = self._runs.get((y[:k], x))
            if parent is not None:
                self.stats["filtered"] += 1
                res = tuple(el for el in parent if compatible(el[1], y))
                self._runs[key] = res
                return res
        # walk back to the longest cached source prefix, then step forward
        k = len(x)
        while k > 0 and (y, x[:k]) not in self._runs:
            k -= 1
        if k == 0 and (y, ()) not in self._runs:
            self._runs[y, ()] = self.closure(((i, ()) for i in self.f.initial), y)
        cur = self._runs[y, x[:k]]
        for i in range(k, len(x)):
            a = x[i]
            if a not in self._inputs:
                raise FstError(f"symbol {a!r} is not in the source alphabet")
            cur = self.step(cur, a, y) if cur else ()
            self.stats["steps"] += 1
            self._runs[y, x[: i + 1]] = cur
        return cur

    # -- checks ---------------------------------------------------------------

    def truncated(self, frontier, y):
        n = len(y)
        return tuple(sorted({(s, b[:n]) for s, b in frontier}))

    def is_cylinder(self, x, y):
        """Whether every extension of ``x`` maps into the precover of ``y``."""
        y = tuple(y)
        frontier = self.run(y, x)
        if not frontier:
            return False
        n = len(y)
        if self.univ_filter and any(len(b) >= n and s in self.universal for s, b in frontier):
            self.stats["univ_filter"] += 1
            return True
        return self._universal(self.truncated(frontier, y), y)

    def _universal(self, start, y):
        key = (y, start)
        known = self._cyl.get(key)
        if known is not None:
            return known
        f = self.f
        n = len(y)
        self.stats["powerset_bfs"] += 1
        visited = {start}
        queue = deque([start])
        verdict = True
        while queue and verdict:
            cur = queue.popleft()
            known = self._cyl.get((y, cur))
            if known is True:
                continue
            if known is False:
                verdict = False
                break
            if self.univ_filter and any(len(b) == n and s in self.universal for s, b in cur):
                continue
            if not any(len(b) == n and s in f.accepting for s, b in cur):
                verdict = False
                break
            for a in f.in_alphabet:
                nxt = self.step(cur, a, y, truncate=True)
                if not nxt:
                    verdict = False
                    break
                if nxt not in visited:
                    visited.add(nxt)
                    queue.append(nxt)
        if verdict:
            for v in visited:
                self._cyl[y, v] = True
        self._cyl[key] = verdict
        return verdict

    def is_member(self, x, y):
        n = len(y)
        acc = self.f.accepting
        return any(len(b) >= n and s in acc for s, b in self.run(y, x))

    def is_exact_member(self, x, y):
        y = tuple(y)
        acc = self.f.accepting
        return any(b == y and s in acc for s, b in self.run(y, x))

    def _live_table(self, y):
        table = self._live.get(y)
        if table is not None:
            return table
        n = len(y)
        live = {(t, n) for t in self.coaccessible}
        rev = defaultdict(list)
        for s, _, out, d in self.f.arcs:
            for k in range(n):
                if out == EPS:
                    rev[d, k].append((s, k))
                elif out == y[k]:
                    rev[d, k + 1].append((s, k))
        stack = list(live)
        while stack:
            node = stack.pop()
            for prev in rev.get(node, ()):
                if prev not in live:
                    live.add(prev)
                    stack.append(prev)
        table = frozenset(live)
        self._live[y] = table
        return table

    def is_live(self, x, y):
        """Whether some extension of ``x`` can still reach the precover of ``y``.

        Frontier elements are checked against the product of the machine with
        the remaining target, so dead branches do not count as live.
        """
        y = tuple(y)
        frontier = self.run(y, x)
        if not frontier:
            return False
        table = self._live_table(y)
        n = len(y)
        return any((s, min(len(b), n)) in table for s, b in frontier)

    def reachable_inputs(self, x, y):
        """Source symbols whose single-arc extension keeps a compatible buffer."""
        y = tuple(y)
        n = len(y)
        found = set()
        for s, b in self.run(y, x):
            k = len(b)
            for a, out, _ in self.f.out_arcs(s):
                if a != EPS and a not in found and (out == EPS or k >= n or y[k] == out):
                    found.add(a)
        return [a for a in self.f.in_alphabet if a in found]

    def reachable_outputs(self, x, y):
        """Candidate next target symbols: read from committed buffers, or from
        the arcs of boundary states whose buffer equals ``y``."""
        y = tuple(y)
        n = len(y)
        found = set()
        for s, b in self.run(y, x):
            if len(b) > n:
                found.add(b[n])
            elif len(b) == n:
                for _, out, _ in self.f.out_arcs(s):
                    if out != EPS:
                        found.add(out)
        return sorted(found, key=self._out_rank.__getitem__)

    def combined_universal(self, frontier, y, yhat):
        """Sufficient test that a quotient element of ``y`` is also one of
        ``y + (yhat,)``: every covering state is universal, boundary states can
        only continue with ``yhat``, and some committed state accepts."""
        n = len(y)
        committed = {s for s, b in frontier if len(b) > n and b[n] == yhat}
        boundary = {s for s, b in frontier if len(b) == n}
        if not committed and not boundary:
            return False
        if any(s not in self.universal for s in committed | boundary):
            return False
        for s in boundary:
            for a, out, _ in self.f.out_arcs(s):
                if a == EPS and out == EPS:
                    continue
                if out != yhat:
                    return False
        return bool(committed & self.f.accepting)


def run(f, y, x, cache=None):
    cache = Precover(f) if cache is None else cache
    return cache.run(tuple(y), tuple(x))
