"""Autoregressive source language models.

A model maps a prefix (tuple of symbols) to a next-symbol distribution: a dict
from symbols and ``EOS`` to probabilities. Symbols missing from the dict have
probability zero.
"""

import json
import threading
from collections import OrderedDict, defaultdict

from .fst import as_string


class _Eos:
    __slots__ = ()

    def __repr__(self):
        return "EOS"

    def __reduce__(self):
        return "EOS"


EOS = _Eos()


class SourceLm:
    """Base class. Subclasses implement ``next_dist``."""

    alphabet = ()

    def next_dist(self, prefix):
        raise NotImplementedError

    def batched_next_dist(self, prefixes):
        return [self.next_dist(tuple(p)) for p in prefixes]


class FiniteSupportLm(SourceLm):
    """A distribution over finitely many strings."""

    def __init__(self, entries):
        probs = {}
        for x, p in entries:
            x = as_string(x)
            if x in probs:
                raise ValueError(f"duplicate support string {x!r}")
            if p < 0:
                raise ValueError("negative probability")
            probs[x] = float(p)
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"support probabilities sum to {total}, not 1")
        self.probs = probs
        self.alphabet = tuple(sorted({a for x in probs for a in x}))
        mass = defaultdict(float)
        for x, p in probs.items():
            for k in range(len(x) + 1):
                mass[x[:k]] += p
        self._mass = dict(mass)

    def __repr__(self):
        return f"FiniteSupportLm({len(self.probs)} strings)"

    def next_dist(self, prefix):
        prefix = tuple(prefix)
        z = self._mass.get(prefix, 0.0)
        if z <= 0.0:
            return {EOS: 1.0}
        dist = {EOS: self.probs.get(prefix, 0.0) / z}
        for a in self.alphabet:
            m = self._mass.get(prefix + (a,), 0.0)
            if m > 0.0:
                dist[a] = m / z
        return dist


class GeometricUniformLm(SourceLm):
    """Stops with probability ``stop``; otherwise picks a symbol uniformly."""

    def __init__(self, stop, alphabet):
        if not 0.0 < stop <= 1.0:
            raise ValueError("stop probability must lie in (0, 1]")
        self.stop = float(stop)
        self.alphabet = tuple(alphabet)
        each = (1.0 - self.stop) / len(self.alphabet) if self.alphabet else 0.0
        self._dist = {EOS: self.stop}
        for a in self.alphabet:
            self._dist[a] = each

    def __repr__(self):
        return f"GeometricUniformLm(stop={self.stop}, |X|={len(self.alphabet)})"

    def next_dist(self, prefix):
        return dict(self._dist)


class CachedLm(SourceLm):
    """Memoizing wrapper that also keeps prefix probabilities.

    ``calls`` counts evaluations of the wrapped model. ``max_entries`` bounds
    the memo with least-recently-used eviction.
    """

    def __init__(self, lm, max_entries=None):
        self.lm = lm
        self.alphabet = getattr(lm, "alphabet", ())
        self.max_entries = max_entries
        self.calls = 0
        self._memo = OrderedDict()
        self._prefix = {(): 1.0}
        self._lock = threading.Lock()

    def __repr__(self):
        return f"CachedLm({self.lm!r})"

    def _store(self, prefix, dist):
        self._memo[prefix] = dist
        if self.max_entries is not None and len(self._memo) > self.max_entries:
            self._memo.popitem(last=False)

    def next_dist(self, prefix):
        prefix = tuple(prefix)
        with self._lock:
            dist = self._memo.get(prefix)
            if dist is not None:
                self._memo.move_to_end(prefix)
                return dist
        dist = self.lm.next_dist(prefix)
        with self._lock:
            self.calls += 1
            self._store(prefix, dist)
        return dist

    def batched_next_dist(self, prefixes):
        prefixes = [tuple(p) for p in prefixes]
        with self._lock:
            missing = list(dict.fromkeys(p for p in prefixes if p not in self._memo))
        if missing:
            dists = self.lm.batched_next_dist(missing)
            with self._lock:
                self.calls += len(missing)
                for p, d in zip(missing, dists):
                    self._store(p, d)
        out = []
        for p in prefixes:
            d = self._memo.get(p)
            out.append(d if d is not None else self.next_dist(p))
        return out

    def prefix_prob(self, x):
        x = tuple(x)
        known = self._prefix.get(x)
        if known is not None:
            return known
        k = len(x)
        while x[:k] not in self._prefix:
            k -= 1
        p = self._prefix[x[:k]]
        for i in range(k, len(x)):
            if p == 0.0:
                self._prefix[x[: i + 1]] = 0.0
                continue
            p = p * self.next_dist(x[:i]).get(x[i], 0.0)
            self._prefix[x[: i + 1]] = p
        return p

    def string_prob(self, x):
        x = tuple(x)
        p = self.prefix_prob(x)
        if p == 0.0:
            return 0.0
        return p * self.next_dist(x).get(EOS, 0.0)

    def prefetch(self, xs):
        """Compute prefix probabilities of ``xs`` with one batched call for the
        parents that are not cached yet."""
        parents = [x[:-1] for x in xs if x and tuple(x) not in self._prefix]
        parents = [p for p in dict.fromkeys(parents) if p not in self._memo and self.prefix_prob(p) > 0.0]
        if parents:
            self.batched_next_dist(parents)
        return [self.prefix_prob(x) for x in xs]


def prefix_prob_src(lm, x):
    p = 1.0
    x = as_string(x)
    for i, a in enumerate(x):
        p *= lm.next_dist(x[:i]).get(a, 0.0)
        if p == 0.0:
            return 0.0
    return p


def string_prob_src(lm, x):
    x = as_string(x)
    p = prefix_prob_src(lm, x)
    return p * lm.next_dist(x).get(EOS, 0.0) if p else 0.0


def batched_next_dist(lm, prefixes):
    return lm.batched_next_dist([as_string(p) for p in prefixes])


def load_lm(source):
    """Read the JSON model description from a path, stream or dict."""
    if isinstance(source, dict):
        desc = source
    elif hasattr(source, "read"):
        desc = json.load(source)
    else:
        with open(source, encoding="utf-8") as fh:
            desc = json.load(fh)
    kind = desc.get("type")
    if kind == "finite":
        return FiniteSupportLm([(x if isinstance(x, str) else tuple(x), p) for x, p in desc["entries"]])
    if kind == "geometric":
        return GeometricUniformLm(desc["stop"], desc["alphabet"])
    raise ValueError(f"unknown model type {kind!r}")
