"""The transduced language model: a source model pushed through a transducer."""

import math
import random
from bisect import bisect_right
from collections import defaultdict
from itertools import accumulate

from .decompose import BacktrackConfig, Decomposer, PruneConfig, backtrack
from .errors import UsageError
from .fst import EPS, apply, as_string, compute_ip_universal, push_output_labels, trim
from .lm import EOS, CachedLm


def fast_path_eligible(f, universal=None):
    """Every state universal and every symbol-reading arc emits a symbol."""
    universal = compute_ip_universal(f) if universal is None else universal
    if len(universal) != f.num_states:
        return False
    return all(b != EPS for _, a, b, _ in f.arcs if a != EPS)


class TransducedLm:
    """Autoregressive model over the transducer's output alphabet.

    ``tau`` and ``n_max`` control probability-mass pruning (``tau=0`` and no
    cap gives exact answers on machines with finite decompositions).
    ``retries``, ``tau_min`` and ``d_max`` configure recovery when an observed
    symbol has no mass under pruning. ``fast_path=False`` disables the
    specialized next-symbol routine for all-universal machines.
    """

    def __init__(self, fst, lm, tau=0.0, n_max=None, retries=20, tau_min=1e-10, d_max=32,
                 fast_path=True, push=False, max_levels=None, **shortcuts):
        f = trim(fst)
        if push:
            f = push_output_labels(f)
        self.fst = f
        self.source_fst = fst
        self.lm = lm if isinstance(lm, CachedLm) else CachedLm(lm)
        self.universal = compute_ip_universal(f)
        self.engine = Decomposer(f, self.lm, PruneConfig(tau, n_max), self.universal, max_levels, **shortcuts)
        self.precover = self.engine.precover
        self.backtrack_cfg = BacktrackConfig(retries, tau_min, d_max)
        self.fast_path = fast_path
        self.fast_path_eligible = fast_path_eligible(f, self.universal)
        self.retries = 0
        self.lm_requests = 0
        self._first = {}
        self._samplers = {}
        self._outputs = {}

    def __repr__(self):
        return f"TransducedLm({self.fst!r}, {self.lm.lm!r}, tau={self.tau})"

    @property
    def tau(self):
        return self.engine.prune.tau

    @property
    def alphabet(self):
        return self.fst.out_alphabet

    # -- probabilities ----------------------------------------------------------

    def decompose(self, y):
        return self.engine.decompose(as_string(y))

    def decompose_next(self, y):
        return self.engine.decompose_next(as_string(y))

    def prefix_prob(self, y):
        """Probability that the output starts with ``y``."""
        d = self.decompose(y)
        lm = self.lm
        return math.fsum([lm.prefix_prob(x) for x in d.quotient]) + math.fsum(
            [lm.string_prob(x) for x in d.remainder])

    def prob(self, y):
        """Probability that the output is exactly ``y``."""
        nd = self.decompose_next(y)
        return math.fsum([self.lm.string_prob(x) for x in nd.preimage])

    def next_dist(self, y):
        y = as_string(y)
        if self.fast_path and self.fast_path_eligible:
            return self.all_universal_next_dist(y)
        return self._general_next_dist(y)

    def _next_dist(self, y):
        return self.next_dist(y)

    def _general_next_dist(self, y):
        nd = self.engine.decompose_next(y)
        z = self.prefix_prob(y)
        if z <= 0.0:
            return {EOS: 1.0}
        lm = self.lm
        dist = {EOS: math.fsum([lm.string_prob(x) for x in nd.preimage]) / z}
        for b in self.fst.out_alphabet:
            q = nd.quotients.get(b, ())
            r = nd.remainders.get(b, ())
            if not q and not r:
                continue
            m = math.fsum([lm.prefix_prob(x) for x in q]) + math.fsum([lm.string_prob(x) for x in r])
            if m > 0.0:
                dist[b] = m / z
        return dist

    def _first_output(self, states, a):
        key = (states, a)
        if key not in self._first:
            out = None
            for s in sorted(states):
                arcs = self.fst.transitions(s, a)
                if arcs:
                    out = arcs[0][0]
                    break
            self._first[key] = out
        return self._first[key]

    def all_universal_next_dist(self, y):
        """Next-symbol distribution for machines whose states are all universal
        and whose symbol-reading arcs all emit: committed buffers contribute
        whole prefix masses, boundary states need one source-model call per
        quotient element."""
        if not self.fast_path_eligible:
            raise UsageError("the machine does not meet the fast-path preconditions")
        y = as_string(y)
        d = self.engine.decompose(y)
        z = self.prefix_prob(y)
        if z <= 0.0:
            return {EOS: 1.0}
        n = len(y)
        lm = self.lm
        acc = defaultdict(list)
        requests = 0
        accepting = self.fst.accepting
        for x in d.quotient:
            px = lm.prefix_prob(x)
            if px == 0.0:
                continue
            frontier = self.precover.run(y, x)
            for c in sorted({b[n] for _, b in frontier if len(b) > n}):
                acc[c].append(px)
            boundary = frozenset(s for s, b in frontier if len(b) == n)
            if not boundary:
                continue
            ell = lm.next_dist(x)
            requests += 1
            for a in self.fst.in_alphabet:
                p = ell.get(a, 0.0)
                if p > 0.0:
                    c = self._first_output(boundary, a)
                    if c is not None:
                        acc[c].append(px * p)
            if boundary & accepting:
                acc[EOS].append(px * ell.get(EOS, 0.0))
        self.lm_requests = requests
        dist = {EOS: math.fsum(acc.pop(EOS, [])) / z}
        for c in self.fst.out_alphabet:
            if c in acc:
                m = math.fsum(acc[c])
                if m > 0.0:
                    dist[c] = m / z
        return dist

    def conditional(self, y, b):
        """Next-symbol distribution after ``y``, retrying with smaller
        thresholds when pruning removed all mass for the observed ``b``."""
        y = as_string(y)
        dist = self.next_dist(y)
        if dist.get(b, 0.0) == 0.0 and self.engine.prune.tau > 0.0:
            dist, used = backtrack(self, y, b)
            self.retries += used
        return dist

    def score(self, y):
        """Per-symbol report for the target string ``y``."""
        y = as_string(y)
        rows = []
        truncated = False
        for t, b in enumerate(y):
            dist = self.conditional(y[:t], b)
            p = dist.get(b, 0.0)
            rows.append({
                "position": t,
                "symbol": b,
                "prob": p,
                "surprisal_bits": -math.log2(p) if p > 0.0 else math.inf,
                "deficit": max(0.0, 1.0 - math.fsum(dist.values())),
            })
            if p == 0.0:
                truncated = True
                break
        report = {"target": y, "symbols": rows, "truncated": truncated, "retries": self.retries}
        if not truncated:
            report["prefix_prob"] = self.prefix_prob(y)
            report["prob"] = self.prob(y)
        else:
            report["prefix_prob"] = 0.0
            report["prob"] = 0.0
        return report

    # -- sampling ---------------------------------------------------------------

    def _sampler(self, prefix):
        hit = self._samplers.get(prefix)
        if hit is None:
            dist = self.lm.next_dist(prefix)
            keys = [EOS] + [a for a in dist if a is not EOS]
            hit = (keys, list(accumulate(dist.get(k, 0.0) for k in keys)))
            self._samplers[prefix] = hit
        return hit

    def sample_source(self, rng):
        x = ()
        while True:
            keys, cum = self._sampler(x)
            i = bisect_right(cum, rng.random() * cum[-1])
            a = keys[min(i, len(keys) - 1)]
            if a is EOS:
                return x
            x = x + (a,)

    def sample(self, n=1, seed=None):
        """Draw ``n`` target strings by sampling the source model and applying
        the transducer. Source strings outside the domain give None."""
        rng = seed if isinstance(seed, random.Random) else random.Random(seed)
        out = []
        for _ in range(n):
            x = self.sample_source(rng)
            if x not in self._outputs:
                self._outputs[x] = apply(self.fst, x)
            out.append(self._outputs[x])
        return out
