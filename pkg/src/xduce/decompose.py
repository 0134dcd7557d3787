"""Quotient/remainder decomposition of the precover of a target prefix.

``Decomposer.decompose(y)`` runs a breadth-first search over source strings,
seeded from the decomposition of ``y[:-1]``: strings whose every extension maps
into the precover become quotient elements, other members become remainder
elements, and live strings are extended. ``decompose_next(y)`` performs one
joint search that yields the decompositions of every ``y + (b,)`` together with
the exact preimage of ``y``.
"""

from collections import defaultdict
from dataclasses import dataclass, field

from .errors import DeadEnd, NonTerminationError
from .lm import CachedLm
from .precover import Precover


def _order(x):
    return (len(x), x)


@dataclass(frozen=True)
class PruneConfig:
    tau: float = 0.0
    n_max: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must lie in [0, 1]")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be positive")

    @property
    def active(self):
        return self.tau > 0.0 or self.n_max is not None


@dataclass(frozen=True)
class BacktrackConfig:
    max_retries: int = 20
    tau_min: float = 1e-10
    max_depth: int = 32


@dataclass(frozen=True)
class Decomposition:
    quotient: tuple
    remainder: tuple
    exact: bool = True

    @property
    def quotient_set(self):
        return frozenset(self.quotient)

    @property
    def remainder_set(self):
        return frozenset(self.remainder)


@dataclass(frozen=True)
class NextDecomposition:
    quotients: dict = field(default_factory=dict)
    remainders: dict = field(default_factory=dict)
    preimage: tuple = ()
    exact: bool = True


def prune_mass(candidates, lm, cfg):
    """Keep the highest-mass candidates until they cover ``1 - tau`` of the
    total, at most ``n_max`` of them. Zero-mass candidates are dropped.
    Without an active config the candidates pass through untouched."""
    if not cfg.active:
        return list(candidates)
    masses = lm.prefetch(candidates)
    items = sorted(((m, x) for m, x in zip(masses, candidates) if m > 0.0), key=lambda t: (-t[0], t[1]))
    total = 0.0
    for m, _ in items:
        total += m
    limit = len(items) if cfg.n_max is None else min(cfg.n_max, len(items))
    keep = []
    w = 0.0
    for m, x in items[:limit]:
        keep.append(x)
        w += m
        if w >= (1.0 - cfg.tau) * total:
            break
    return keep


class Decomposer:
    """Memoized decompositions for one transducer and source model.

    The keyword switches turn off individual shortcuts; results must not
    change, which the test-suite checks differentially.
    """

    def __init__(self, f, lm=None, prune=None, universal=None, max_levels=None,
                 univ_filter=True, combined=True, skip_remainders=True, unique_cylinder=True):
        self.f = f
        self.precover = Precover(f, universal, univ_filter)
        self.universal = self.precover.universal
        if lm is not None and not isinstance(lm, CachedLm):
            lm = CachedLm(lm)
        self.lm = lm
        self.prune = prune or PruneConfig()
        self.max_levels = max_levels
        self.combined = combined
        self.skip_remainders = skip_remainders
        self.unique_cylinder = unique_cylinder
        self._dec = {}
        self._next = {}
        self.searches = 0

    def level_bound(self, y):
        if self.max_levels is not None:
            return self.max_levels
        return 4 * (self.f.num_states + len(y) + 2)

    def _prune(self, candidates):
        if not self.prune.active:
            return candidates, False
        if self.lm is None:
            raise ValueError("pruning needs a source model")
        kept = prune_mass(candidates, self.lm, self.prune)
        return kept, len(kept) < len(candidates)

    def evict(self, y):
        y = tuple(y)
        self._dec.pop(y, None)
        self._next.pop(y, None)

    def clear(self):
        self._dec.clear()
        self._next.clear()

    def cached(self, y):
        return self._dec.get(tuple(y))

    # -- single-target search -------------------------------------------------

    def decompose(self, y):
        y = tuple(y)
        hit = self._dec.get(y)
        if hit is not None:
            return hit
        k = len(y)
        while k > 0 and y[:k] not in self._dec:
            k -= 1
        if y[:k] not in self._dec:
            self._dec[y[:k]] = self._search(y[:k], None)
        for j in range(k + 1, len(y) + 1):
            self._dec[y[:j]] = self._search(y[:j], self._dec[y[: j - 1]])
        return self._dec[y]

    def _search(self, y, parent):
        pc = self.precover
        self.searches += 1
        if parent is None:
            queue = [()]
            exact = True
        else:
            queue = sorted(parent.quotient + parent.remainder, key=_order)
            exact = parent.exact
        seen = set(queue)
        quotient, remainder = [], []
        qset = set()
        bound = self.level_bound(y)
        level = 0
        while queue:
            level += 1
            if level > bound:
                raise NonTerminationError(
                    f"decomposition of a length-{len(y)} target exceeded {bound} search levels; "
                    "the machine may have an infinite decomposition (run `xduce check`)")
            nxt = []
            for x in queue:
                if any(x[:i] in qset for i in range(len(x))):
                    continue
                if pc.is_cylinder(x, y):
                    quotient.append(x)
                    qset.add(x)
                    continue
                if pc.is_member(x, y):
                    remainder.append(x)
                for a in pc.reachable_inputs(x, y):
                    xa = x + (a,)
                    if xa not in seen and pc.is_live(xa, y):
                        seen.add(xa)
                        nxt.append(xa)
            queue, dropped = self._prune(nxt)
            exact = exact and not dropped
        return Decomposition(tuple(sorted(quotient, key=_order)), tuple(sorted(remainder, key=_order)), exact)

    # -- joint next-symbol search ---------------------------------------------

    def decompose_next(self, y):
        y = tuple(y)
        hit = self._next.get(y)
        if hit is not None:
            return hit
        pc = self.precover
        base = self.decompose(y)
        self.searches += 1
        qset = base.quotient_set
        rset = base.remainder_set
        restrict = not base.exact
        queue = sorted(base.quotient + base.remainder, key=_order)
        seen = set(queue)
        qs, rs, ps = defaultdict(list), defaultdict(list), []
        exact = base.exact
        bound = self.level_bound(y)
        level = 0
        while queue:
            level += 1
            if level > bound:
                raise NonTerminationError(
                    f"next-symbol search after a length-{len(y)} target exceeded {bound} levels; "
                    "the machine may have an infinite decomposition (run `xduce check`)")
            nxt = []
            for x in queue:
                # under pruning only strings inside the kept part of the
                # precover are counted, so masses never exceed the normalizer
                inside = not restrict or x in rset or any(x[:i] in qset for i in range(len(x) + 1))
                if inside and pc.is_exact_member(x, y):
                    ps.append(x)
                absorbed = None
                frontier = pc.run(y, x)
                for b in pc.reachable_outputs(x, y):
                    yb = y + (b,)
                    if (absorbed is None or not self.unique_cylinder) and (
                            x not in rset or not self.skip_remainders):
                        if (self.combined and x in qset and pc.combined_universal(frontier, y, b)) \
                                or pc.is_cylinder(x, yb):
                            if inside:
                                qs[b].append(x)
                            if absorbed is None:
                                absorbed = b
                            continue
                    if inside and pc.is_member(x, yb):
                        rs[b].append(x)
                if absorbed is not None:
                    continue
                for a in pc.reachable_inputs(x, y):
                    xa = x + (a,)
                    if xa not in seen and pc.is_live(xa, y):
                        seen.add(xa)
                        nxt.append(xa)
            queue, dropped = self._prune(nxt)
            exact = exact and not dropped
        result = NextDecomposition(
            {b: tuple(sorted(v, key=_order)) for b, v in qs.items()},
            {b: tuple(sorted(v, key=_order)) for b, v in rs.items()},
            tuple(sorted(ps, key=_order)),
            exact,
        )
        self._next[y] = result
        for b in self.f.out_alphabet:
            self._dec[y + (b,)] = Decomposition(result.quotients.get(b, ()), result.remainders.get(b, ()), exact)
        return result


def backtrack(tlm, y, y_next, cfg=None):
    """Recover mass for ``y_next`` after ``y`` by re-running the search with a
    smaller threshold, evicting cached decompositions of ever longer suffixes
    of the history. Returns ``(distribution, retries)``; the threshold is
    restored afterwards either way."""
    cfg = cfg or tlm.backtrack_cfg
    engine = tlm.engine
    tau0 = engine.prune
    tau = tau0.tau
    y = tuple(y)
    try:
        for i in range(1, cfg.max_retries + 1):
            tau = max(tau / 2.0, cfg.tau_min)
            engine.prune = PruneConfig(tau, tau0.n_max)
            depth = min(2 ** (i - 1), cfg.max_depth)
            for d in range(depth):
                if d > len(y):
                    break
                engine.evict(y[: len(y) - d])
            dist = tlm._next_dist(y)
            if dist.get(y_next, 0.0) > 0.0:
                return dist, i
    finally:
        engine.prune = tau0
    raise DeadEnd(f"no mass for the observed symbol {y_next!r} after {cfg.max_retries} retries")
