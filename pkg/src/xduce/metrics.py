"""Evaluation statistics."""

import math
import random


def jsd(p, q):
    """Jensen-Shannon divergence in bits between two sparse distributions.
    Missing keys have probability zero; inputs need not be normalized."""
    terms = []
    for k in set(p) | set(q):
        a, b = p.get(k, 0.0), q.get(k, 0.0)
        if a > 0.0:
            terms.append(0.5 * a * math.log2(2.0 * a / (a + b)))
        if b > 0.0:
            terms.append(0.5 * b * math.log2(2.0 * b / (a + b)))
    return min(max(math.fsum(terms), 0.0), 1.0)


def surprisal_bits(p):
    return 0.0 - math.log2(p) if p > 0.0 else math.inf


def bootstrap_ci(values, n_boot=1000, level=0.95, seed=0):
    """Percentile bootstrap interval for the mean."""
    values = list(values)
    if not values:
        return math.nan, math.nan
    if len(values) == 1:
        return values[0], values[0]
    rng = random.Random(seed)
    n = len(values)
    means = sorted(math.fsum(rng.choices(values, k=n)) / n for _ in range(n_boot))
    lo = int(math.floor((1.0 - level) / 2.0 * n_boot))
    hi = int(math.ceil((1.0 + level) / 2.0 * n_boot)) - 1
    return means[lo], means[min(hi, n_boot - 1)]
