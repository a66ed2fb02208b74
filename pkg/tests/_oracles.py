"""Brute-force oracles used by the tests.

Everything here is deliberately independent of the package's sort-based
estimators: plain dict/Counter grouping and textbook formulas, so the fast
paths are checked against a second route.
"""

import math
from collections import Counter, defaultdict

import numpy as np


def shannon_bits(counts):
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c)


def dict_entropy(keys):
    """Plug-in entropy of a key multiset via Counter."""
    return shannon_bits(list(Counter(np.asarray(keys).tolist()).values()))


def dict_conditional_entropy(group_keys, cell_keys):
    """Weighted per-group plug-in entropy via nested dicts."""
    groups = defaultdict(Counter)
    for g, x in zip(np.asarray(group_keys).tolist(),
                    np.asarray(cell_keys).tolist()):
        groups[g][x] += 1
    total = len(group_keys)
    return sum(sum(c.values()) / total * shannon_bits(list(c.values()))
               for c in groups.values())


def dict_modal(group_keys, cell_keys):
    """Per-group modal cell, ties to the smallest cell key."""
    groups = defaultdict(Counter)
    for g, x in zip(np.asarray(group_keys).tolist(),
                    np.asarray(cell_keys).tolist()):
        groups[g][x] += 1
    out = {}
    for g, counter in groups.items():
        best = max(counter.items(), key=lambda kv: (kv[1], -kv[0]))
        out[g] = best[0]
    return out


def jackknife_entropy_std(counts):
    """Leave-one-out spread of the plug-in entropy of a histogram."""
    counts = np.asarray([c for c in counts if c > 0], dtype=np.float64)
    total = counts.sum()
    if total < 2:
        return 0.0

    def h(cs, t):
        p = cs[cs > 0] / t
        return -np.sum(p * np.log2(p))

    loo = np.empty(counts.size)
    for j in range(counts.size):
        cs = counts.copy()
        cs[j] -= 1
        loo[j] = h(cs, total - 1)
    mean = float(np.sum(counts * loo) / total)
    var = float(np.sum(counts * (loo - mean) ** 2) * (total - 1) / total)
    return math.sqrt(max(var, 0.0))
