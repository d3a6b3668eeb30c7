"""Naive reference implementations used as test oracles.

Everything here is plain Python loops over lists and dicts so it shares no
code path with the package.
"""

from __future__ import annotations

import random


def naive_argmax(vec):
    best = 0
    for i, v in enumerate(vec):
        if v > vec[best]:
            best = i
    return best


def naive_trust(confidence, correct, alpha=1.0, beta=1.0):
    c = min(max(confidence, 0.0), 1.0)
    return c**alpha if correct else (1.0 - c) ** beta


def naive_scores(rows, alpha=1.0, beta=1.0):
    """rows: list of (confidences, oracle). Returns list of (actor, oracle, trust)."""
    out = []
    for vec, z in rows:
        y = naive_argmax(vec)
        out.append((y, z, naive_trust(vec[y], y == z, alpha, beta)))
    return out


def naive_matrix(scores, k):
    cells = {}
    for y, z, t in scores:
        cells.setdefault((y, z), []).append(t)
    values = [[None] * k for _ in range(k)]
    support = [[0] * k for _ in range(k)]
    for (y, z), ts in cells.items():
        values[y][z] = sum(ts) / len(ts)
        support[y][z] = len(ts)
    return values, support


def naive_spectrum(scores, k):
    per = {}
    for _, z, t in scores:
        per.setdefault(z, []).append(t)
    n = len(scores)
    expected = [sum(per[z]) / len(per[z]) if z in per else None for z in range(k)]
    weights = [len(per.get(z, [])) / n for z in range(k)]
    return expected, weights


def naive_net_trust(expected, weights):
    return sum(w * e for w, e in zip(weights, expected) if e is not None)


def naive_uniform_net_trust(expected):
    defined = [e for e in expected if e is not None]
    return sum(defined) / len(defined)


def naive_summary(scores):
    right = [t for y, z, t in scores if y == z]
    wrong = [t for y, z, t in scores if y != z]
    return {
        "accuracy": len(right) / len(scores),
        "conditional_correct": sum(right) / len(right) if right else None,
        "conditional_incorrect": sum(wrong) / len(wrong) if wrong else None,
        "net_trust_score": sum(t for _, _, t in scores) / len(scores),
    }


def naive_histogram(trusts, bins, denominator):
    """Mass per bin; bin i is [i/bins, (i+1)/bins) and the last bin also holds 1.0."""
    counts = [0] * bins
    for t in trusts:
        i = 0
        while i + 1 < bins and t >= (i + 1) / bins:
            i += 1
        counts[i] += 1
    return counts, [c / denominator for c in counts]


def random_rows(rng: random.Random, n: int, k: int):
    """Random probability vectors with a unique argmax, paired with oracle labels."""
    rows = []
    for _ in range(n):
        raw = [rng.random() ** 3 for _ in range(k)]
        s = sum(raw)
        vec = [v / s for v in raw]
        if rng.random() < 0.1:
            # one-hot answers hit the trust endpoints 0 and 1
            hot = rng.randrange(k)
            vec = [1.0 if i == hot else 0.0 for i in range(k)]
        rows.append((vec, rng.randrange(k)))
    return rows
