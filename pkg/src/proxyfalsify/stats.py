"""Campaign metrics and the two-sample statistics used to compare tools."""
from __future__ import annotations

import math

import numpy as np


def coverage(violations, n_subspecs: int) -> float:
    """Percentage of sub-specs with negative robustness in at least one violation."""
    if n_subspecs < 1:
        raise ValueError("n_subspecs must be at least 1")
    hit = set()
    for v in violations:
        vec = v["robustness_vector"] if isinstance(v, dict) else v.robustness_vector
        hit.update(i for i, r in enumerate(vec) if r < 0)
    return 100.0 * len(hit) / n_subspecs


def success_rate(outcomes, total_trials: int) -> float:
    """Fraction of ``total_trials`` whose outcome uncovered a genuine violation.

    ``outcomes`` is an iterable of booleans or a count."""
    if total_trials < 1:
        raise ValueError("total_trials must be at least 1")
    hits = outcomes if isinstance(outcomes, (int, np.integer)) else sum(bool(o) for o in outcomes)
    return hits / total_trials


def relative_improvement(ours: float, baseline: float) -> float:
    if baseline == 0:
        return math.inf if ours > 0 else (0.0 if ours == 0 else -math.inf)
    return (ours - baseline) / baseline


def _check(xs, ys):
    xs = np.asarray(xs, dtype=float).reshape(-1)
    ys = np.asarray(ys, dtype=float).reshape(-1)
    if xs.size == 0 or ys.size == 0:
        raise ValueError("both samples must be non-empty")
    return xs, ys


def a12(xs, ys) -> float:
    """Vargha-Delaney A: P(X > Y) + 0.5 P(X = Y)."""
    xs, ys = _check(xs, ys)
    gt = (xs[:, None] > ys[None, :]).sum()
    eq = (xs[:, None] == ys[None, :]).sum()
    return float((gt + 0.5 * eq) / (xs.size * ys.size))


def a12_label(a: float) -> str:
    if a > 0.71 or a < 0.29:
        return "large"
    if a >= 0.64 or a <= 0.36:
        return "medium"
    return "negligible"


def midranks(values) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(v.size)
    sv = v[order]
    i = 0
    while i < v.size:
        j = i
        while j + 1 < v.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _u_stat(xs, ys):
    r = midranks(np.concatenate([xs, ys]))
    n1 = xs.size
    return r[:n1].sum() - n1 * (n1 + 1) / 2, r


def _asymptotic_p(u, r, n1, n2):
    n = n1 + n2
    mu = n1 * n2 / 2
    _, counts = np.unique(r, return_counts=True)
    tie = (counts ** 3 - counts).sum()
    var = n1 * n2 / 12 * ((n + 1) - tie / (n * (n - 1))) if n > 1 else 0.0
    if var <= 0:
        return 1.0
    z = (abs(u - mu) - 0.5) / math.sqrt(var)
    if z <= 0:
        return 1.0
    return min(1.0, math.erfc(z / math.sqrt(2)))


def _exact_p(u, r, n1):
    """Two-sided permutation p over all splits of the pooled midranks.

    Counts splits by rank sum with a DP on doubled ranks (integers even with
    ties), so cost is polynomial rather than C(n, n1)."""
    twice = np.rint(2 * r).astype(int)
    # ways[k][s]: number of k-subsets with doubled rank sum s
    ways = [dict() for _ in range(n1 + 1)]
    ways[0][0] = 1
    for w in twice:
        for k in range(min(n1, len(twice)) - 1, -1, -1):
            for s, c in ways[k].items():
                ways[k + 1][s + w] = ways[k + 1].get(s + w, 0) + c
    dist = ways[n1]
    n_all = sum(dist.values())
    # null mean of the doubled rank sum
    centre = n1 * (len(twice) + 1)
    obs = abs(2 * (u + n1 * (n1 + 1) / 2) - centre)
    hits = sum(c for s, c in dist.items() if abs(s - centre) >= obs - 1e-9)
    return min(1.0, hits / n_all)


EXACT_LIMIT = 8


def mann_whitney_u(xs, ys, method: str = "auto"):
    """Return (U of ``xs``, two-sided p).

    ``method="asymptotic"`` uses the normal approximation with tie and
    continuity corrections; ``"exact"`` enumerates rank-sum permutations.
    ``"auto"`` is exact when both samples have at most EXACT_LIMIT entries.
    """
    xs, ys = _check(xs, ys)
    if method not in ("auto", "exact", "asymptotic"):
        raise ValueError(f"unknown method {method!r}")
    u, r = _u_stat(xs, ys)
    if method == "auto":
        method = "exact" if max(xs.size, ys.size) <= EXACT_LIMIT else "asymptotic"
    if method == "exact":
        p = _exact_p(u, r, xs.size)
    else:
        p = _asymptotic_p(u, r, xs.size, ys.size)
    return float(u), float(p)
