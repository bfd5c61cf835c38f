"""Independent reference implementations used only by the tests.

Nothing here imports the evaluator or statistics code under test; the STL
oracle is a plain recursion over every window index and the rank-test oracles
enumerate all pairs or all splits.
"""
from itertools import combinations

import numpy as np

from proxyfalsify.stl import (Always, And, Atom, Eventually, FalseF, Implies, Not, Or, TrueF,
                              Until)

INF = float("inf")


class OutOfTrace(Exception):
    pass


def _f(atom, x):
    return sum(c * v for c, v in zip(atom.coeffs, x)) + atom.offset


def naive_rho(phi, X, t=0):
    """Brute-force robustness, written from the recursive definitions."""
    L = len(X)
    if isinstance(phi, TrueF):
        return INF
    if isinstance(phi, FalseF):
        return -INF
    if isinstance(phi, Atom):
        f, c = _f(phi, X[t]), phi.threshold
        if phi.op in ("<", "<="):
            return c - f
        if phi.op in (">", ">="):
            return f - c
        return -abs(f - c)
    if isinstance(phi, Not):
        return -naive_rho(phi.child, X, t)
    if isinstance(phi, And):
        return min(naive_rho(phi.left, X, t), naive_rho(phi.right, X, t))
    if isinstance(phi, Or):
        return max(naive_rho(phi.left, X, t), naive_rho(phi.right, X, t))
    if isinstance(phi, Implies):
        return max(-naive_rho(phi.left, X, t), naive_rho(phi.right, X, t))
    if t + phi.a > L - 1:
        raise OutOfTrace
    window = list(range(t + phi.a, min(t + phi.b, L - 1) + 1))
    if isinstance(phi, Always):
        return min(naive_rho(phi.child, X, u) for u in window)
    if isinstance(phi, Eventually):
        return max(naive_rho(phi.child, X, u) for u in window)
    if isinstance(phi, Until):
        best = -INF
        for u in window:
            v = naive_rho(phi.right, X, u)
            for w in range(t, u + 1):
                v = min(v, naive_rho(phi.left, X, w))
            best = max(best, v)
        return best
    raise TypeError(phi)


OPS = ("<", "<=", ">", ">=", "=")


def random_atom(rng, n):
    coeffs = tuple(float(c) for c in rng.integers(-2, 3, n))
    return Atom(coeffs, float(rng.integers(-2, 3)) / 2, OPS[rng.integers(len(OPS))],
                float(rng.integers(-4, 5)) / 2)


def random_formula(rng, n, depth=4):
    """Random formula of nesting depth at most ``depth`` over ``n`` variables."""
    if depth <= 1 or rng.random() < 0.2:
        r = rng.random()
        if r < 0.05:
            return TrueF()
        if r < 0.1:
            return FalseF()
        return random_atom(rng, n)
    kind = rng.integers(8)
    sub = lambda: random_formula(rng, n, depth - 1)  # noqa: E731
    a = int(rng.integers(0, 4))
    b = a + int(rng.integers(0, 5))
    if kind == 0:
        return Not(sub())
    if kind == 1:
        return And(sub(), sub())
    if kind == 2:
        return Or(sub(), sub())
    if kind == 3:
        return Implies(sub(), sub())
    if kind == 4:
        return Always(a, b, sub())
    if kind == 5:
        return Eventually(a, b, sub())
    return Until(a, b, sub(), sub())


def random_trace(rng, n, max_len=12):
    L = int(rng.integers(1, max_len + 1))
    # coarse grid values make exact ties (robustness 0) show up regularly
    return rng.integers(-6, 7, (L, n)) / 2.0


def pair_count_a12(xs, ys):
    gt = sum(1 for x in xs for y in ys if x > y)
    eq = sum(1 for x in xs for y in ys if x == y)
    return (gt + 0.5 * eq) / (len(xs) * len(ys))


def pair_count_u(xs, ys):
    return sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in xs for y in ys)


def permutation_p(xs, ys):
    """Two-sided p of the pair-count U statistic over every relabelling."""
    pooled = list(xs) + list(ys)
    n1, n2 = len(xs), len(ys)
    centre = n1 * n2 / 2
    obs = abs(pair_count_u(xs, ys) - centre)
    hits = total = 0
    for idx in combinations(range(len(pooled)), n1):
        chosen = set(idx)
        a = [pooled[i] for i in idx]
        b = [pooled[i] for i in range(len(pooled)) if i not in chosen]
        hits += abs(pair_count_u(a, b) - centre) >= obs - 1e-9
        total += 1
    return hits / total


def naive_alignment(y_ai, y_px):
    y_ai = np.asarray(y_ai, float)
    y_px = np.asarray(y_px, float)
    total = 0.0
    for ch in range(y_ai.shape[1]):
        both = list(y_ai[:, ch]) + list(y_px[:, ch])
        lo, hi = min(both), max(both)
        for a, p in zip(y_ai[:, ch], y_px[:, ch]):
            if hi > lo:
                total += abs((a - lo) / (hi - lo) - (p - lo) / (hi - lo))
    return total / y_ai.size
