"""Signal temporal logic: formula AST, text parser/printer, robustness and
Boolean monitors over discrete-time traces, and conjunctive splitting.

Time is measured in trace steps. A temporal window ``[t+a, t+b]`` that runs
past the last sample is clipped to it; a window that starts past the end of the
trace cannot be evaluated and raises :class:`WindowError`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

COMPARATORS = ("<", "<=", ">", ">=", "=")


class ParseError(ValueError):
    """Raised on malformed specification text. Carries a 1-based position."""

    def __init__(self, message, line, col):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class WindowError(ValueError):
    pass


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class TrueF:
    pass


@dataclass(frozen=True)
class FalseF:
    pass


@dataclass(frozen=True)
class Atom:
    """Affine predicate ``coeffs . s + offset  <op>  threshold``."""

    coeffs: tuple
    offset: float
    op: str
    threshold: float

    def __post_init__(self):
        if self.op not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.op!r}")


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


def _check_interval(a, b):
    if int(a) != a or int(b) != b:
        raise ValueError("interval bounds must be integers")
    if a < 0 or b < 0 or a > b:
        raise ValueError(f"invalid interval [{a},{b}]")


@dataclass(frozen=True)
class Always:
    a: int
    b: int
    child: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)


@dataclass(frozen=True)
class Eventually:
    a: int
    b: int
    child: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)


@dataclass(frozen=True)
class Until:
    a: int
    b: int
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        _check_interval(self.a, self.b)


Formula = Union[TrueF, FalseF, Atom, Not, And, Or, Implies, Always, Eventually, Until]


@dataclass(frozen=True)
class SubSpecSet:
    """Ordered sub-specifications whose conjunction is ``origin``."""

    parts: tuple
    origin: Formula

    def __len__(self):
        return len(self.parts)

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]


# --------------------------------------------------------------------------
# Lexer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>->|<=|>=|[<>=()\[\],+\-*/])
    """,
    re.VERBOSE,
)

_KEYWORDS = {"always", "eventually", "until", "not", "and", "or", "true", "false", "abs", "pi"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text):
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            word = m.group()
            if kind == "ident" and word in _KEYWORDS:
                kind = word
            elif kind == "op":
                kind = word
            toks.append(_Tok(kind, word, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text, state_vars):
        self.toks = _tokenize(text)
        self.i = 0
        self.vars = list(state_vars)
        self.index = {v: k for k, v in enumerate(self.vars)}

    # helpers
    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def accept(self, kind):
        if self.tok.kind == kind:
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind):
        t = self.accept(kind)
        if t is None:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        return t

    # grammar
    def parse(self):
        phi = self.implies()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected token {self.tok.text!r}")
        return phi

    def implies(self):
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.implies())
        return left

    def disj(self):
        left = self.conj()
        while self.accept("or"):
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.until()
        while self.accept("and"):
            left = And(left, self.until())
        return left

    def until(self):
        left = self.unary()
        if self.tok.kind == "until":
            self.i += 1
            a, b = self.interval()
            return Until(a, b, left, self.unary())
        return left

    def interval(self):
        start = self.expect("[")
        a = self.int_bound()
        self.expect(",")
        b = self.int_bound()
        self.expect("]")
        if a > b:
            raise self.error(f"interval lower bound {a} exceeds upper bound {b}", start)
        return a, b

    def int_bound(self):
        if self.tok.kind == "-":
            raise self.error("interval bounds must be non-negative")
        t = self.expect("num")
        try:
            return int(t.text)
        except ValueError:
            raise self.error(f"interval bound must be an integer, got {t.text!r}", t) from None

    def unary(self):
        kind = self.tok.kind
        if kind == "not":
            self.i += 1
            return Not(self.unary())
        if kind in ("always", "eventually"):
            self.i += 1
            a, b = self.interval()
            child = self.unary()
            return Always(a, b, child) if kind == "always" else Eventually(a, b, child)
        if kind == "true":
            self.i += 1
            return TrueF()
        if kind == "false":
            self.i += 1
            return FalseF()
        if kind == "(":
            self.i += 1
            phi = self.implies()
            self.expect(")")
            return phi
        if kind == "abs":
            return self.abs_atom()
        if kind in ("num", "ident", "pi", "-", "+"):
            return self.atom()
        raise self.error(f"unexpected token {self.tok.text or 'end of input'!r}")

    def comparator(self):
        if self.tok.kind in COMPARATORS:
            t = self.tok
            self.i += 1
            return t.text
        raise self.error(f"expected comparator, found {self.tok.text or 'end of input'!r}")

    def atom(self):
        coeffs, offset = self.expr()
        op = self.comparator()
        thr = self.const()
        return Atom(tuple(coeffs), offset, op, thr)

    def abs_atom(self):
        self.expect("abs")
        self.expect("(")
        coeffs, offset = self.expr()
        self.expect(")")
        op = self.comparator()
        c = self.const()
        pos = tuple(coeffs)
        if op in ("<", "<="):
            lower = ">" if op == "<" else ">="
            return And(Atom(pos, offset, op, c), Atom(pos, offset, lower, -c))
        if op in (">", ">="):
            upper = "<" if op == ">" else "<="
            return Or(Atom(pos, offset, op, c), Atom(pos, offset, upper, -c))
        return Or(Atom(pos, offset, "=", c), Atom(pos, offset, "=", -c))

    def expr(self):
        coeffs = [0.0] * len(self.vars)
        offset = 0.0
        while True:
            sign = 1.0
            while self.tok.kind in ("+", "-"):
                if self.tok.kind == "-":
                    sign = -sign
                self.i += 1
            c, var = self.term()
            if var is None:
                offset += sign * c
            else:
                coeffs[var] += sign * c
            if self.tok.kind not in ("+", "-"):
                return coeffs, offset

    def term(self):
        """``number [*] var`` | ``number`` | ``var``; returns (coefficient, var index or None)."""
        if self.tok.kind == "ident":
            return 1.0, self.variable()
        c = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.tok.kind
            self.i += 1
            if op == "*" and self.tok.kind == "ident":
                return c, self.variable()
            d = self.factor()
            c = c * d if op == "*" else c / d
        if self.tok.kind == "ident":
            return c, self.variable()
        return c, None

    def variable(self):
        t = self.expect("ident")
        if t.text not in self.index:
            raise self.error(f"unknown variable {t.text!r}", t)
        return self.index[t.text]

    def factor(self):
        if self.accept("pi"):
            return math.pi
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return float(t.text)
        raise self.error(f"expected a number, found {t.text or 'end of input'!r}")

    def const(self):
        sign = 1.0
        while self.tok.kind in ("+", "-"):
            if self.tok.kind == "-":
                sign = -sign
            self.i += 1
        c = self.factor()
        while self.tok.kind in ("*", "/"):
            op = self.tok.kind
            self.i += 1
            d = self.factor()
            c = c * d if op == "*" else c / d
        return sign * c


def parse_stl(text: str, state_vars: Sequence[str]) -> Formula:
    """Parse specification text over the ordered ``state_vars``.

    ``abs(e) < c`` is desugared into ``(e < c) and (e > -c)``.
    """
    return _Parser(text, state_vars).parse()


def _num(x):
    return repr(float(x))


def _expr_text(atom, state_vars):
    terms = [f"{_num(c)}*{v}" for c, v in zip(atom.coeffs, state_vars) if c != 0]
    if atom.offset != 0 or not terms:
        terms.append(_num(atom.offset))
    return " + ".join(terms)


def to_text(phi: Formula, state_vars: Sequence[str]) -> str:
    """Fully parenthesised text that :func:`parse_stl` maps back to ``phi``."""
    if isinstance(phi, TrueF):
        return "true"
    if isinstance(phi, FalseF):
        return "false"
    if isinstance(phi, Atom):
        if len(phi.coeffs) != len(state_vars):
            raise ValueError("atom dimension does not match state_vars")
        return f"{_expr_text(phi, state_vars)} {phi.op} {_num(phi.threshold)}"
    if isinstance(phi, Not):
        return f"not ({to_text(phi.child, state_vars)})"
    if isinstance(phi, (And, Or, Implies)):
        word = {And: "and", Or: "or", Implies: "->"}[type(phi)]
        return f"({to_text(phi.left, state_vars)}) {word} ({to_text(phi.right, state_vars)})"
    if isinstance(phi, (Always, Eventually)):
        word = "always" if isinstance(phi, Always) else "eventually"
        return f"{word}[{phi.a},{phi.b}] ({to_text(phi.child, state_vars)})"
    if isinstance(phi, Until):
        return (f"({to_text(phi.left, state_vars)}) until[{phi.a},{phi.b}] "
                f"({to_text(phi.right, state_vars)})")
    raise TypeError(f"not a formula: {phi!r}")


# --------------------------------------------------------------------------
# Monitors


def _states_of(trace):
    states = getattr(trace, "states", trace)
    states = np.asarray(states, dtype=float)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("empty trace")
    return states


def _atom_values(atom, X):
    if len(atom.coeffs) != X.shape[1]:
        raise ValueError(
            f"atom has {len(atom.coeffs)} coefficients but trace has {X.shape[1]} variables")
    f = (X * np.asarray(atom.coeffs)).sum(axis=1) + atom.offset
    c = atom.threshold
    if atom.op in ("<", "<="):
        return c - f
    if atom.op in (">", ">="):
        return f - c
    return -np.abs(f - c)


def _signal(phi, X, lo, hi):
    """Robustness of ``phi`` at indices lo..hi (inclusive); NaN marks indices
    whose evaluation needs a window lying entirely past the trace end."""
    L = X.shape[0]
    n = hi - lo + 1
    if isinstance(phi, TrueF):
        return np.full(n, np.inf)
    if isinstance(phi, FalseF):
        return np.full(n, -np.inf)
    if isinstance(phi, Atom):
        return _atom_values(phi, X[lo:hi + 1])
    if isinstance(phi, Not):
        return -_signal(phi.child, X, lo, hi)
    if isinstance(phi, And):
        return np.minimum(_signal(phi.left, X, lo, hi), _signal(phi.right, X, lo, hi))
    if isinstance(phi, Or):
        return np.maximum(_signal(phi.left, X, lo, hi), _signal(phi.right, X, lo, hi))
    if isinstance(phi, Implies):
        return np.maximum(-_signal(phi.left, X, lo, hi), _signal(phi.right, X, lo, hi))

    out = np.full(n, np.nan)
    if isinstance(phi, (Always, Eventually)):
        c_lo, c_hi = lo + phi.a, min(hi + phi.b, L - 1)
        if c_lo > L - 1:
            return out
        child = _signal(phi.child, X, c_lo, c_hi)
        reduce = np.min if isinstance(phi, Always) else np.max
        for k, t in enumerate(range(lo, hi + 1)):
            s, e = t + phi.a, min(t + phi.b, L - 1)
            if s > L - 1:
                break
            out[k] = reduce(child[s - c_lo:e - c_lo + 1])
        return out

    if isinstance(phi, Until):
        r_hi = min(hi + phi.b, L - 1)
        if lo + phi.a > L - 1:
            return out
        left = _signal(phi.left, X, lo, r_hi)
        right = _signal(phi.right, X, lo + phi.a, r_hi)
        r_lo = lo + phi.a
        for k, t in enumerate(range(lo, hi + 1)):
            s, e = t + phi.a, min(t + phi.b, L - 1)
            if s > L - 1:
                break
            # running min of the left operand over [t, t'] for t' in [t, e]
            run = np.minimum.accumulate(left[t - lo:e - lo + 1])
            cand = np.minimum(right[s - r_lo:e - r_lo + 1], run[s - t:])
            out[k] = np.max(cand)
        return out
    raise TypeError(f"not a formula: {phi!r}")


def robustness(phi: Formula, trace, t: int = 0) -> float:
    """Quantitative robustness of ``phi`` on ``trace`` at step ``t``.

    ``trace`` is a :class:`~proxyfalsify.traces.Trace` or a (steps x vars) array.
    """
    X = _states_of(trace)
    if not 0 <= t < X.shape[0]:
        raise IndexError(f"time index {t} outside trace of length {X.shape[0]}")
    val = float(_signal(phi, X, t, t)[0])
    if math.isnan(val):
        raise WindowError("a temporal window lies entirely beyond the end of the trace")
    return val


def _atom_holds(atom, x):
    f = sum(c * v for c, v in zip(atom.coeffs, x)) + atom.offset
    c = atom.threshold
    return {"<": f < c, "<=": f <= c, ">": f > c, ">=": f >= c, "=": f == c}[atom.op]


def _window(phi, L, t):
    s, e = t + phi.a, min(t + phi.b, L - 1)
    if s > L - 1:
        raise WindowError("a temporal window lies entirely beyond the end of the trace")
    return range(s, e + 1)


def _holds(phi, X, t):
    L = X.shape[0]
    if isinstance(phi, TrueF):
        return True
    if isinstance(phi, FalseF):
        return False
    if isinstance(phi, Atom):
        if len(phi.coeffs) != X.shape[1]:
            raise ValueError("atom dimension does not match trace")
        return bool(_atom_holds(phi, X[t]))
    if isinstance(phi, Not):
        return not _holds(phi.child, X, t)
    if isinstance(phi, And):
        l, r = _holds(phi.left, X, t), _holds(phi.right, X, t)
        return l and r
    if isinstance(phi, Or):
        l, r = _holds(phi.left, X, t), _holds(phi.right, X, t)
        return l or r
    if isinstance(phi, Implies):
        l, r = _holds(phi.left, X, t), _holds(phi.right, X, t)
        return (not l) or r
    if isinstance(phi, Always):
        vals = [_holds(phi.child, X, u) for u in _window(phi, L, t)]
        return all(vals)
    if isinstance(phi, Eventually):
        vals = [_holds(phi.child, X, u) for u in _window(phi, L, t)]
        return any(vals)
    if isinstance(phi, Until):
        window = _window(phi, L, t)
        lefts = [_holds(phi.left, X, u) for u in range(t, window[-1] + 1)]
        rights = [_holds(phi.right, X, u) for u in window]
        return any(r and all(lefts[:u - t + 1]) for u, r in zip(window, rights))
    raise TypeError(f"not a formula: {phi!r}")


def eval_boolean(phi: Formula, trace, t: int = 0) -> bool:
    """Boolean satisfaction of ``phi`` on ``trace`` at step ``t``."""
    X = _states_of(trace)
    if not 0 <= t < X.shape[0]:
        raise IndexError(f"time index {t} outside trace of length {X.shape[0]}")
    return _holds(phi, X, t)


# --------------------------------------------------------------------------
# Splitting


def _conjuncts(phi):
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


def split_conjunctive(phi: Formula) -> SubSpecSet:
    """Split ``always[a,b](c1 and c2 and ...)`` into ``always[a,b](ci)`` parts.

    A bare conjunction splits into its conjuncts; anything else is returned as
    a single part. Order follows left-to-right appearance.
    """
    if isinstance(phi, Always):
        parts = [Always(phi.a, phi.b, c) for c in _conjuncts(phi.child)]
    elif isinstance(phi, And):
        parts = _conjuncts(phi)
    else:
        parts = [phi]
    return SubSpecSet(tuple(parts), phi)
