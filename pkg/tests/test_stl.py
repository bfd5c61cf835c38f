import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import OutOfTrace, naive_rho, random_formula, random_trace
from proxyfalsify.plants import BENCHMARKS, load_plant
from proxyfalsify.stl import (Always, And, Atom, Eventually, FalseF, Implies, Not, Or, ParseError,
                              TrueF, Until, WindowError, eval_boolean, parse_stl, robustness,
                              split_conjunctive, to_text)

VARS = ("x1", "x2")


def A(coeffs, op, c, off=0.0):
    return Atom(tuple(float(v) for v in coeffs), off, op, float(c))


# --- parsing ---------------------------------------------------------------


def test_parse_self_driving_abs_spec():
    phi = parse_stl("always[0,200] (abs(eta) < 90 and abs(d) < 2.0)", ("eta", "d"))
    want = Always(0, 200, And(
        And(A((1, 0), "<", 90), A((1, 0), ">", -90)),
        And(A((0, 1), "<", 2.0), A((0, 1), ">", -2.0))))
    assert phi == want


def test_parse_single_atom():
    assert parse_stl("x1 < 0.05", ("x1",)) == A((1,), "<", 0.05)


def test_parse_affine_and_constants():
    phi = parse_stl("2*x1 - x2 + 0.5 >= pi/2", VARS)
    assert phi == A((2, -1), ">=", math.pi / 2, off=0.5)


def test_parse_precedence():
    p, q, r = (parse_stl(s, VARS) for s in ("x1 < 1", "x2 < 1", "x1 > 0"))
    assert parse_stl("x1 < 1 or x2 < 1 and x1 > 0", VARS) == Or(p, And(q, r))
    assert parse_stl("x1 < 1 -> x2 < 1 or x1 > 0", VARS) == Implies(p, Or(q, r))
    assert parse_stl("(x1 < 1 or x2 < 1) and x1 > 0", VARS) == And(Or(p, q), r)


def test_parse_temporal_forms():
    phi = parse_stl("not (eventually[1,3] (x1 < 1)) and (x1 < 0) until[0,2] (x2 = 1)", VARS)
    assert phi == And(Not(Eventually(1, 3, A((1, 0), "<", 1))),
                      Until(0, 2, A((1, 0), "<", 0), A((0, 1), "=", 1)))


@pytest.mark.parametrize("text, fragment", [
    ("always[0,10] (y < 1)", "unknown variable"),
    ("always[5,2] (x1 < 1)", "interval"),
    ("always[-1,2] (x1 < 1)", None),
    ("always[0,1.5] (x1 < 1)", None),
    ("x1 < ", None),
    ("x1 < 1 and", None),
    ("(x1 < 1", None),
    ("x1 $ 1", None),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as exc:
        parse_stl(text, VARS)
    if fragment:
        assert fragment in str(exc.value)


def test_parse_error_position():
    with pytest.raises(ParseError) as exc:
        parse_stl("always[0,1] (\n  x1 < )", VARS)
    assert exc.value.line == 2


def test_round_trip_random_formulas():
    rng = np.random.default_rng(0)
    for _ in range(200):
        phi = random_formula(rng, 2)
        assert parse_stl(to_text(phi, VARS), VARS) == phi


# --- robustness ------------------------------------------------------------


def test_worked_example_minus_point_two():
    phi = parse_stl("always[0,1] (a < 1.0)", ("a",))
    trace = np.array([[0.5], [1.2]])
    assert robustness(phi, trace) == pytest.approx(-0.2, abs=1e-15)
    assert eval_boolean(phi, trace) is False


def test_negation_example():
    phi = parse_stl("not (a < 1.0)", ("a",))
    assert robustness(phi, np.array([[0.5]])) == -0.5


def test_true_holds_everywhere():
    assert eval_boolean(TrueF(), np.zeros((3, 1)))
    assert robustness(TrueF(), np.zeros((3, 1))) == math.inf
    assert robustness(FalseF(), np.zeros((3, 1))) == -math.inf


def test_equality_never_positive():
    phi = parse_stl("x1 = 1", VARS)
    assert robustness(phi, np.array([[1.0, 0.0]])) == 0.0
    assert robustness(phi, np.array([[1.5, 0.0]])) == -0.5


def test_until_hand_case():
    # x1 stays below 1 until x2 reaches at least 1 (at step 2)
    phi = parse_stl("(x1 < 1) until[0,3] (x2 >= 1)", VARS)
    X = np.array([[0.0, 0.0], [0.5, 0.0], [0.8, 1.5], [2.0, 0.0]])
    # t'=2: min(x2-1=0.5, 1-x1 over steps 0..2 = 0.2) = 0.2
    assert robustness(phi, X) == pytest.approx(0.2)


def test_window_clipping_and_out_of_range():
    phi = parse_stl("always[1,50] (x1 < 3)", VARS)
    X = np.array([[9.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert robustness(phi, X) == 1.0
    with pytest.raises(WindowError):
        robustness(parse_stl("always[3,5] (x1 < 3)", VARS), X)
    with pytest.raises(WindowError):
        eval_boolean(parse_stl("eventually[3,5] (x1 < 3)", VARS), X)


def test_time_index_out_of_range():
    with pytest.raises(IndexError):
        robustness(parse_stl("x1 < 1", VARS), np.zeros((2, 2)), t=2)
    with pytest.raises(ValueError):
        robustness(parse_stl("x1 < 1", VARS), np.zeros((0, 2)))


def test_random_pairs_match_naive_recursion():
    rng = np.random.default_rng(1)
    for _ in range(500):
        phi = random_formula(rng, 2)
        X = random_trace(rng, 2)
        try:
            want = naive_rho(phi, X)
        except OutOfTrace:
            with pytest.raises(WindowError):
                robustness(phi, X)
            continue
        got = robustness(phi, X)
        assert got == pytest.approx(want, abs=1e-9) or got == want
        if got != 0:
            assert eval_boolean(phi, X) == (got > 0)


formulas = st.integers(0, 2 ** 32 - 1).map(lambda s: random_formula(np.random.default_rng(s), 2, 3))
traces = st.integers(0, 2 ** 32 - 1).map(
    lambda s: np.random.default_rng(s).normal(size=(12, 2)))


@settings(max_examples=150, deadline=None)
@given(formulas, formulas, traces)
def test_connective_laws(phi, psi, X):
    try:
        r1, r2 = robustness(phi, X), robustness(psi, X)
    except WindowError:
        return
    assert robustness(Not(phi), X) == -r1
    assert robustness(And(phi, psi), X) == min(r1, r2)
    assert robustness(Or(phi, psi), X) == max(r1, r2)


@settings(max_examples=150, deadline=None)
@given(formulas, traces, st.integers(0, 4), st.integers(0, 6))
def test_eventually_always_duality(phi, X, a, w):
    try:
        ev = robustness(Eventually(a, a + w, phi), X)
    except WindowError:
        return
    assert ev == -robustness(Always(a, a + w, Not(phi)), X)


# --- splitting -------------------------------------------------------------

SUBSPEC_COUNTS = dict(zip(BENCHMARKS, (8, 4, 4, 4, 2, 14, 30, 1)))


@pytest.mark.parametrize("name", BENCHMARKS)
def test_benchmark_subspec_counts(name):
    plant = load_plant(name)
    subs = split_conjunctive(parse_stl(plant.spec, plant.variables))
    assert len(subs) == SUBSPEC_COUNTS[name]
    for s in subs:
        assert isinstance(s, Always) and isinstance(s.child, Atom)


def test_split_order_follows_text():
    phi = parse_stl("always[0,200] (abs(eta) < pi/2 and abs(d) < 2.0)", ("eta", "d"))
    subs = split_conjunctive(phi)
    assert [to_text(s.child, ("eta", "d")) for s in subs] == [
        f"1.0*eta < {math.pi / 2!r}", f"1.0*eta > {-math.pi / 2!r}", "1.0*d < 2.0", "1.0*d > -2.0"]
    assert subs.origin is phi


def test_split_non_conjunctive_is_singleton():
    phi = parse_stl("eventually[0,3] (x1 < 1 or x2 > 2)", VARS)
    assert list(split_conjunctive(phi)) == [phi]
    bare = parse_stl("x1 < 1 and x2 < 1", VARS)
    assert len(split_conjunctive(bare)) == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_split_soundness_random(seed):
    rng = np.random.default_rng(seed)
    parts = [random_formula(rng, 2, 2) for _ in range(int(rng.integers(1, 5)))]
    body = parts[0]
    for p in parts[1:]:
        body = And(body, p)
    phi = Always(0, int(rng.integers(0, 6)), body)
    X = rng.normal(size=(int(rng.integers(6, 12)), 2))
    try:
        want = robustness(phi, X)
    except WindowError:
        return
    assert min(robustness(s, X) for s in split_conjunctive(phi)) == want
