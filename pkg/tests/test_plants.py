import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from proxyfalsify.plants import (BENCHMARKS, PlantSpec, SimulationError, load_plant,
                                 plant_from_dict, plant_to_dict, simulate, step)
from proxyfalsify.traces import BoxDomain


@pytest.mark.parametrize("name", BENCHMARKS)
def test_fixtures_load_and_round_trip(name):
    p = load_plant(name)
    q = plant_from_dict(plant_to_dict(p))
    assert (q.name, q.state_dim, q.control_dim, q.dt, q.horizon) == (
        p.name, p.state_dim, p.control_dim, p.dt, p.horizon)
    assert str(p.horizon) in p.spec


def test_table_horizons():
    horizons = {n: load_plant(n).horizon for n in BENCHMARKS}
    assert horizons == {"cartpole": 200, "pendulum": 200, "quadcopter": 300, "self_driving": 200,
                        "lane_keeping": 300, "platoon4": 200, "platoon8": 200, "oscillator": 300}


def test_platoon_equilibrium():
    p = load_plant("platoon4")
    assert np.array_equal(step(p, np.zeros(p.state_dim), np.zeros(p.control_dim)),
                          np.zeros(p.state_dim))


def test_pendulum_upright_equilibrium():
    p = load_plant("pendulum")
    assert np.array_equal(step(p, [0.0, 0.0], [0.0]), [0.0, 0.0])


def test_oscillator_matches_matrix_power():
    p = load_plant("oscillator")
    x0 = np.random.default_rng(0).normal(size=p.state_dim)
    M = np.eye(p.state_dim) + p.dt * np.asarray(p.A)
    x = x0
    for _ in range(50):
        x = step(p, x, np.zeros(p.control_dim))
    assert np.allclose(x, np.linalg.matrix_power(M, 50) @ x0, atol=1e-9, rtol=0)


def test_self_driving_hand_rollout():
    p = load_plant("self_driving")
    tr = simulate(p, lambda x: np.zeros(1), [0.1, 0.0], horizon=3)
    d = 0.0
    for k in range(1, 4):
        d += p.dt * 2.0 * math.sin(0.1)
        assert tr.states[k, 1] == pytest.approx(d, abs=1e-12)
        assert tr.states[k, 1] > tr.states[k - 1, 1]


def test_simulate_length_and_determinism():
    p = load_plant("cartpole")
    ctrl = lambda x: np.array([-(10 * x[2] + 2 * x[3])])  # noqa: E731
    a = simulate(p, ctrl, [0.01, 0, 0.02, 0], horizon=1)
    assert len(a) == 2
    b1 = simulate(p, ctrl, [0.01, 0, 0.02, 0])
    b2 = simulate(p, ctrl, [0.01, 0, 0.02, 0])
    assert len(b1) == p.horizon + 1
    assert b1.states.tobytes() == b2.states.tobytes()


@settings(max_examples=50, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_applied_control_is_clamped(gain, bias):
    p = load_plant("pendulum")
    tr = simulate(p, lambda x: np.array([gain * x[0] + bias]), [0.1, -0.1], horizon=20)
    assert np.all(tr.controls >= -15.0) and np.all(tr.controls <= 15.0)


@settings(max_examples=50)
@given(st.sampled_from(["platoon4", "platoon8", "oscillator"]), st.floats(-5, 5),
       st.integers(0, 2 ** 32 - 1))
def test_linear_superposition(name, a, seed):
    p = load_plant(name)
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(2, p.state_dim))
    u = np.zeros(p.control_dim)
    assert np.allclose(step(p, a * x, u), a * step(p, x, u), atol=1e-12, rtol=1e-12)
    assert np.allclose(step(p, x + y, u), step(p, x, u) + step(p, y, u), atol=1e-12, rtol=1e-12)


def test_step_input_errors():
    p = load_plant("pendulum")
    with pytest.raises(ValueError):
        step(p, [0.0], [0.0])
    with pytest.raises(ValueError):
        step(p, [0.0, 0.0], [0.0, 1.0])
    with pytest.raises(SimulationError):
        step(p, [math.nan, 0.0], [0.0])


def test_simulate_rejects_wrong_controller_width():
    p = load_plant("pendulum")
    with pytest.raises(ValueError):
        simulate(p, lambda x: np.zeros(2), [0.0, 0.0], horizon=3)


def test_divergence_reports_step():
    p = PlantSpec("blowup", 1, 1, 1.0, 10, BoxDomain([1.0], [1.0]), [[-1, 1]], ("x",),
                  A=[[1e200]], B=[[0.0]])
    with pytest.raises(SimulationError) as exc:
        simulate(p, lambda x: np.zeros(1), [1.0])
    assert exc.value.step is not None


def test_timer_accumulates():
    p = load_plant("pendulum")
    timer = {}
    simulate(p, lambda x: np.zeros(1), [0.1, 0.0], timer=timer)
    assert timer["controller"] >= 0 and timer["plant"] > 0


def test_unknown_plant():
    with pytest.raises(FileNotFoundError):
        load_plant("submarine")
