"""Discrete-time benchmark plants, all integrated with explicit Euler.

Each plant lives in a JSON fixture under ``data/plants``. Linear plants carry
continuous-time ``A`` and ``B`` matrices (``x' = A x + B u``); the pendulum,
cart-pole and self-driving plants carry named constants in ``params``.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .traces import BoxDomain, Trace

BENCHMARKS = (
    "cartpole", "pendulum", "quadcopter", "self_driving",
    "lane_keeping", "platoon4", "platoon8", "oscillator",
)


class SimulationError(RuntimeError):
    def __init__(self, message, step=None):
        super().__init__(message if step is None else f"{message} at step {step}")
        self.step = step


def _pendulum(x, u, p, dt):
    eta, omega = x
    acc = p["g"] / p["l"] * math.sin(eta) + u[0] / (p["m"] * p["l"] ** 2)
    return np.array([eta + dt * omega, omega + dt * acc])


def _cartpole(x, u, p, dt):
    delta, v1, eta, v2 = x
    total = p["cart_mass"] + p["pole_mass"]
    pml = p["pole_mass"] * p["half_length"]
    cos, sin = math.cos(eta), math.sin(eta)
    tmp = (u[0] + pml * v2 * v2 * sin) / total
    eta_acc = (p["g"] * sin - cos * tmp) / (
        p["half_length"] * (4.0 / 3.0 - p["pole_mass"] * cos * cos / total))
    x_acc = tmp - pml * eta_acc * cos / total
    return np.array([delta + dt * v1, v1 + dt * x_acc, eta + dt * v2, v2 + dt * eta_acc])


def _self_driving(x, u, p, dt):
    eta, d = x
    return np.array([eta + dt * u[0], d + dt * p["speed"] * math.sin(eta)])


_NONLINEAR = {"pendulum": _pendulum, "cartpole": _cartpole, "self_driving": _self_driving}


@dataclass(frozen=True, eq=False)
class PlantSpec:
    name: str
    state_dim: int
    control_dim: int
    dt: float
    horizon: int
    init_box: BoxDomain
    control_bounds: np.ndarray
    variables: tuple
    spec: str = ""
    params: dict = field(default_factory=dict)
    A: Optional[np.ndarray] = None
    B: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.variables) != self.state_dim:
            raise ValueError(f"{self.name}: {len(self.variables)} variables for state_dim {self.state_dim}")
        if self.init_box.dim != self.state_dim:
            raise ValueError(f"{self.name}: init_box dimension != state_dim")
        cb = np.asarray(self.control_bounds, dtype=float).reshape(self.control_dim, 2)
        if np.any(cb[:, 0] > cb[:, 1]):
            raise ValueError(f"{self.name}: control lower bound exceeds upper bound")
        object.__setattr__(self, "control_bounds", cb)
        if self.A is not None:
            A = np.asarray(self.A, dtype=float)
            B = np.asarray(self.B, dtype=float)
            if A.shape != (self.state_dim, self.state_dim) or B.shape != (self.state_dim, self.control_dim):
                raise ValueError(f"{self.name}: A/B shapes do not match dimensions")
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "B", B)
        elif self.name not in _NONLINEAR:
            raise ValueError(f"{self.name}: no dynamics (need A/B matrices or a known nonlinear plant)")
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def is_linear(self):
        return self.A is not None

    def clamp(self, u):
        return np.clip(u, self.control_bounds[:, 0], self.control_bounds[:, 1])

    def _advance(self, x, u):
        if self.A is not None:
            return x + self.dt * (self.A @ x + self.B @ u)
        return _NONLINEAR[self.name](x, u, self.params, self.dt)

    def step(self, state, control):
        return step(self, state, control)


def step(plant: PlantSpec, state, control) -> np.ndarray:
    """Next state after one ``dt`` with ``control`` clamped to the plant's bounds."""
    x = np.asarray(state, dtype=float)
    u = np.asarray(control, dtype=float).reshape(-1)
    if x.shape != (plant.state_dim,):
        raise ValueError(f"state has shape {x.shape}, expected ({plant.state_dim},)")
    if u.shape != (plant.control_dim,):
        raise ValueError(f"control has shape {u.shape}, expected ({plant.control_dim},)")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(u))):
        raise SimulationError("non-finite state or control")
    return plant._advance(x, plant.clamp(u))


def simulate(plant: PlantSpec, controller: Callable, init, horizon: Optional[int] = None,
             timer: Optional[dict] = None) -> Trace:
    """Closed-loop rollout of ``horizon`` steps (``horizon + 1`` states).

    If ``timer`` is given, seconds spent in the controller and in the plant are
    added to ``timer['controller']`` and ``timer['plant']``.
    """
    horizon = plant.horizon if horizon is None else int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    x = np.asarray(init, dtype=float).reshape(-1)
    if x.shape != (plant.state_dim,):
        raise ValueError(f"initial state has {x.size} coordinates, plant has {plant.state_dim}")
    if not np.all(np.isfinite(x)):
        raise SimulationError("non-finite initial state", 0)
    states = np.empty((horizon + 1, plant.state_dim))
    controls = np.empty((horizon, plant.control_dim))
    states[0] = x
    t_ctrl = t_plant = 0.0
    clock = time.perf_counter
    lo, hi = plant.control_bounds[:, 0], plant.control_bounds[:, 1]
    # overflow is detected explicitly below, so silence numpy's warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(horizon):
            t0 = clock()
            u = np.asarray(controller(x), dtype=float).reshape(-1)
            t1 = clock()
            if u.shape != (plant.control_dim,):
                raise ValueError(f"controller returned {u.size} outputs, plant expects {plant.control_dim}")
            u = np.minimum(np.maximum(u, lo), hi)
            if not np.all(np.isfinite(u)):
                raise SimulationError("non-finite control", k)
            x = plant._advance(x, u)
            t2 = clock()
            if not np.all(np.isfinite(x)):
                raise SimulationError("non-finite state", k + 1)
            controls[k] = u
            states[k + 1] = x
            t_ctrl += t1 - t0
            t_plant += t2 - t1
    if timer is not None:
        timer["controller"] = timer.get("controller", 0.0) + t_ctrl
        timer["plant"] = timer.get("plant", 0.0) + t_plant
    return Trace(states, plant.dt, plant.variables, controls)


# --------------------------------------------------------------------------
# Fixture I/O


def plant_from_dict(d: dict) -> PlantSpec:
    try:
        return PlantSpec(
            name=d["name"],
            state_dim=int(d["state_dim"]),
            control_dim=int(d["control_dim"]),
            dt=float(d["dt"]),
            horizon=int(d["horizon"]),
            init_box=BoxDomain.from_pairs(d["init_box"]),
            control_bounds=np.asarray(d["control_bounds"], dtype=float),
            variables=tuple(d["variables"]),
            spec=d.get("spec", ""),
            params=dict(d.get("params", {})),
            A=d.get("A"),
            B=d.get("B"),
        )
    except KeyError as exc:
        raise ValueError(f"plant fixture missing field {exc}") from None


def plant_to_dict(plant: PlantSpec) -> dict:
    d = {
        "name": plant.name,
        "state_dim": plant.state_dim,
        "control_dim": plant.control_dim,
        "dt": plant.dt,
        "horizon": plant.horizon,
        "init_box": plant.init_box.to_pairs(),
        "control_bounds": plant.control_bounds.tolist(),
        "variables": list(plant.variables),
        "spec": plant.spec,
    }
    if plant.params:
        d["params"] = dict(plant.params)
    if plant.A is not None:
        d["A"] = plant.A.tolist()
        d["B"] = plant.B.tolist()
    return d


def load_plant(name_or_path) -> PlantSpec:
    """Load a plant by benchmark name (e.g. ``"pendulum"``) or fixture path."""
    path = Path(name_or_path)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise FileNotFoundError(f"plant fixture not found: {path}")
        with path.open() as fh:
            return plant_from_dict(json.load(fh))
    res = resources.files("proxyfalsify") / "data" / "plants" / f"{name_or_path}.json"
    if not res.is_file():
        raise FileNotFoundError(f"unknown plant {name_or_path!r}; known: {', '.join(BENCHMARKS)}")
    return plant_from_dict(json.loads(res.read_text()))
