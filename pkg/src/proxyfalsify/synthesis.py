"""Evolution-strategy synthesis of linear proxy programs for an MLP controller.

Fitness of a candidate coefficient matrix is the negated mean Euclidean
distance between its outputs and the network's outputs along a rollout driven
by the network itself. All population members of one update round are scored
on the same rollout.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .controllers import MlpController, ProxyProgram
from .plants import PlantSpec, SimulationError, simulate
from .traces import sample_uniform


@dataclass(frozen=True)
class EsParams:
    population: int = 50
    max_iterations: int = 100
    time_steps: int = 100
    noise_std: float = 0.1
    learning_rate: float = 0.05
    fitness_threshold: float = 0.1
    rollout_horizon: int = 20
    refine_learning_rate: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if self.population < 2 or self.population % 2:
            raise ValueError("population must be even and at least 2")
        if self.noise_std <= 0:
            raise ValueError("noise_std must be positive")
        if self.learning_rate < 0 or self.refine_learning_rate < 0:
            raise ValueError("learning rates must be non-negative")
        if self.max_iterations < 1 or self.time_steps < 1 or self.rollout_horizon < 1:
            raise ValueError("iteration counts and rollout horizon must be at least 1")

    @classmethod
    def from_dict(cls, d):
        known = cls.__dataclass_fields__
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown ES parameters: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return asdict(self)


def ai_rollout(plant: PlantSpec, ai: MlpController, init, H: int):
    """Visited states s_0..s_{H-1} under the AI controller and its raw outputs there."""
    trace = simulate(plant, ai, init, H)
    states = trace.states[:H]
    outputs = ai.batch(states)
    if not np.all(np.isfinite(outputs)):
        bad = int(np.argmax(~np.all(np.isfinite(outputs), axis=1)))
        raise SimulationError("non-finite controller output", bad)
    return states, outputs


def _augment(states):
    return np.hstack([states, np.ones((states.shape[0], 1))])


def population_distance(thetas, states, targets):
    """Mean per-step L2 distance for a stack of (m, n+1) coefficient matrices."""
    S = _augment(states)
    out = np.einsum("pij,hj->phi", thetas, S)
    return np.linalg.norm(out - targets[None], axis=2).mean(axis=1)


def rollout_distance(plant: PlantSpec, ai: MlpController, proxy: ProxyProgram, init, H: int) -> float:
    if H < 1:
        raise ValueError("H must be at least 1")
    states, targets = ai_rollout(plant, ai, init, H)
    return float(population_distance(proxy.theta[None], states, targets)[0])


def mirrored_noise(rng: np.random.Generator, population: int, size: int) -> np.ndarray:
    half = rng.standard_normal((population // 2, size))
    return np.concatenate([half, -half])


def standardize(R):
    """Zero-mean, unit-variance copy of R, or None when every entry ties."""
    std = R.std()
    if not std > 0:
        return None
    return (R - R.mean()) / std


def es_step(theta, noise, states, targets, sigma, lr):
    """One ES update; returns (new theta, standardized fitness or None if skipped)."""
    P = noise.shape[0]
    cands = theta[None] + sigma * noise.reshape((P,) + theta.shape)
    R = -population_distance(cands, states, targets)
    if not np.all(np.isfinite(R)):
        raise FloatingPointError("non-finite fitness")
    Z = standardize(R)
    if Z is None:
        return theta, None
    grad = (noise * Z[:, None]).sum(axis=0).reshape(theta.shape)
    return theta + lr / (P * sigma) * grad, Z


def es_synthesize(plant: PlantSpec, ai: MlpController, params: EsParams = EsParams(),
                  theta0=None, history: Optional[list] = None) -> ProxyProgram:
    """Fit a linear proxy to ``ai`` by mirrored-sampling ES.

    Each outer iteration first checks the current proxy on a fresh random
    rollout and stops if its distance is within ``fitness_threshold``; it then
    draws one mirrored noise batch and performs ``time_steps`` updates, each on
    a new random rollout. Checked distances are appended to ``history``.
    """
    if ai.input_dim != plant.state_dim or ai.output_dim != plant.control_dim:
        raise ValueError("controller dimensions do not match the plant")
    rng = np.random.default_rng(params.seed)
    shape = (plant.control_dim, plant.state_dim + 1)
    if theta0 is None:
        theta = 0.1 * rng.standard_normal(shape)
    else:
        theta = np.array(theta0, dtype=float).reshape(shape)
    H = params.rollout_horizon
    for _ in range(params.max_iterations):
        states, targets = ai_rollout(plant, ai, sample_uniform(plant.init_box, rng), H)
        d = float(population_distance(theta[None], states, targets)[0])
        if history is not None:
            history.append(d)
        if d <= params.fitness_threshold:
            break
        noise = mirrored_noise(rng, params.population, theta.size)
        for _ in range(params.time_steps):
            states, targets = ai_rollout(plant, ai, sample_uniform(plant.init_box, rng), H)
            theta, _ = es_step(theta, noise, states, targets, params.noise_std, params.learning_rate)
    return ProxyProgram(theta)


def refine(plant: PlantSpec, ai: MlpController, proxy: ProxyProgram, spurious,
           params: EsParams = EsParams(), learning_rate: Optional[float] = None,
           seed: Optional[int] = None) -> ProxyProgram:
    """One round of ES updates whose rollouts all start at ``spurious``.

    Uses ``params.refine_learning_rate`` unless ``learning_rate`` is given.
    """
    lr = params.refine_learning_rate if learning_rate is None else learning_rate
    rng = np.random.default_rng(params.seed if seed is None else seed)
    theta = np.array(proxy.theta, dtype=float)
    noise = mirrored_noise(rng, params.population, theta.size)
    # the plant is deterministic, so every round sees the same rollout
    states, targets = ai_rollout(plant, ai, spurious, params.rollout_horizon)
    for _ in range(params.time_steps):
        theta, _ = es_step(theta, noise, states, targets, params.noise_std, lr)
    return ProxyProgram(theta)


def evaluate_alignment(plant: PlantSpec, ai: MlpController, proxy: ProxyProgram, init, H: int = 1000) -> float:
    """Mean absolute error between min-max normalised AI and proxy outputs
    along an H-step rollout of the AI-controlled plant."""
    if H < 1:
        raise ValueError("H must be at least 1")
    states, y_ai = ai_rollout(plant, ai, init, H)
    y_px = proxy.batch(states)
    errs = np.zeros_like(y_ai)
    for ch in range(y_ai.shape[1]):
        lo = min(y_ai[:, ch].min(), y_px[:, ch].min())
        hi = max(y_ai[:, ch].max(), y_px[:, ch].max())
        if hi > lo:
            errs[:, ch] = np.abs(y_ai[:, ch] - y_px[:, ch]) / (hi - lo)
    return float(errs.mean())
