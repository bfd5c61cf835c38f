"""Simulated-annealing falsification, epsilon-greedy sub-spec sampling and the
campaign loop that checks proxy violations against the real controller."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .controllers import MlpController, ProxyProgram
from .plants import PlantSpec, SimulationError, simulate
from .stl import WindowError, parse_stl, robustness, split_conjunctive
from .synthesis import EsParams, es_synthesize, refine
from .traces import BoxDomain, clip_to_box, sample_uniform

LEDGER_SOURCES = ("proxy", "real")


@dataclass(frozen=True)
class SaParams:
    max_iterations: int = 100
    t0: float = 1.0
    cooling: float = 0.95
    perturb_scale: float = 0.1

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if not 0 < self.cooling < 1:
            raise ValueError("cooling must lie in (0, 1)")
        if self.perturb_scale < 0:
            raise ValueError("perturb_scale must be non-negative")

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown SA parameters: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True)
class Budget:
    kind: str = "trials"
    limit: float = 50

    def __post_init__(self):
        if self.kind not in ("trials", "wall_time"):
            raise ValueError(f"budget kind must be 'trials' or 'wall_time', not {self.kind!r}")
        if not self.limit > 0:
            raise ValueError("budget limit must be positive")


class SubSpecLedger:
    """Lowest robustness seen, falsified flag and attempt count per sub-spec."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("a ledger needs at least one sub-spec")
        self.lowest = np.full(n, np.inf)
        self.falsified = np.zeros(n, dtype=bool)
        self.attempts = np.zeros(n, dtype=int)

    def __len__(self):
        return self.lowest.size

    def record(self, i: int, rob: float):
        if rob < self.lowest[i]:
            self.lowest[i] = rob

    def to_dict(self):
        return {
            "lowest": [None if math.isinf(v) else float(v) for v in self.lowest],
            "falsified": self.falsified.tolist(),
            "attempts": self.attempts.tolist(),
        }


@dataclass
class ViolationRecord:
    subspec: int
    point: list
    robustness: float
    robustness_vector: list
    trial: int
    elapsed: float = 0.0

    def to_dict(self, with_time=True):
        d = {
            "subspec": self.subspec,
            "point": [float(v) for v in self.point],
            "robustness": float(self.robustness),
            "robustness_vector": [float(v) for v in self.robustness_vector],
            "trial": self.trial,
        }
        if with_time:
            d["elapsed"] = self.elapsed
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(d["subspec"], list(d["point"]), d["robustness"], list(d["robustness_vector"]),
                   d["trial"], d.get("elapsed", 0.0))


@dataclass
class TrialResult:
    falsified: bool
    point: np.ndarray
    robustness: float
    simulations: int
    stopped: bool = False


def perturb(p, box: BoxDomain, scale: float, rng: np.random.Generator) -> np.ndarray:
    """Gaussian step with per-dimension std ``scale * width``, clipped to the box."""
    p = np.asarray(p, dtype=float)
    return clip_to_box(p + rng.standard_normal(box.dim) * (scale * box.width), box)


def sa_search(objective: Callable, box: BoxDomain, params: SaParams, rng: np.random.Generator,
              should_stop: Optional[Callable] = None, on_step: Optional[Callable] = None) -> TrialResult:
    """One annealing trial minimising ``objective`` over ``box``.

    Returns as soon as a point with negative objective is found. ``should_stop``
    is polled before every iteration; ``on_step(delta, accepted)`` observes
    each move.
    """
    s = sample_uniform(box, rng)
    rs = objective(s)
    sims = 1
    if rs < 0:
        return TrialResult(True, s, rs, sims)
    best, best_r = s, rs
    T = params.t0
    for _ in range(params.max_iterations):
        if should_stop is not None and should_stop():
            return TrialResult(False, best, best_r, sims, stopped=True)
        cand = perturb(s, box, params.perturb_scale, rng)
        rc = objective(cand)
        sims += 1
        if rc < 0:
            return TrialResult(True, cand, rc, sims)
        if rc < best_r:
            best, best_r = cand, rc
        delta = rc - rs
        # the uniform draw is skipped for improving moves
        accepted = delta < 0 or rng.random() < math.exp(-delta / T)
        if on_step is not None:
            on_step(delta, accepted)
        if accepted:
            s, rs = cand, rc
        T *= params.cooling
    return TrialResult(False, best, best_r, sims)


@dataclass
class System:
    plant: PlantSpec
    controller: Callable
    horizon: Optional[int] = None


def system_objective(system: System, phi, timer: Optional[dict] = None) -> Callable:
    """Closed-loop robustness of ``phi`` as a function of the initial state."""
    def f(init):
        trace = simulate(system.plant, system.controller, init, system.horizon, timer=timer)
        return robustness(phi, trace)
    return f


def sa_trial(system: System, phi, box: BoxDomain, params: SaParams, rng: np.random.Generator,
             should_stop=None, on_step=None) -> TrialResult:
    return sa_search(system_objective(system, phi), box, params, rng, should_stop, on_step)


def sample_subspec(ledger: SubSpecLedger, epsilon: float, rng: np.random.Generator) -> int:
    """Uniform index with probability ``epsilon``, otherwise the lowest-robustness one."""
    if not 0 <= epsilon <= 1:
        raise ValueError("epsilon must lie in [0, 1]")
    if rng.random() < epsilon:
        return int(rng.integers(len(ledger)))
    return int(np.argmin(ledger.lowest))


# --------------------------------------------------------------------------
# Campaign


@dataclass
class CampaignRun:
    seed: int
    n_subspecs: int
    violations: list = field(default_factory=list)
    trials: list = field(default_factory=list)
    ledger: Optional[SubSpecLedger] = None
    timings: dict = field(default_factory=dict)
    spurious: int = 0
    refinements: int = 0
    errors: int = 0
    proxy: Optional[ProxyProgram] = None

    @property
    def n_trials(self):
        return len(self.trials)

    @property
    def found(self):
        return bool(self.violations)

    @property
    def time_to_first(self):
        return self.violations[0].elapsed if self.violations else None


def _stream(*key):
    return np.random.default_rng([int(k) for k in key])


def run_campaign(cfg, seed: Optional[int] = None, proxy: Optional[ProxyProgram] = None,
                 log: Optional[Callable] = None) -> CampaignRun:
    """Falsify ``cfg.spec`` on ``cfg.plant`` controlled by ``cfg.controller``.

    ``cfg`` is any object with the CampaignConfig attributes (plant, controller,
    spec, budget, sa, es, epsilon, seed, stop_on_first, ledger_source and
    optionally proxy). The search runs on the proxy-controlled plant; proxy
    violations are replayed on the real controller and either recorded or
    answered with one refinement. ``log(info, ledger)`` is called after each
    trial.
    """
    seed = cfg.seed if seed is None else seed
    plant: PlantSpec = cfg.plant
    ai: MlpController = cfg.controller
    ledger_source = getattr(cfg, "ledger_source", "proxy")
    if ledger_source not in LEDGER_SOURCES:
        raise ValueError(f"ledger_source must be one of {LEDGER_SOURCES}")
    if ai.input_dim != plant.state_dim or ai.output_dim != plant.control_dim:
        raise ValueError("controller dimensions do not match the plant")
    phi = cfg.spec if not isinstance(cfg.spec, str) else parse_stl(cfg.spec, plant.variables)
    subs = split_conjunctive(phi)
    es: EsParams = cfg.es
    budget: Budget = cfg.budget
    box = plant.init_box

    t_start = time.perf_counter()
    timer = {"synthesis": 0.0, "refinement": 0.0, "proxy": 0.0, "ai": 0.0, "plant": 0.0}
    proxy = proxy if proxy is not None else getattr(cfg, "proxy", None)
    if proxy is None:
        t0 = time.perf_counter()
        es_seeded = EsParams(**{**es.to_dict(), "seed": seed})
        proxy = es_synthesize(plant, ai, es_seeded)
        timer["synthesis"] += time.perf_counter() - t0
    if proxy.state_dim != plant.state_dim or proxy.control_dim != plant.control_dim:
        raise ValueError("proxy dimensions do not match the plant")

    run = CampaignRun(seed=seed, n_subspecs=len(subs), ledger=SubSpecLedger(len(subs)))
    ledger = run.ledger
    pick_rng = _stream(seed, 0)

    def rollout(controller, init, kind):
        sub = {}
        trace = simulate(plant, controller, init, timer=sub)
        timer[kind] += sub["controller"]
        timer["plant"] += sub["plant"]
        return trace

    def over_time():
        return budget.kind == "wall_time" and time.perf_counter() - t_start >= budget.limit

    trial = 0
    while True:
        if budget.kind == "trials" and trial >= budget.limit:
            break
        if over_time():
            break
        i = sample_subspec(ledger, cfg.epsilon, pick_rng)
        ledger.attempts[i] += 1
        info = {"trial": trial, "subspec": i}
        rng = _stream(seed, trial + 1)
        try:
            res = sa_search(lambda p: robustness(subs[i], rollout(proxy, p, "proxy")),
                            box, cfg.sa, rng, should_stop=over_time)
            info.update(proxy_robustness=float(res.robustness), simulations=res.simulations,
                        proxy_falsified=res.falsified)
            real = None
            if res.falsified or ledger_source == "real":
                trace = rollout(ai, res.point, "ai")
                real = np.array([robustness(s, trace) for s in subs])
            ledger.record(i, res.robustness if ledger_source == "proxy" else real[i])
            if res.falsified:
                if real[i] < 0:
                    rec = ViolationRecord(i, res.point.tolist(), float(real[i]), real.tolist(), trial,
                                          time.perf_counter() - t_start)
                    run.violations.append(rec)
                    ledger.falsified |= real < 0
                    info["outcome"] = "violation"
                else:
                    run.spurious += 1
                    t0 = time.perf_counter()
                    proxy = refine(plant, ai, proxy, res.point, es, seed=[seed, trial + 1, 1])
                    timer["refinement"] += time.perf_counter() - t0
                    run.refinements += 1
                    info["outcome"] = "spurious"
            else:
                info["outcome"] = "stopped" if res.stopped else "none"
        except (SimulationError, WindowError, FloatingPointError) as exc:
            run.errors += 1
            info.update(outcome="error", error=str(exc))
        run.trials.append(info)
        if log is not None:
            log(info, ledger)
        trial += 1
        if cfg.stop_on_first and run.violations:
            break

    total = time.perf_counter() - t_start
    timer["algorithm"] = max(0.0, total - sum(timer.values()))
    timer["total"] = total
    run.timings = timer
    run.proxy = proxy
    return run
