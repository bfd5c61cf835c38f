"""Campaign configuration files.

Relative paths inside a config file are resolved against the file's own
directory. Everything is loaded and checked up front so that a bad config
fails before the first trial.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .controllers import MlpController, ProxyProgram, SchemaError, load_mlp, load_proxy
from .falsification import LEDGER_SOURCES, Budget, SaParams
from .plants import PlantSpec, load_plant
from .stl import ParseError, parse_stl
from .synthesis import EsParams

KEYS = {
    "plant", "controller", "spec", "spec_path", "budget", "sa", "es", "epsilon", "repeats",
    "seed", "out_dir", "stop_on_first", "proxy_path", "ledger_source",
}


class ConfigError(ValueError):
    pass


@dataclass
class CampaignConfig:
    plant: PlantSpec
    controller: MlpController
    spec: str
    budget: Budget = field(default_factory=Budget)
    sa: SaParams = field(default_factory=SaParams)
    es: EsParams = field(default_factory=EsParams)
    epsilon: float = 0.9
    repeats: int = 1
    seed: int = 0
    out_dir: Optional[Path] = None
    stop_on_first: bool = False
    proxy: Optional[ProxyProgram] = None
    ledger_source: str = "proxy"
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.ledger_source not in LEDGER_SOURCES:
            raise ConfigError(f"ledger_source must be one of {LEDGER_SOURCES}")
        if self.controller.input_dim != self.plant.state_dim or self.controller.output_dim != self.plant.control_dim:
            raise ConfigError(
                f"controller maps {self.controller.input_dim} -> {self.controller.output_dim} but plant "
                f"{self.plant.name} has {self.plant.state_dim} states and {self.plant.control_dim} controls")
        if self.proxy is not None and (self.proxy.state_dim, self.proxy.control_dim) != (
                self.plant.state_dim, self.plant.control_dim):
            raise ConfigError("proxy dimensions do not match the plant")
        try:
            parse_stl(self.spec, self.plant.variables)
        except ParseError as exc:
            raise ConfigError(f"bad spec: {exc}") from None

    def with_(self, **kw):
        return replace(self, **kw)


def _path(base: Path, value) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base / p


def _load_plant(base, ref):
    cand = _path(base, ref)
    try:
        return load_plant(cand if cand.exists() else ref)
    except (FileNotFoundError, ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"plant {ref!r}: {exc}") from None


def _load_controller(base, ref):
    cand = _path(base, ref)
    try:
        return load_mlp(cand if cand.exists() else ref)
    except (FileNotFoundError, SchemaError) as exc:
        raise ConfigError(f"controller {ref!r}: {exc}") from None


def config_from_dict(d: dict, base_dir=".") -> CampaignConfig:
    base = Path(base_dir)
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(d) - KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("plant", "controller"):
        if key not in d:
            raise ConfigError(f"config is missing {key!r}")
    plant = _load_plant(base, d["plant"])
    controller = _load_controller(base, d["controller"])
    if "spec" in d and "spec_path" in d:
        raise ConfigError("give either spec or spec_path, not both")
    if "spec_path" in d:
        try:
            spec = _path(base, d["spec_path"]).read_text().strip()
        except OSError as exc:
            raise ConfigError(f"spec_path: {exc}") from None
    else:
        spec = d.get("spec") or plant.spec
    if not spec:
        raise ConfigError("no spec given and the plant has no default spec")
    proxy = None
    if d.get("proxy_path"):
        try:
            proxy = load_proxy(_path(base, d["proxy_path"]))
        except (OSError, SchemaError) as exc:
            raise ConfigError(f"proxy_path: {exc}") from None
    try:
        budget = Budget(**d.get("budget", {}))
        sa = SaParams.from_dict(d.get("sa", {}))
        es = EsParams.from_dict(d.get("es", {}))
        out_dir = _path(base, d["out_dir"]) if d.get("out_dir") else None
        return CampaignConfig(
            plant=plant, controller=controller, spec=spec, budget=budget, sa=sa, es=es,
            epsilon=float(d.get("epsilon", 0.9)), repeats=int(d.get("repeats", 1)),
            seed=int(d.get("seed", 0)), out_dir=out_dir, stop_on_first=bool(d.get("stop_on_first", False)),
            proxy=proxy, ledger_source=d.get("ledger_source", "proxy"), raw=dict(d))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> CampaignConfig:
    path = Path(path)
    try:
        d = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(d, path.parent)
