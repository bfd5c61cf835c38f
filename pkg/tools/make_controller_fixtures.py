"""Regenerate the controller fixtures in src/proxyfalsify/data/controllers.

The ``*_linear`` networks compute a stabilising linear feedback exactly.
The ``*_weak`` networks are tanh-saturated, lightly damped controllers that
overshoot the safety bounds from part of the initial box; ``--check`` runs a
grid scan to confirm that violating initial states exist.
"""
import argparse
import json
from pathlib import Path

import numpy as np

from proxyfalsify.controllers import embed_linear_as_mlp, mlp_to_dict
from proxyfalsify.plants import load_plant, simulate
from proxyfalsify.stl import parse_stl, robustness

OUT = Path(__file__).resolve().parents[1] / "src" / "proxyfalsify" / "data" / "controllers"

SIZES = {"pendulum": [280, 240, 200], "self_driving": [300, 250, 200]}

# name: (plant, K, b, output activation, output scale)
FIXTURES = {
    "pendulum_linear": ("pendulum", [[-15.0, -4.0]], [0.5], "linear", None),
    "self_driving_linear": ("self_driving", [[-1.0, -8.0]], [0.0], "linear", None),
    "pendulum_weak": ("pendulum", [[-40.0, -1.0]], [0.0], "tanh", 15.0),
    "self_driving_weak": ("self_driving", [[-0.5, -2.0]], [1.6], "tanh", 10.0),
}


def build(name):
    plant, K, b, act, scale = FIXTURES[name]
    return embed_linear_as_mlp(K, b, SIZES[plant], act, scale)


def grid_scan(name, n=21):
    """Count violating initial states on an n x n grid over the plant's box."""
    plant = load_plant(FIXTURES[name][0])
    ai = build(name)
    phi = parse_stl(plant.spec, plant.variables)
    lo, w = plant.init_box.lower, plant.init_box.width
    g = np.linspace(0.0, 1.0, n)
    robs = [robustness(phi, simulate(plant, ai, lo + np.array([a, c]) * w)) for a in g for c in g]
    return sum(r < 0 for r in robs), len(robs)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    OUT.mkdir(parents=True, exist_ok=True)
    for name in FIXTURES:
        (OUT / f"{name}.json").write_text(json.dumps(mlp_to_dict(build(name)), separators=(",", ":")))
        if args.check and name.endswith("_weak"):
            bad, total = grid_scan(name)
            print(f"{name}: {bad}/{total} grid inits violate")


if __name__ == "__main__":
    main()
