"""Neural (MLP) controllers, linear proxy programs, and their JSON files."""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

ACTIVATIONS = {
    "relu": lambda z: np.maximum(z, 0.0),
    "tanh": np.tanh,
    "linear": lambda z: z,
}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Layer:
    w: np.ndarray
    b: np.ndarray
    activation: str = "relu"

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise SchemaError(f"layer weight {w.shape} and bias {b.shape} do not fit")
        if self.activation not in ACTIVATIONS:
            raise SchemaError(f"unknown activation {self.activation!r}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise SchemaError("non-finite layer parameters")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", b)


class MlpController:
    """Feed-forward network; each layer computes ``act(w @ h + b)`` and the
    final output is multiplied element-wise by ``output_scale``."""

    def __init__(self, layers: Sequence[Layer], output_scale=None):
        layers = tuple(layers)
        if not layers:
            raise SchemaError("an MLP needs at least one layer")
        for k in range(1, len(layers)):
            if layers[k].w.shape[1] != layers[k - 1].w.shape[0]:
                raise SchemaError(
                    f"layer {k} expects {layers[k].w.shape[1]} inputs but layer {k - 1} "
                    f"produces {layers[k - 1].w.shape[0]}")
        self.layers = layers
        self.input_dim = layers[0].w.shape[1]
        self.output_dim = layers[-1].w.shape[0]
        scale = np.ones(self.output_dim) if output_scale is None else np.array(output_scale, dtype=float).reshape(-1)
        if scale.shape != (self.output_dim,):
            raise SchemaError("output_scale length does not match output dimension")
        scale.setflags(write=False)
        self.output_scale = scale
        self._ops = [(l.w, l.b, ACTIVATIONS[l.activation]) for l in layers]

    @property
    def hidden_sizes(self):
        return [l.w.shape[0] for l in self.layers[:-1]]

    def __call__(self, x):
        h = x
        for w, b, act in self._ops:
            h = act(w @ h + b)
        return h * self.output_scale

    def batch(self, X):
        """Outputs for a (k, input_dim) batch of states."""
        H = np.asarray(X, dtype=float)
        for w, b, act in self._ops:
            H = act(H @ w.T + b)
        return H * self.output_scale


def mlp_forward(c: MlpController, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (c.input_dim,):
        raise ValueError(f"state has {x.size} entries, controller expects {c.input_dim}")
    y = c(x)
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("controller produced a non-finite output")
    return y


class ProxyProgram:
    """Linear program ``y_i = sum_j theta[i, j] x_j + theta[i, n]``."""

    def __init__(self, theta):
        theta = np.array(theta, dtype=float)
        if theta.ndim != 2 or theta.shape[1] < 2:
            raise SchemaError(f"theta must be m x (n+1), got shape {theta.shape}")
        if not np.all(np.isfinite(theta)):
            raise SchemaError("non-finite proxy coefficients")
        theta.setflags(write=False)
        self.theta = theta
        self.control_dim, self.state_dim = theta.shape[0], theta.shape[1] - 1
        self._w = theta[:, :-1]
        self._b = theta[:, -1]

    def __call__(self, x):
        return self._w @ x + self._b

    def batch(self, X):
        return np.asarray(X, dtype=float) @ self._w.T + self._b


def proxy_forward(p: ProxyProgram, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (p.state_dim,):
        raise ValueError(f"state has {x.size} entries, proxy expects {p.state_dim}")
    return p(x)


def embed_linear_as_mlp(K, b, layer_sizes: Sequence[int], output_activation="linear",
                        output_scale=None) -> MlpController:
    """ReLU network with the given hidden sizes computing ``K x + b`` exactly.

    Every hidden layer carries ``relu(x)`` and ``relu(-x)`` in its first 2n
    units; the rest are zero. With ``output_activation="tanh"`` the network
    computes ``scale * tanh((K x + b) / scale)`` instead.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    m, n = K.shape
    b = np.asarray(b, dtype=float).reshape(m)
    sizes = list(layer_sizes)
    if not sizes:
        raise ValueError("need at least one hidden layer")
    for s in sizes:
        if s < 2 * n:
            raise ValueError(f"hidden layer of size {s} cannot host a {n}-input identity (needs {2 * n})")
    scale = np.ones(m) if output_scale is None else np.broadcast_to(
        np.asarray(output_scale, dtype=float), (m,)).copy()
    eye = np.eye(n)
    w1 = np.zeros((sizes[0], n))
    w1[:n] = eye
    w1[n:2 * n] = -eye
    layers = [Layer(w1, np.zeros(sizes[0]), "relu")]
    for prev, s in zip(sizes, sizes[1:]):
        w = np.zeros((s, prev))
        w[:2 * n, :2 * n] = np.eye(2 * n)
        layers.append(Layer(w, np.zeros(s), "relu"))
    wo = np.zeros((m, sizes[-1]))
    if output_activation == "linear":
        wo[:, :n], wo[:, n:2 * n], bo = K, -K, b
    else:
        wo[:, :n], wo[:, n:2 * n], bo = K / scale[:, None], -K / scale[:, None], b / scale
    layers.append(Layer(wo, bo, output_activation))
    return MlpController(layers, scale)


# --------------------------------------------------------------------------
# Files


def mlp_to_dict(c: MlpController) -> dict:
    return {
        "input_dim": c.input_dim,
        "output_dim": c.output_dim,
        "output_scale": c.output_scale.tolist(),
        "layers": [{"w": l.w.tolist(), "b": l.b.tolist(), "activation": l.activation} for l in c.layers],
    }


def mlp_from_dict(d: dict) -> MlpController:
    try:
        layers = [Layer(l["w"], l["b"], l.get("activation", "relu")) for l in d["layers"]]
        c = MlpController(layers, d.get("output_scale"))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed weight file: {exc}") from None
    if "input_dim" in d and int(d["input_dim"]) != c.input_dim:
        raise SchemaError(f"input_dim {d['input_dim']} disagrees with first layer ({c.input_dim})")
    if "output_dim" in d and int(d["output_dim"]) != c.output_dim:
        raise SchemaError(f"output_dim {d['output_dim']} disagrees with last layer ({c.output_dim})")
    return c


def _resolve(path, kind):
    p = Path(path)
    if p.exists():
        return p.read_text()
    res = resources.files("proxyfalsify") / "data" / kind / Path(str(path)).name
    for cand in (res, res.with_name(res.name + ".json")):
        if cand.is_file():
            return cand.read_text()
    raise FileNotFoundError(f"no such file: {path}")


def save_mlp(path, c: MlpController) -> None:
    Path(path).write_text(json.dumps(mlp_to_dict(c)))


def load_mlp(path) -> MlpController:
    """Load weights from ``path``; bare names fall back to the bundled fixtures."""
    try:
        d = json.loads(_resolve(path, "controllers"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from None
    return mlp_from_dict(d)


def save_proxy(path, p: ProxyProgram) -> None:
    d = {"state_dim": p.state_dim, "control_dim": p.control_dim, "theta": p.theta.tolist()}
    Path(path).write_text(json.dumps(d, indent=1))


def load_proxy(path) -> ProxyProgram:
    try:
        d = json.loads(Path(path).read_text())
        p = ProxyProgram(d["theta"])
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"malformed proxy file {path}: {exc}") from None
    if int(d.get("state_dim", p.state_dim)) != p.state_dim or int(d.get("control_dim", p.control_dim)) != p.control_dim:
        raise SchemaError("proxy dimensions disagree with theta shape")
    return p
