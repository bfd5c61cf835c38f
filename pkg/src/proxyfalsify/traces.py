"""Traces, input boxes and search points, plus the trace CSV format."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Trace:
    """States sampled every ``dt`` seconds; ``states[k]`` is the state at step k.

    ``controls`` optionally holds the (clamped) control applied at each step,
    one row fewer than ``states``.
    """

    states: np.ndarray
    dt: float
    variables: tuple
    controls: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] < 1:
            raise ValueError("a trace needs at least one state vector")
        if len(self.variables) != states.shape[1]:
            raise ValueError(
                f"{len(self.variables)} variable names for {states.shape[1]}-dimensional states")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "variables", tuple(self.variables))

    def __len__(self):
        return self.states.shape[0]

    def column(self, name):
        return self.states[:, self.variables.index(name)]


@dataclass(frozen=True, eq=False)
class BoxDomain:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lower, dtype=float).reshape(-1)
        hi = np.array(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise ValueError("box bounds must be non-empty and of equal length")
        if np.any(lo > hi):
            raise ValueError("box lower bound exceeds upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = np.asarray(pairs, dtype=float)
        return cls(pairs[:, 0], pairs[:, 1])

    @property
    def dim(self):
        return self.lower.size

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, p):
        p = np.asarray(p, dtype=float)
        return p.shape == self.lower.shape and bool(np.all((p >= self.lower) & (p <= self.upper)))

    def to_pairs(self):
        return [[float(a), float(b)] for a, b in zip(self.lower, self.upper)]


def sample_uniform(box: BoxDomain, rng: np.random.Generator) -> np.ndarray:
    """One point drawn uniformly from ``box``."""
    u = rng.random(box.dim)
    p = box.lower + u * box.width
    # guard against rounding pushing a coordinate past the upper bound
    return np.minimum(p, box.upper)


def clip_to_box(p, box: BoxDomain) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != box.lower.shape:
        raise ValueError(f"point of shape {p.shape} does not match box of dimension {box.dim}")
    return np.clip(p, box.lower, box.upper)


def write_trace(path, trace: Trace) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", *trace.variables])
        for k, row in enumerate(trace.states):
            w.writerow(["%.17g" % (k * trace.dt)] + ["%.17g" % v for v in row])


def read_trace(path, dt: Optional[float] = None) -> Trace:
    """Read a trace CSV. ``dt`` defaults to the second timestamp (1.0 for a
    single-row file)."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or rows[0][0].strip() != "t":
        raise TraceFormatError(f"{path}: missing 't,<vars>' header")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise TraceFormatError(f"{path}: header names no state variables")
    body = [r for r in rows[1:] if r]
    if not body:
        raise TraceFormatError(f"{path}: no state rows")
    values = []
    for lineno, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise TraceFormatError(f"{path}:{lineno}: expected {len(header)} fields, got {len(r)}")
        try:
            values.append([float(v) for v in r])
        except ValueError as exc:
            raise TraceFormatError(f"{path}:{lineno}: {exc}") from None
    arr = np.array(values)
    if dt is None:
        dt = float(arr[1, 0]) if len(arr) > 1 else 1.0
    return Trace(arr[:, 1:], dt, tuple(header[1:]))


def as_point(values: Sequence[float], box: Optional[BoxDomain] = None) -> np.ndarray:
    p = np.asarray(values, dtype=float).reshape(-1)
    if box is not None and p.shape != box.lower.shape:
        raise ValueError(f"point has {p.size} coordinates, box has {box.dim}")
    return p
