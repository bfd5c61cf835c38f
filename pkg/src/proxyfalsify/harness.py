"""Repeated campaigns, their result files, and metric reports.

A results directory holds
  violations.jsonl  one genuine violation per line (no wall-clock fields, so
                    a fixed seed reproduces the file byte for byte)
  trials.jsonl      one line per SA trial
  ledger.json       final sub-spec ledger of each repeat
  summary.json      per-repeat metrics, phase timings and the aggregate
Every metric except the timings is recomputed from the two jsonl files.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import CampaignConfig
from .falsification import run_campaign
from .stats import a12, a12_label, coverage, mann_whitney_u, success_rate

METRICS = ("success_rate", "coverage", "violations", "found")


def _dumps(obj):
    return json.dumps(obj, sort_keys=True)


def bench(cfg: CampaignConfig, out_dir, repeats: Optional[int] = None, seed: Optional[int] = None,
          log: Optional[Callable] = None) -> dict:
    """Run ``repeats`` independent campaigns (seeds seed, seed+1, ...) and write results."""
    repeats = cfg.repeats if repeats is None else repeats
    seed = cfg.seed if seed is None else seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_repeat, ledgers = [], []
    with open(out / "violations.jsonl", "w") as fv, open(out / "trials.jsonl", "w") as ft:
        for r in range(repeats):
            run = run_campaign(cfg, seed=seed + r)
            for v in run.violations:
                fv.write(_dumps({"repeat": r, **v.to_dict(with_time=False)}) + "\n")
            for t in run.trials:
                ft.write(_dumps({"repeat": r, **t}) + "\n")
            ledgers.append({"repeat": r, **run.ledger.to_dict()})
            per_repeat.append({
                "repeat": r,
                "seed": seed + r,
                "n_subspecs": run.n_subspecs,
                "trials": run.n_trials,
                "spurious": run.spurious,
                "refinements": run.refinements,
                "errors": run.errors,
                "time_to_first": run.time_to_first,
                "timings": run.timings,
            })
            if log is not None:
                log(f"repeat {r}: {len(run.violations)} violations in {run.n_trials} trials")
    (out / "ledger.json").write_text(json.dumps(ledgers, indent=1))
    summary = {
        "plant": cfg.plant.name,
        "spec": cfg.spec,
        "epsilon": cfg.epsilon,
        "budget": {"kind": cfg.budget.kind, "limit": cfg.budget.limit},
        "repeats": per_repeat,
    }
    metrics = repeat_metrics(out, per_repeat)
    summary["metrics"] = metrics
    summary["aggregate"] = aggregate(metrics)
    (out / "summary.json").write_text(json.dumps(summary, indent=1))
    return summary


def _read_jsonl(path):
    path = Path(path)
    if not path.exists():
        return []
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def repeat_metrics(out_dir, repeats_info=None) -> list:
    """Per-repeat metrics derived from the raw jsonl records."""
    out = Path(out_dir)
    if repeats_info is None:
        repeats_info = json.loads((out / "summary.json").read_text())["repeats"]
    viol = _read_jsonl(out / "violations.jsonl")
    trials = _read_jsonl(out / "trials.jsonl")
    rows = []
    for info in repeats_info:
        r = info["repeat"]
        vs = [v for v in viol if v["repeat"] == r]
        ts = [t for t in trials if t["repeat"] == r]
        n_trials = max(len(ts), 1)
        rows.append({
            "repeat": r,
            "success_rate": success_rate([t.get("outcome") == "violation" for t in ts], n_trials),
            "coverage": coverage(vs, info["n_subspecs"]),
            "violations": len(vs),
            "found": 1.0 if vs else 0.0,
            "time_to_first": info.get("time_to_first"),
        })
    return rows


def aggregate(metrics: list) -> dict:
    agg = {}
    for m in METRICS:
        vals = [row[m] for row in metrics]
        agg[m] = float(np.mean(vals)) if vals else 0.0
    firsts = [row["time_to_first"] for row in metrics if row["time_to_first"] is not None]
    agg["time_to_first"] = float(np.mean(firsts)) if firsts else None
    return agg


def report(in_dir, baseline_dir=None) -> str:
    """Metric table for a results directory, plus U-test p and A12 against a baseline."""
    metrics = repeat_metrics(in_dir)
    agg = aggregate(metrics)
    lines = [f"results: {in_dir} ({len(metrics)} repeats)"]
    if baseline_dir is None:
        lines.append(f"{'metric':<16}{'mean':>12}")
        for m in METRICS:
            lines.append(f"{m:<16}{agg[m]:>12.4g}")
        ttf = agg["time_to_first"]
        lines.append(f"{'time_to_first':<16}{'-' if ttf is None else format(ttf, '.4g'):>12}")
        return "\n".join(lines)
    base = repeat_metrics(baseline_dir)
    bagg = aggregate(base)
    lines.append(f"baseline: {baseline_dir} ({len(base)} repeats)")
    lines.append(f"{'metric':<16}{'ours':>10}{'baseline':>10}{'p':>9}{'A12':>7}  effect")
    for m in METRICS:
        xs = [row[m] for row in metrics]
        ys = [row[m] for row in base]
        _, p = mann_whitney_u(xs, ys)
        a = a12(xs, ys)
        lines.append(f"{m:<16}{agg[m]:>10.4g}{bagg[m]:>10.4g}{p:>9.4f}{a:>7.3f}  {a12_label(a)}")
    return "\n".join(lines)
