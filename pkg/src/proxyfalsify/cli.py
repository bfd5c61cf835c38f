"""Command-line entry point: ``proxyfalsify <command> ...``.

Exit status is 0 on success, 1 for configuration or usage errors and 2 when a
run fails after its inputs were accepted.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .controllers import SchemaError, load_mlp, load_proxy, save_proxy
from .falsification import run_campaign
from .harness import bench, report
from .plants import load_plant, simulate
from .stl import ParseError
from .synthesis import EsParams, es_synthesize
from .traces import write_trace

CONFIG_ERRORS = (ConfigError, SchemaError, ParseError, FileNotFoundError, json.JSONDecodeError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _ConfigFailure(Exception):
    pass


def _load(fn, *args):
    try:
        return fn(*args)
    except CONFIG_ERRORS as exc:
        raise _ConfigFailure(str(exc)) from None
    except ValueError as exc:
        raise _ConfigFailure(str(exc)) from None


def cmd_synthesize(args):
    plant = _load(load_plant, args.plant)
    ai = _load(load_mlp, args.controller)
    params = _load(lambda: EsParams(seed=args.seed, **({"max_iterations": args.max_iterations}
                                                       if args.max_iterations else {})))
    if (ai.input_dim, ai.output_dim) != (plant.state_dim, plant.control_dim):
        raise _ConfigFailure("controller dimensions do not match the plant")
    hist = []
    proxy = es_synthesize(plant, ai, params, history=hist)
    save_proxy(args.out, proxy)
    print(f"wrote {args.out} after {len(hist)} iterations (last checked distance {hist[-1]:.4g})")


def cmd_simulate(args):
    plant = _load(load_plant, args.plant)
    if (args.controller is None) == (args.proxy is None):
        raise _ConfigFailure("give exactly one of --controller and --proxy")
    ctrl = _load(load_mlp, args.controller) if args.controller else _load(load_proxy, args.proxy)
    try:
        init = np.array([float(v) for v in args.init.split(",")])
    except ValueError:
        raise _ConfigFailure(f"cannot parse --init {args.init!r}") from None
    if init.size != plant.state_dim:
        raise _ConfigFailure(f"--init has {init.size} values, plant has {plant.state_dim} states")
    trace = simulate(plant, ctrl, init, args.horizon)
    write_trace(args.out, trace)
    print(f"wrote {len(trace)} states to {args.out}")


def _campaign_config(args):
    cfg = _load(load_config, args.config)
    if args.stop_on_first:
        cfg = cfg.with_(stop_on_first=True)
    if args.seed is not None:
        cfg = cfg.with_(seed=args.seed)
    return cfg


def cmd_falsify(args):
    cfg = _campaign_config(args)
    out = args.out or cfg.out_dir
    if out is not None:
        summary = bench(cfg, out, repeats=1)
        agg = summary["aggregate"]
        print(f"{int(agg['violations'])} violations, coverage {agg['coverage']:.1f}%, results in {out}")
        return
    run = run_campaign(cfg)
    for v in run.violations:
        print(json.dumps(v.to_dict()))
    print(f"{len(run.violations)} violations in {run.n_trials} trials "
          f"({run.spurious} spurious, {run.errors} errors)")


def cmd_bench(args):
    cfg = _campaign_config(args)
    out = args.out or cfg.out_dir
    if out is None:
        raise _ConfigFailure("bench needs --out or out_dir in the config")
    bench(cfg, out, repeats=args.repeats, log=lambda m: print(m, file=sys.stderr))
    print(report(out))


def cmd_report(args):
    for d in (args.indir, args.baseline):
        if d is not None and not (Path(d) / "summary.json").exists():
            raise _ConfigFailure(f"{d} is not a results directory (no summary.json)")
    print(report(args.indir, args.baseline))


def build_parser():
    p = _Parser(prog="proxyfalsify", description="Proxy-guided falsification of neural controllers.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synthesize", help="fit a linear proxy to a controller")
    s.add_argument("--plant", required=True)
    s.add_argument("--controller", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-iterations", type=int)
    s.set_defaults(func=cmd_synthesize)

    s = sub.add_parser("simulate", help="closed-loop rollout to a CSV trace")
    s.add_argument("--plant", required=True)
    s.add_argument("--controller")
    s.add_argument("--proxy")
    s.add_argument("--init", required=True, help="comma-separated initial state")
    s.add_argument("--horizon", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    for name, fn, text in (("falsify", cmd_falsify, "run one campaign"),
                           ("bench", cmd_bench, "run repeated campaigns")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", required=True)
        s.add_argument("--seed", type=int)
        s.add_argument("--stop-on-first", action="store_true")
        s.add_argument("--out")
        if name == "bench":
            s.add_argument("--repeats", type=int)
        s.set_defaults(func=fn)

    s = sub.add_parser("report", help="metrics table for a results directory")
    s.add_argument("--in", dest="indir", required=True)
    s.add_argument("--baseline")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    if getattr(args, "repeats", None) is not None and args.repeats < 1:
        print("error: --repeats must be at least 1", file=sys.stderr)
        return 1
    try:
        args.func(args)
    except _ConfigFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - any failure after validation is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
