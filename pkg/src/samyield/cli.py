"""Command-line front end.

    samyield check  design.sam
    samyield sens   design.sam --scheme central --rel-step 1e-6
    samyield mc     design.sam --samples 100000 --seed 42 [--threads 8]
    samyield wcd    design.sam [--method linear|relinearized] [--oracle]
    samyield sweep  design.sam --x w:80e-6:120e-6:41 --y l:250e-6:350e-6:41

Results go to stdout (or ``--out``) as JSON (``{schema, command, input,
seed?, result}``) or CSV.  Exit codes: 0 success, 2 usage error, 3 design
file error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import secrets
import sys
from dataclasses import dataclass, field
from typing import Optional

from .devices import DeviceError
from .montecarlo import MonteCarloError, run_monte_carlo
from .netlist import NetlistParseError, load
from .sensitivity import DEFAULT_REL_STEP, SensitivityError, jacobian
from .sweep import Axis, SweepError, run_sweep
from .worstcase import WorstCaseError, analyze, grid_error, wcd_brute_oracle

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4

COMMANDS = ("check", "sens", "mc", "wcd", "sweep")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input_path: str
    output_format: str = "json"
    output_path: Optional[str] = None
    threads: int = 1
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _count(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value.is_integer() or value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text!r}")
    return int(value)


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _open_unit(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {text!r}")
    return value


def _rel_step(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < value <= 0.1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 0.1], got {text!r}")
    return value


def _positive(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text!r}")
    return value


def _axis(text):
    try:
        ax = Axis.parse(text)
    except SweepError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if ax.n < 2 or not ax.lo < ax.hi:
        raise argparse.ArgumentTypeError(f"axis needs n >= 2 and min < max, got {text!r}")
    return ax


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("input", help="design file (.sam)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--threads", type=_count, default=1)

    parser = _Parser(prog="samyield", description="statistical yield analysis of parametric designs")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("check", parents=[common], help="validate a design and evaluate it at nominal")

    p = sub.add_parser("sens", parents=[common], help="sensitivity Jacobian at nominal")
    p.add_argument("--scheme", choices=("central", "forward", "analytic"), default="central")
    p.add_argument("--rel-step", type=_rel_step, default=DEFAULT_REL_STEP)

    p = sub.add_parser("mc", parents=[common], help="Monte Carlo yield")
    p.add_argument("--samples", type=_count, default=100_000)
    p.add_argument("--seed", type=_seed, default=None)
    p.add_argument("--level", type=_open_unit, default=0.95, help="confidence level of the Wilson interval")

    p = sub.add_parser("wcd", parents=[common], help="worst-case distance per spec")
    p.add_argument("--method", choices=("linear", "relinearized"), default="relinearized")
    p.add_argument("--max-iter", type=_count, default=50)
    p.add_argument("--tol", type=_positive, default=1e-9)
    p.add_argument("--oracle", action="store_true", help="also run the brute-force grid oracle")
    p.add_argument("--grid-points", type=_count, default=501)
    p.add_argument("--grid-radius", type=_positive, default=5.0)

    p = sub.add_parser("sweep", parents=[common], help="2-D design-space sweep")
    p.add_argument("--x", type=_axis, required=True, help="name:min:max:n")
    p.add_argument("--y", type=_axis, required=True, help="name:min:max:n")
    return parser


def parse_args(argv) -> RunConfig:
    """Validate ``argv`` into a :class:`RunConfig`; raises :class:`UsageError`."""
    ns = build_parser().parse_args(list(argv))
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "input", "format", "out", "threads")}
    if ns.command == "wcd" and ns.oracle and ns.grid_points < 11:
        raise UsageError("--grid-points must be >= 11")
    if ns.command == "sweep" and ns.x.name == ns.y.name:
        raise UsageError("--x and --y must name different parameters")
    return RunConfig(ns.command, ns.input, ns.format, ns.out, ns.threads, opts)


# -- commands ----------------------------------------------------------------


def _check(problem, cfg):
    nominal = problem.evaluate()
    return {
        "device": problem.device,
        "options": dict(problem.options),
        "parameters": [
            {"name": p.name, "nominal": p.nominal, "dist": p.dist.kind, "std": p.dist.std}
            for p in problem.parameters
        ],
        "bindings": dict(problem.bindings),
        "metrics": list(problem.metrics),
        "specs": [s.label for s in problem.specs],
        "nominal_metrics": nominal,
        "nominal_passes": [bool(s.holds(nominal[s.metric])) for s in problem.specs],
    }


def _sens(problem, cfg):
    return jacobian(problem, cfg.options["scheme"], cfg.options["rel_step"]).to_dict()


def _mc(problem, cfg):
    o = cfg.options
    res = run_monte_carlo(problem, o["samples"], o["seed"], threads=cfg.threads, retain=False)
    return res.to_dict(level=o["level"])


def _wcd(problem, cfg):
    o = cfg.options
    summary = analyze(problem, o["method"], o["max_iter"], o["tol"])
    out = summary.to_dict()
    if o["oracle"]:
        d = len(problem.statistical)
        err = grid_error(o["grid_radius"], o["grid_points"], d)
        for spec, entry in zip(problem.specs, out["specs"]):
            entry["oracle_beta"] = wcd_brute_oracle(problem, spec, o["grid_radius"], o["grid_points"])
            entry["oracle_grid_error"] = err
    return out


def _sweep(problem, cfg):
    return run_sweep(problem, cfg.options["x"], cfg.options["y"], threads=cfg.threads)


_RUNNERS = {"check": _check, "sens": _sens, "mc": _mc, "wcd": _wcd, "sweep": _sweep}


def _flatten(prefix, value, rows):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, rows)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}.{i}", v, rows)
    else:
        rows.append((prefix, repr(value) if isinstance(value, float) else value))


def render(cfg: RunConfig, result, seed=None) -> str:
    if cfg.command == "sweep" and cfg.output_format == "csv":
        return result.to_csv()
    if cfg.command == "sweep":
        result = result.to_dict()
    doc = {"schema": SCHEMA_VERSION, "command": cfg.command, "input": cfg.input_path}
    if seed is not None:
        doc["seed"] = seed
    doc["result"] = result
    if cfg.output_format == "json":
        return json.dumps(doc, indent=2) + "\n"
    rows = []
    _flatten("", doc, rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["field", "value"])
    w.writerows(rows)
    return buf.getvalue()


def execute(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        problem = load(cfg.input_path)
    except OSError as exc:
        print(f"samyield: error: cannot read {cfg.input_path}: {exc.strerror or exc}", file=stderr)
        return EXIT_USAGE
    except NetlistParseError as exc:
        print(f"samyield: error: {cfg.input_path}:{exc.line}:{exc.column}: {exc.reason}", file=stderr)
        return EXIT_PARSE

    seed = None
    if cfg.command == "mc":
        if cfg.options.get("seed") is None:
            cfg.options["seed"] = secrets.randbits(64)
        seed = cfg.options["seed"]
    if cfg.command == "wcd" and cfg.options.get("oracle") and len(problem.statistical) > 3:
        print("samyield: error: --oracle supports at most 3 statistical parameters", file=stderr)
        return EXIT_USAGE
    try:
        result = _RUNNERS[cfg.command](problem, cfg)
    except (MonteCarloError, SweepError) as exc:
        print(f"samyield: error: {exc}", file=stderr)
        return EXIT_USAGE
    except (WorstCaseError, SensitivityError, DeviceError) as exc:
        print(f"samyield: numerical failure: {exc}", file=stderr)
        return EXIT_NUMERIC

    text = render(cfg, result, seed)
    if cfg.output_path:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"samyield: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
