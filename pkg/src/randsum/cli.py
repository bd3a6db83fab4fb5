"""Command line entry point ``randsum``.

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, metrics, nvm
from .config import ConfigError, preset_config, scenario_from_config

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class UsageError(ValueError):
    pass


def _load_scenario(ref: str, seed: int | None = None):
    if ref.startswith("preset:"):
        cfg = preset_config(ref.split(":", 1)[1])
    else:
        try:
            cfg = json.loads(Path(ref).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read scenario {ref}: {exc.strerror or exc}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"scenario {ref} is not valid JSON: {exc}") from None
    if seed is not None:
        cfg["seed"] = seed
    return scenario_from_config(cfg)


def _workers(arg: int | None) -> int:
    env = os.environ.get("RANDSUM_WORKERS")
    if env is not None:
        try:
            val = int(env)
        except ValueError:
            raise UsageError(f"RANDSUM_WORKERS must be an integer, got {env!r}") from None
    else:
        val = arg if arg is not None else 1
    if val < 1:
        raise UsageError("worker count must be at least 1")
    return val


def _read_column(path: str) -> metrics.EmpiricalDistribution:
    try:
        data = np.loadtxt(path, delimiter=",", ndmin=1, comments="#")
    except OSError as exc:
        raise UsageError(f"cannot read sample {path}: {exc.strerror or exc}") from None
    except ValueError:
        # tolerate a single header line
        try:
            data = np.loadtxt(path, delimiter=",", ndmin=1, skiprows=1)
        except ValueError as exc:
            raise UsageError(f"sample {path} is not a single numeric column: {exc}") from None
    if data.ndim != 1 or data.size == 0:
        raise UsageError(f"sample {path} must be a nonempty single column")
    return metrics.EmpiricalDistribution.from_sample(data)


def _levy_operand(ref: str):
    if ref.startswith("mixture:"):
        source = ref.split(":", 1)[1]
        try:
            text = Path(source).read_text() if not source.lstrip().startswith("{") else source
            cfg = json.loads(text)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load mixture config {source!r}: {exc}") from None
        try:
            return nvm.from_config(cfg).cdf_handle()
        except (ValueError, TypeError) as exc:
            raise ConfigError("mixture", str(exc)) from None
    return _read_column(ref)


def cmd_run(args) -> int:
    s = _load_scenario(args.scenario, args.seed)
    report = harness.run_scenario(s, workers=_workers(args.workers), timings=args.timings)
    harness.emit(report, args.format, args.out)
    return EXIT_OK


def cmd_preset(args) -> int:
    sys.stdout.write(json.dumps(preset_config(args.name), indent=2) + "\n")
    return EXIT_OK


def cmd_cf_gap(args) -> int:
    s = _load_scenario(args.scenario)
    rows = harness.cf_gap_rows(s)
    sys.stdout.write(harness.table_csv(
        rows, ["n", "T", "lemma1_gap", "coherency_gap", "grid_points", "seconds"]))
    return EXIT_OK


def cmd_check_conditions(args) -> int:
    s = _load_scenario(args.scenario)
    rows = harness.condition_rows(s)
    sys.stdout.write(harness.table_csv(
        rows, ["n", "eps", "lindeberg", "lyapunov", "gf_bound", "method"]))
    return EXIT_OK


def cmd_levy(args) -> int:
    a = _levy_operand(args.a)
    b = _levy_operand(args.b)
    print(format(metrics.levy(a, b), ".12g"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="randsum",
                                description="Limit theorems for random sums: simulation and checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a scenario and write a convergence report")
    r.add_argument("scenario", help="scenario JSON file, or preset:<name>")
    r.add_argument("--out", default="-", help="report path (default stdout)")
    r.add_argument("--format", choices=["csv", "json"], default="csv")
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--timings", action="store_true",
                   help="record wall-clock seconds per row (reports stop being byte-stable)")
    r.set_defaults(func=cmd_run)

    pr = sub.add_parser("preset", help="print a preset scenario as JSON")
    pr.add_argument("name")
    pr.set_defaults(func=cmd_preset)

    g = sub.add_parser("cf-gap", help="exact CF gaps over the n grid and T sweep (CSV)")
    g.add_argument("scenario")
    g.set_defaults(func=cmd_cf_gap)

    c = sub.add_parser("check-conditions", help="random Lindeberg / Lyapunov values (CSV)")
    c.add_argument("scenario")
    c.set_defaults(func=cmd_check_conditions)

    lv = sub.add_parser("levy", help="Levy distance between two samples or a sample and a mixture")
    lv.add_argument("--a", required=True, help="single-column CSV of draws")
    lv.add_argument("--b", required=True, help="CSV of draws, or mixture:<json file or inline JSON>")
    lv.set_defaults(func=cmd_levy)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"randsum: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - any failure past validation is a runtime error
        print(f"randsum: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
