"""Scenario runner and convergence reports."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cf_engine, conditions, metrics, scheme as sc
from .config import Scenario
from .index_laws import TruncationError

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "mean_index", "levy", "weak2d", "coherency_gap", "lemma1_gap",
               "lindeberg_0.05", "lyapunov", "seconds", "seed"]

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["scenario", "rows"],
    "additionalProperties": False,
    "properties": {
        "scenario": {"type": "string"},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "mean_index", "levy", "ks", "weak2d", "coherency_gap",
                             "lemma1_gap", "lindeberg", "lyapunov", "seconds", "seed",
                             "error"],
                "additionalProperties": False,
                "properties": {
                    "n": {"type": "integer", "minimum": 1},
                    "mean_index": {"type": ["number", "null"]},
                    "levy": {"type": ["number", "null"], "minimum": 0, "maximum": 2},
                    "ks": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "weak2d": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "coherency_gap": {"type": ["number", "null"], "minimum": 0, "maximum": 2},
                    "lemma1_gap": {"type": ["number", "null"], "minimum": 0, "maximum": 2},
                    "lindeberg": {
                        "type": "object",
                        "additionalProperties": {"type": ["number", "null"],
                                                 "minimum": 0, "maximum": 1},
                    },
                    "lyapunov": {"type": ["number", "null"], "minimum": 0},
                    "seconds": {"type": "number", "minimum": 0},
                    "seed": {"type": "integer", "minimum": 0},
                    "error": {"type": ["string", "null"]},
                },
            },
        },
    },
}

RECOVERABLE = (TruncationError, cf_engine.WorkCapError, RuntimeError, MemoryError)


@dataclass
class ReportRow:
    n: int
    mean_index: float = math.nan
    levy: float = math.nan
    ks: float = math.nan
    weak2d: float = math.nan
    coherency_gap: float = math.nan
    lemma1_gap: float = math.nan
    lindeberg: dict = field(default_factory=dict)
    lyapunov: float = math.nan
    seconds: float = 0.0
    seed: int = 0
    error: str | None = None


@dataclass
class ConvergenceReport:
    scenario: str
    rows: list


def _note(row: ReportRow, exc: Exception) -> None:
    msg = f"{type(exc).__name__}: {exc}"
    row.error = msg if row.error is None else f"{row.error}; {msg}"
    logger.warning("row n=%d: %s", row.n, msg)


def run_row(s: Scenario, n: int, workers: int = 1, timings: bool = False) -> ReportRow:
    """Every monitored quantity at row ``n``; failures annotate the row."""
    start = time.perf_counter()
    row = ReportRow(n=n, seed=s.seed)
    scheme = s.scheme
    try:
        r = scheme.row(n)
        row.mean_index = r.mean_index
        sample = sc.simulate_sample(scheme, n, s.replicates, s.seed, workers)
        target = s.limit.cdf_handle()
        row.levy = metrics.levy(sample, target)
        row.ks = metrics.ks(sample, target)
        pairs = sc.simulate_uv(scheme, n, s.replicates, s.seed, workers)
        row.weak2d = metrics.weak2d(pairs, metrics.PairLaw(s.limit.pair_joint_cdf))
    except RECOVERABLE as exc:
        _note(row, exc)
    try:
        row.lemma1_gap = cf_engine.lemma1_gap(scheme, n, s.T)
        row.coherency_gap = cf_engine.coherency_gap(scheme, n, s.T)
    except RECOVERABLE as exc:
        _note(row, exc)
    try:
        row.lindeberg = {eps: conditions.random_lindeberg(scheme, n, eps) for eps in s.eps_sweep}
        row.lyapunov = conditions.random_lyapunov(scheme, n)
    except RECOVERABLE as exc:
        _note(row, exc)
    if timings:
        row.seconds = time.perf_counter() - start
    return row


def run_scenario(s: Scenario, workers: int = 1, timings: bool = False) -> ConvergenceReport:
    """One report row per ``n`` in the grid, in grid order.

    Output is a function of the scenario alone (timings aside): each row owns
    its random streams, so ``workers`` only changes wall-clock time.
    """
    if workers > 1 and len(s.n_grid) > 1:
        inner = max(1, workers // len(s.n_grid))
        with ThreadPoolExecutor(max_workers=min(workers, len(s.n_grid))) as pool:
            rows = list(pool.map(lambda n: run_row(s, n, inner, timings), s.n_grid))
    else:
        rows = [run_row(s, n, workers, timings) for n in s.n_grid]
    return ConvergenceReport(s.name, rows)


# ----------------------------------------------------------------------------
# serialization


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".12g")


def _round(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float(format(float(x), ".12g"))


def _eps_key(eps: float) -> str:
    return format(float(eps), "g")


def to_csv(report: ConvergenceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.rows:
        lind = next((v for k, v in r.lindeberg.items() if float(k) == 0.05), math.nan)
        w.writerow([r.n, _fmt(r.mean_index), _fmt(r.levy), _fmt(r.weak2d),
                    _fmt(r.coherency_gap), _fmt(r.lemma1_gap), _fmt(lind), _fmt(r.lyapunov),
                    _fmt(r.seconds), r.seed])
    return buf.getvalue()


def to_json(report: ConvergenceReport) -> str:
    doc = {
        "scenario": report.scenario,
        "rows": [
            {
                "n": r.n,
                "mean_index": _round(r.mean_index),
                "levy": _round(r.levy),
                "ks": _round(r.ks),
                "weak2d": _round(r.weak2d),
                "coherency_gap": _round(r.coherency_gap),
                "lemma1_gap": _round(r.lemma1_gap),
                "lindeberg": {_eps_key(k): _round(v) for k, v in sorted(r.lindeberg.items(),
                                                                        key=lambda kv: float(kv[0]))},
                "lyapunov": _round(r.lyapunov),
                "seconds": _round(r.seconds),
                "seed": r.seed,
                "error": r.error,
            }
            for r in report.rows
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _num(text: str) -> float:
    return float(text)


def from_csv(text: str, scenario: str = "") -> ConvergenceReport:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {header}")
    rows = []
    for rec in reader:
        v = dict(zip(header, rec))
        lind = _num(v["lindeberg_0.05"])
        rows.append(ReportRow(
            n=int(v["n"]), mean_index=_num(v["mean_index"]), levy=_num(v["levy"]),
            weak2d=_num(v["weak2d"]), coherency_gap=_num(v["coherency_gap"]),
            lemma1_gap=_num(v["lemma1_gap"]),
            lindeberg={} if math.isnan(lind) else {0.05: lind},
            lyapunov=_num(v["lyapunov"]), seconds=_num(v["seconds"]), seed=int(v["seed"])))
    return ConvergenceReport(scenario, rows)


def from_json(text: str) -> ConvergenceReport:
    doc = json.loads(text)
    nan = lambda x: math.nan if x is None else float(x)
    rows = [ReportRow(
        n=r["n"], mean_index=nan(r["mean_index"]), levy=nan(r["levy"]), ks=nan(r["ks"]),
        weak2d=nan(r["weak2d"]), coherency_gap=nan(r["coherency_gap"]),
        lemma1_gap=nan(r["lemma1_gap"]),
        lindeberg={float(k): nan(v) for k, v in r["lindeberg"].items()},
        lyapunov=nan(r["lyapunov"]), seconds=float(r["seconds"]), seed=r["seed"],
        error=r["error"]) for r in doc["rows"]]
    return ConvergenceReport(doc["scenario"], rows)


def emit(report: ConvergenceReport, fmt: str, path) -> None:
    """Write ``report`` as ``csv`` or ``json``; ``path`` of ``-`` means stdout."""
    if fmt == "csv":
        text = to_csv(report)
    elif fmt == "json":
        text = to_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if str(path) == "-":
        import sys
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc.strerror or exc}") from exc


def read(path, fmt: str | None = None) -> ConvergenceReport:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise OSError(f"cannot read report from {path}: {exc.strerror or exc}") from exc
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    return from_json(text) if fmt == "json" else from_csv(text)


# ----------------------------------------------------------------------------
# table builders for the cf-gap and check-conditions subcommands


def cf_gap_rows(s: Scenario) -> list:
    out = []
    for n in s.n_grid:
        for T in s.T_sweep:
            start = time.perf_counter()
            lem = cf_engine.lemma1_gap_detail(s.scheme, n, T)
            coh = cf_engine.coherency_gap_detail(s.scheme, n, T)
            out.append({"n": n, "T": T, "lemma1_gap": lem.value, "coherency_gap": coh.value,
                        "grid_points": lem.grid_points,
                        "seconds": time.perf_counter() - start})
    return out


def condition_rows(s: Scenario) -> list:
    out = []
    for n in s.n_grid:
        rep = conditions.check(s.scheme, n, s.eps_sweep)
        for eps, val in rep.lindeberg.items():
            out.append({"n": n, "eps": eps, "lindeberg": val, "lyapunov": rep.lyapunov,
                        "gf_bound": rep.gf_bound, "method": rep.method})
    return out


def table_csv(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([r[c] if isinstance(r[c], (int, str)) else _fmt(r[c]) for c in columns])
    return buf.getvalue()
