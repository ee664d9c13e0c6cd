"""Command-line harness: seeded runs, figure sweeps, the bound-verification
suite, and cooling experiments, with all outputs persisted under --out.

Exit codes: 0 success, 1 configuration error (bad flags or config file),
2 runtime failure (including failed verification checks). Every output
directory gets a `manifest` echoing the resolved config, seeds, and code
version, so results are reproducible byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import (
    ConfigError,
    flatten_echo,
    load_cooling_config,
    load_run_config,
    load_sweep_spec,
)
from .dilation import cooling_echo, cooling_run
from .engine import config_echo, run
from .sweeps import (
    DIFFERENCE_COLUMNS,
    SUMMARY_COLUMNS,
    parallel_map,
    sweep_fig2,
    sweep_fig3,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that reports usage errors as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(f"{message}\n{self.format_usage()}")


def build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="raqprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "adaptive state-preparation trials from a config file"),
        ("sweep", "figure-style aggregate sweeps (fig2 / fig3a / fig3b / fig3_insets)"),
        ("verify", "run every bound and identity check; nonzero exit on failure"),
        ("cool", "mixed-state cooling trials on a dilated register"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, default=None, help="config file path")
        p.add_argument("--seed", type=int, default=None, help="override the master seed")
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--format", choices=("csv", "jsonl", "both"), default="both")
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--parallel", type=int, default=1,
                       help="worker processes (RAQ_PREP_THREADS overrides)")
    return parser


def _resolve_workers(args) -> int:
    env = os.environ.get("RAQ_PREP_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"RAQ_PREP_THREADS must be an integer, got {env!r}") from exc
    return max(1, args.parallel)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in columns])


def write_jsonl(path: Path, dicts: Sequence[dict]) -> None:
    with open(path, "w") as fh:
        for d in dicts:
            fh.write(json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n")


def write_manifest(out_dir: Path, command: str, echo: dict, args) -> None:
    lines = [
        "[invocation]",
        f"command = {command}",
        f"version = {__version__}",
        f"format = {args.format}",
        f"parallel = {_resolve_workers(args)}",
        "",
        "[config]",
    ]
    lines.extend(flatten_echo(echo))
    (out_dir / "manifest").write_text("\n".join(lines) + "\n")


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.trials is not None:
        cfg = replace(cfg, trials=args.trials)
    return cfg


def _final_merit_rows(name: str, cfg, traces, run_name: str) -> list:
    merits = [t.final_alpha if t.final_alpha is not None else t.final_fidelity
              for t in traces]
    merits = [m for m in merits if m is not None]
    mean = sum(merits) / len(merits) if merits else float("nan")
    if len(merits) > 1:
        var = sum((m - mean) ** 2 for m in merits) / (len(merits) - 1)
        se = math.sqrt(var / len(merits))
    else:
        se = 0.0
    strategy = getattr(cfg, "strategy").kind
    pool_size = len(cfg.strategy.pool) if cfg.strategy.kind == "pool" else None
    n = getattr(cfg, "n_qubits", None)
    if n is None:
        n = cfg.n_system + cfg.n_ancilla
    return [{
        "sweep_name": f"{name}:{run_name}",
        "strategy": strategy,
        "n": n,
        "M_checkpoint": cfg.max_steps,
        "pool_size": pool_size,
        "mean_alpha": mean,
        "stderr_alpha": se,
        "trials": cfg.trials,
        "seed": cfg.seed,
    }]


def _run_trials(cfg, worker, workers: int) -> list:
    payloads = list(range(cfg.trials))
    return parallel_map(worker, payloads, workers)


def _run_worker(payload):
    cfg, trial, record_steps = payload
    return run(cfg, trial=trial, record_steps=record_steps)


def _cool_worker(payload):
    cfg, trial = payload
    return cooling_run(cfg, trial=trial)


def cmd_run(args) -> int:
    cfg, run_name = load_run_config(args.config)
    cfg = _apply_overrides(cfg, args)
    workers = _resolve_workers(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    want_records = args.format in ("jsonl", "both")
    traces = parallel_map(_run_worker,
                          [(cfg, t, want_records) for t in range(cfg.trials)], workers)
    if args.format in ("jsonl", "both"):
        write_jsonl(out / "trace.jsonl",
                    [r.to_json_dict() for t in traces for r in t.records])
    if args.format in ("csv", "both"):
        write_csv(out / "summary.csv", SUMMARY_COLUMNS,
                  _final_merit_rows("run", cfg, traces, run_name))
    write_manifest(out, "run", config_echo(cfg), args)
    return EXIT_OK


def cmd_cool(args) -> int:
    cfg = load_cooling_config(args.config)
    cfg = _apply_overrides(cfg, args)
    workers = _resolve_workers(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    traces = parallel_map(_cool_worker, [(cfg, t) for t in range(cfg.trials)], workers)
    if args.format in ("jsonl", "both"):
        write_jsonl(out / "trace.jsonl",
                    [r.to_json_dict() for t in traces for r in t.records])
    if args.format in ("csv", "both"):
        write_csv(out / "summary.csv", SUMMARY_COLUMNS,
                  _final_merit_rows("cool", cfg, traces, cfg.target))
    write_manifest(out, "cool", cooling_echo(cfg), args)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec, kind = load_sweep_spec(args.config)
    base = _apply_overrides(spec.base, args)
    trials = args.trials if args.trials is not None else spec.trials
    spec = replace(spec, base=base, trials=trials)
    workers = _resolve_workers(args)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    if kind == "fig2":
        rows, diff_rows = sweep_fig2(spec, workers)
        write_csv(out / "difference.csv", DIFFERENCE_COLUMNS, diff_rows)
        if args.format in ("jsonl", "both"):
            write_jsonl(out / "difference.jsonl", diff_rows)
    else:
        rows = sweep_fig3(spec, workers)
    if args.format in ("csv", "both"):
        write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    if args.format in ("jsonl", "both"):
        write_jsonl(out / "summary.jsonl", rows)
    echo = config_echo(spec.base)
    echo["sweep"] = {"kind": kind, "name": spec.name, "axis": spec.axis,
                     "values": ",".join(str(v) for v in spec.values),
                     "trials": spec.trials}
    write_manifest(out, "sweep", echo, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .bounds import standard_verification_suite

    seed = args.seed if args.seed is not None else 0
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    reports = standard_verification_suite(seed)
    name_width = max(len(r.bound_name) for r in reports)
    lines = []
    failures = 0
    for r in reports:
        status = "PASS" if r.satisfied else "FAIL"
        if r.inconclusive:
            status = "SKIP"
        else:
            failures += not r.satisfied
        lines.append(f"{status}  {r.bound_name:<{name_width}}  "
                     f"lhs={r.lhs: .6g}  rhs={r.rhs: .6g}  [{r.confidence}]")
    table = "\n".join(lines)
    print(table)
    (out / "bound_reports.json").write_text(
        json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n")
    (out / "report.txt").write_text(table + "\n")
    write_manifest(out, "verify", {"seed": seed, "checks": len(reports)}, args)
    if failures:
        print(f"{failures} bound check(s) failed", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def cli_run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    handler = {"run": cmd_run, "sweep": cmd_sweep,
               "verify": cmd_verify, "cool": cmd_cool}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 2
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(cli_run(sys.argv[1:]))


if __name__ == "__main__":
    main()
