"""Command-line entry point.

``nlslab <subcommand> --config path.json [--out dir] [--explore]``

Writes ``report.json``, ``norms.csv`` (when the experiment records a norm
history) and ``fields/*.bin`` under ``--out``.  The exit code is 0 iff the
report passes; 2 flags a usage, config or hypothesis error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .exponents import ExponentConfig, ExponentDomainError, as_rational, theorem_applicability
from .harness import NORM_COLUMNS, ExperimentConfig, HypothesisViolation, run_experiment
from .io import write_field, write_json, write_records, write_table_csv

SUBCOMMANDS = (
    "exponents",
    "simulate",
    "picard",
    "decompose",
    "decay",
    "lifespan",
    "smoothing",
    "persistence",
    "scatter",
    "hatlp",
    "continuation",
    "strichartz_sweep",
)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlslab", description="L^p experiments for the 1-D nonlinear Schroedinger equation")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "exponents", help="experiment config (JSON)")
        sp.add_argument("--out", default=None, help="output directory (default: print the report only)")
        sp.add_argument("--explore", action="store_true", help="run outside the proven range and stamp the report")
        if name == "exponents":
            sp.add_argument("--alpha", default=None)
            sp.add_argument("--p", default=None)
    return ap


def _exponents(args) -> int:
    if args.config:
        exps = json.loads(Path(args.config).read_text()).get("exponents", {})
    else:
        exps = {}
    alpha = args.alpha or exps.get("alpha")
    p = args.p or exps.get("p")
    if alpha is None or p is None:
        print("nlslab exponents: need --alpha and --p (or a config with exponents)", file=sys.stderr)
        return 2
    out = {"alpha": str(as_rational(alpha)), "p": str(as_rational(p))}
    try:
        ec = ExponentConfig.build(alpha, p)
        ec.check()
        out["exponents"] = ec.to_json()
    except ExponentDomainError as e:
        out["exponents"] = None
        out["error"] = str(e)
    try:
        out["applicability"] = theorem_applicability(alpha, p)
    except ExponentDomainError as e:
        out["applicability"] = None
        out.setdefault("error", str(e))
    print(json.dumps(out, indent=2))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_json(Path(args.out) / "report.json", out)
    return 0 if out["exponents"] is not None else 1


def _write_outputs(report, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report.to_json())
    arts = report.artifacts
    if "norms" in arts:
        write_table_csv(out / "norms.csv", NORM_COLUMNS, arts["norms"])
    if "table" in arts:
        cols, rows = arts["table"]
        write_table_csv(out / "table.csv", cols, rows)
    fields = arts.get("fields", {})
    if fields:
        fdir = out / "fields"
        fdir.mkdir(exist_ok=True)
        for name, f in fields.items():
            write_field(fdir / f"{name}.bin", f)
    if "records" in arts:
        prefix, grid, times, values, stride = arts["records"]
        write_records(out / "trajectory", grid, times, values, prefix, stride)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "exponents":
        return _exponents(args)
    try:
        raw = json.loads(Path(args.config).read_text())
        raw.setdefault("experiment", args.command)
        if raw["experiment"] != args.command:
            raise ValueError(f"config is for {raw['experiment']!r}, not {args.command!r}")
        cfg = ExperimentConfig.from_json(raw)
        report = run_experiment(cfg, explore=args.explore)
    except (HypothesisViolation, ValueError, OSError) as e:
        print(f"nlslab {args.command}: {e}", file=sys.stderr)
        return 2
    if args.out:
        _write_outputs(report, Path(args.out))
    summary = {k: report.to_json()[k] for k in ("experiment", "pass", "fitted", "targets", "rel_errors", "checks")}
    print(json.dumps(summary, indent=2))
    return 0 if report.passed else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
