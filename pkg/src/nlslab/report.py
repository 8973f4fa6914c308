"""Experiment reports and config hashing."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from . import __version__

__all__ = ["ExperimentReport", "make_report", "config_hash", "fit_loglog", "jsonable"]


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and Fractions for json."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    return str(obj)


def config_hash(cfg: Mapping) -> str:
    """sha256 of the canonical JSON form of a config."""
    blob = json.dumps(jsonable(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def fit_loglog(x, y) -> tuple:
    """Least-squares slope of log y vs log x.  Returns ``(slope, intercept, rms residual)``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(coef[1]), float(np.sqrt(np.mean(resid**2)))


@dataclass(frozen=True)
class ExperimentReport:
    """Immutable result of one experiment.

    ``passed`` holds iff every relative error is within its tolerance and
    every named boolean check holds.
    """

    experiment: str
    target: str
    fitted: dict
    targets: dict
    rel_errors: dict
    tolerances: dict
    checks: dict
    passed: bool
    details: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    runtime: float = 0.0
    outside_proven_range: bool = False
    notes: tuple = ()
    # norm tables and fields for the CLI writers; never serialized
    artifacts: dict = field(default_factory=dict, compare=False, repr=False)

    def to_json(self) -> dict:
        d = {
            "experiment": self.experiment,
            "target": self.target,
            "pass": self.passed,
            "fitted": self.fitted,
            "targets": self.targets,
            "rel_errors": self.rel_errors,
            "tolerances": self.tolerances,
            "checks": self.checks,
            "details": self.details,
            "provenance": self.provenance,
            "runtime_s": self.runtime,
            "notes": list(self.notes),
        }
        if self.outside_proven_range:
            d["stamp"] = "outside proven range"
        return jsonable(d)


def make_report(
    experiment: str,
    target: str,
    fitted: Mapping,
    targets: Mapping,
    tolerances: Mapping,
    checks: Optional[Mapping] = None,
    details: Optional[Mapping] = None,
    provenance: Optional[Mapping] = None,
    runtime: float = 0.0,
    outside_proven_range: bool = False,
    notes=(),
    artifacts: Optional[Mapping] = None,
) -> ExperimentReport:
    """Assemble a report; relative errors are ``|fit/target - 1|`` (absolute when the target is 0).

    A target without a tolerance is informational and does not affect
    ``passed``.
    """
    rel = {}
    for k, tgt in targets.items():
        if k not in fitted:
            continue
        f, t = float(fitted[k]), float(tgt)
        rel[k] = abs(f - t) if t == 0 else abs(f / t - 1)
    checks = dict(checks or {})
    ok = all(math.isfinite(rel[k]) and rel[k] <= float(tolerances[k]) for k in rel if k in tolerances)
    ok = ok and all(bool(v) for v in checks.values())
    prov = {"code_version": __version__}
    prov.update(provenance or {})
    return ExperimentReport(
        experiment,
        target,
        dict(fitted),
        {k: v for k, v in targets.items()},
        rel,
        dict(tolerances),
        checks,
        bool(ok),
        dict(details or {}),
        prov,
        runtime,
        outside_proven_range,
        tuple(notes),
        dict(artifacts or {}),
    )
