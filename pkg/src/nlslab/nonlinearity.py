"""Power nonlinearities N(u) and the splitting difference kernel G."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exponents import as_rational, rational_to_str
from .grid import ComplexField, GridError

__all__ = ["NonlinearitySpec", "KIND_GAUGE", "KIND_CONJUGATE", "KIND_MODULUS", "apply", "apply_values", "modulus_power", "lipschitz_probe", "g_kernel"]

KIND_GAUGE = "gauge"
KIND_CONJUGATE = "conjugate"
KIND_MODULUS = "modulus"
_KINDS = (KIND_GAUGE, KIND_CONJUGATE, KIND_MODULUS)


@dataclass(frozen=True)
class NonlinearitySpec:
    """``lam * N(u)`` with N one of |u|^{a-1}u, |u|^{a-1}conj(u), |u|^a.

    The equation is ``i u_t + u_xx + lam N(u) = 0``: ``lam > 0`` is
    focusing, ``lam < 0`` defocusing, ``lam = 0`` the free flow.
    """

    kind: str = KIND_GAUGE
    alpha: Fraction = Fraction(3)
    lam: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        a = as_rational(self.alpha)
        if a <= 1:
            raise ValueError(f"alpha={a} must exceed 1")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def gauge(self) -> bool:
        return self.kind == KIND_GAUGE

    def to_json(self) -> dict:
        return {"kind": self.kind, "alpha": rational_to_str(self.alpha), "lambda": self.lam}

    @classmethod
    def from_json(cls, d: dict) -> "NonlinearitySpec":
        return cls(d.get("kind", KIND_GAUGE), as_rational(d["alpha"]), d.get("lambda", 1.0))


def modulus_power(u: np.ndarray, power) -> np.ndarray:
    """``|u|^power`` for power > 0, with exact zeros at u = 0."""
    a = np.abs(u)
    pw = float(power)
    if pw == int(pw):
        return a ** int(pw)
    out = np.zeros_like(a)
    nz = a > 0
    out[nz] = np.exp(pw * np.log(a[nz]))
    return out


def apply_values(spec: NonlinearitySpec, u: np.ndarray) -> np.ndarray:
    """Raw-array ``lam N(u)``."""
    if spec.lam == 0:
        return np.zeros_like(u)
    if spec.kind == KIND_MODULUS:
        return spec.lam * modulus_power(u, spec.alpha).astype(np.complex128)
    w = modulus_power(u, spec.alpha - 1)
    if spec.kind == KIND_GAUGE:
        return spec.lam * w * u
    return spec.lam * w * np.conj(u)


def apply(spec: NonlinearitySpec, f: ComplexField) -> ComplexField:
    """Pointwise ``lam N(f)``."""
    return ComplexField(f.grid, apply_values(spec, f.values))


def lipschitz_probe(spec: NonlinearitySpec, u: ComplexField, v: ComplexField) -> float:
    """max_x |N(u)-N(v)| / ((|u|^{a-1} + |v|^{a-1}) |u-v|), 0/0 read as 0.

    The coupling is divided out, so the result is the constant for N itself.
    """
    if u.grid != v.grid:
        raise GridError("fields live on different grids")
    unit = NonlinearitySpec(spec.kind, spec.alpha, 1.0)
    num = np.abs(apply_values(unit, u.values) - apply_values(unit, v.values))
    den = (modulus_power(u.values, spec.alpha - 1) + modulus_power(v.values, spec.alpha - 1)) * np.abs(u.values - v.values)
    ratio = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(ratio.max()) if ratio.size else 0.0


def g_kernel(spec: NonlinearitySpec, v: ComplexField, w1: ComplexField, w2: ComplexField) -> ComplexField:
    """``lam [N(v + w1) - N(v + w2)]`` for the gauge nonlinearity."""
    if not spec.gauge:
        raise ValueError(f"difference kernel is defined for the gauge kind only, got {spec.kind!r}")
    a = apply_values(spec, v.values + w1.values)
    b = apply_values(spec, v.values + w2.values)
    return ComplexField(v.grid, a - b)
