"""Periodic grids, the Fourier transform, Lebesgue norms and the free flow.

Conventions
-----------
The forward transform is ``F f(xi) = int exp(-i xi x) f(x) dx`` (no
prefactor) and the inverse carries ``1/(2 pi)``, so that ``F^{-1} F = id``
and ``||F f||_2 = sqrt(2 pi) ||f||_2``.  The free propagator solves
``i u_t + u_xx = 0``, i.e. it is the Fourier multiplier
``exp(-i xi^2 t)``.

The real line is modelled by the periodic box ``[-L, L)`` sampled at
``n`` points ``x_j = -L + j dx``.  Frequencies live on the lattice
``xi_k = pi k / L``, ``k = -n/2, ..., n/2 - 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft as sfft
from scipy.signal import czt

from .exponents import as_rational, classify_pair

__all__ = [
    "GridSpec",
    "ComplexField",
    "NormTimeSeries",
    "PLANCHEREL",
    "GridError",
    "InadmissiblePairError",
    "lp_norm",
    "hat_lp_norm",
    "fourier",
    "inverse_fourier",
    "free_propagate",
    "propagate_values",
    "modulate",
    "factorized_propagate_inverse",
    "conjugation_constant",
    "spacetime_norm",
    "free_norm_series",
    "strichartz_ratio_probe",
    "leakage",
    "bandwidth",
    "wrap_time",
]

PLANCHEREL = math.sqrt(2 * math.pi)


class GridError(ValueError):
    """Invalid grid, field or grid-resolution failure."""


class InadmissiblePairError(ValueError):
    """Strichartz pair outside the admissible set for the requested estimate."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on ``[-half_width, half_width)``."""

    n_points: int
    half_width: float

    def __post_init__(self):
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise GridError(f"n_points={n} must be a power of two >= 2")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise GridError(f"half_width={self.half_width} must be positive and finite")

    @property
    def dx(self) -> float:
        return 2 * self.half_width / self.n_points

    @property
    def dxi(self) -> float:
        return math.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return math.pi / self.dx

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_width + self.dx * np.arange(self.n_points)
        x.flags.writeable = False
        return x

    @cached_property
    def xi(self) -> np.ndarray:
        """Frequency lattice in ascending order."""
        k = np.arange(-self.n_points // 2, self.n_points // 2)
        xi = self.dxi * k
        xi.flags.writeable = False
        return xi

    @cached_property
    def k_fft(self) -> np.ndarray:
        """Angular frequencies in FFT (unshifted) order."""
        k = 2 * np.pi * sfft.fftfreq(self.n_points, d=self.dx)
        k.flags.writeable = False
        return k

    def refine(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.n_points * factor, self.half_width)

    def frequency_grid(self) -> "GridSpec":
        """The frequency lattice viewed as a spatial grid of its own."""
        return GridSpec(self.n_points, self.nyquist)

    def to_json(self) -> dict:
        return {"n_points": self.n_points, "half_width": self.half_width}


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples on a :class:`GridSpec`.  Immutable once built."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128, copy=True)
        if v.shape != (self.grid.n_points,):
            raise GridError(f"expected {self.grid.n_points} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise GridError("field contains NaN or Inf")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: GridSpec, func) -> "ComplexField":
        return cls(grid, func(np.asarray(grid.x)))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ComplexField":
        return cls(grid, np.zeros(grid.n_points, dtype=np.complex128))

    def _check_same_grid(self, other: "ComplexField"):
        if other.grid != self.grid:
            raise GridError("fields live on different grids")

    def __add__(self, other: "ComplexField") -> "ComplexField":
        self._check_same_grid(other)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        self._check_same_grid(other)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, s) -> "ComplexField":
        return ComplexField(self.grid, self.values * s)

    __rmul__ = __mul__

    def __len__(self) -> int:
        return self.grid.n_points


@dataclass(frozen=True)
class NormTimeSeries:
    """Per-time L^r norms ``norms[j] = ||u(times[j])||_r``."""

    times: np.ndarray
    r: object
    norms: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        n = np.asarray(self.norms, dtype=float)
        if t.ndim != 1 or t.shape != n.shape:
            raise ValueError("times and norms must be 1-D and of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(n < 0):
            raise ValueError("norms must be nonnegative")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "norms", n)


# --------------------------------------------------------------------------
# norms


def _exponent_value(p) -> float:
    if isinstance(p, float) and math.isinf(p):
        return math.inf
    pv = float(as_rational(p))
    if pv < 1:
        raise ValueError(f"Lebesgue exponent {p} < 1")
    return pv


def _lp_values(values: np.ndarray, weight: float, p: float, axis: int = -1):
    a = np.abs(values)
    if math.isinf(p):
        return a.max(axis=axis)
    if p == 2:
        return np.sqrt(weight * np.sum(a * a, axis=axis))
    if p == 1:
        return weight * a.sum(axis=axis)
    # scale out the max to avoid overflow for large p
    m = a.max(axis=axis, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    s = weight * np.sum((a / safe) ** p, axis=axis)
    return np.squeeze(safe, axis=axis) * s ** (1.0 / p)


def lp_norm(f: Union[ComplexField, np.ndarray], p, dx: Optional[float] = None) -> float:
    """Discrete L^p norm ``(sum |f_j|^p dx)^(1/p)``; the max for p = inf.

    Accepts a :class:`ComplexField` or a raw array together with ``dx``.
    Stacked arrays are reduced along the last axis.
    """
    pv = _exponent_value(p)
    if isinstance(f, ComplexField):
        return float(_lp_values(f.values, f.grid.dx, pv))
    if dx is None:
        raise ValueError("dx is required for raw arrays")
    out = _lp_values(np.asarray(f), dx, pv)
    return float(out) if np.ndim(out) == 0 else out


def fourier(f: ComplexField) -> np.ndarray:
    """Forward transform sampled on ``grid.xi`` (ascending)."""
    g = f.grid
    n = g.n_points
    k = np.arange(-n // 2, n // 2)
    # exp(i xi_k L) = (-1)^k accounts for the grid starting at x = -L
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    return g.dx * sign * sfft.fftshift(sfft.fft(f.values))


def inverse_fourier(fhat: np.ndarray, grid: GridSpec) -> ComplexField:
    """Inverse of :func:`fourier` (carries the 1/(2 pi))."""
    n = grid.n_points
    k = np.arange(-n // 2, n // 2)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    vals = sfft.ifft(sfft.ifftshift(np.asarray(fhat) * sign)) / grid.dx
    return ComplexField(grid, vals)


def hat_lp_norm(f: ComplexField, p) -> float:
    """L^{p'} norm of the Fourier transform, with the ``d xi`` weight."""
    pv = _exponent_value(p)
    if math.isinf(pv):
        raise ValueError("hat-L^p norm needs finite p")
    p_dual = math.inf if pv == 1 else pv / (pv - 1)
    return float(_lp_values(fourier(f), f.grid.dxi, p_dual))


# --------------------------------------------------------------------------
# free flow


def propagate_values(values: np.ndarray, grid: GridSpec, t) -> np.ndarray:
    """Raw-array free flow.  ``t`` may be a vector; ``values`` then stacks rows."""
    t = np.asarray(t, dtype=float)
    k2 = grid.k_fft**2
    if t.ndim == 0:
        return sfft.ifft(np.exp(-1j * k2 * t) * sfft.fft(values))
    phase = np.exp(-1j * np.outer(t, k2))
    return sfft.ifft(phase * sfft.fft(values, axis=-1), axis=-1)


def free_propagate(f: ComplexField, t: float) -> ComplexField:
    """Free Schrodinger flow ``U(t) f``: multiply by ``exp(-i xi^2 t)``."""
    if t == 0:
        return f
    return ComplexField(f.grid, propagate_values(f.values, f.grid, t))


def modulate(f: ComplexField, t: float, inverse: bool = False) -> ComplexField:
    """Chirp multiplication ``M_t f = exp(i x^2/(4t)) f`` (or its inverse)."""
    sign = -1.0 if inverse else 1.0
    x = f.grid.x
    return ComplexField(f.grid, np.exp(sign * 1j * x * x / (4 * t)) * f.values)


def _chirp_floor(grid: GridSpec) -> float:
    # local chirp frequency L/(2|t|) must stay below Nyquist
    return grid.half_width * grid.dx / (2 * math.pi)


def factorized_propagate_inverse(f: ComplexField, t: float, t_floor: Optional[float] = None) -> ComplexField:
    """``U(-t) f`` assembled as ``M_t^{-1} F^{-1} D_t^{-1} M_t^{-1} f``.

    With ``(D_t w)(x) = (4 pi i t)^{-1/2} w(x / (2t))`` the composition
    reads, pointwise in y,

        U(-t) f (y) = e^{-i y^2/4t} (4 pi i t)^{1/2} / (4 pi t)
                      * int e^{i x y /(2t)} e^{-i x^2/4t} f(x) dx.

    The dilated inverse transform is evaluated exactly at the grid points
    by a chirp-z transform, i.e. band-limited (trigonometric) interpolation
    of the discrete transform.  ``(4 pi i t)^{1/2}`` takes the principal
    branch.
    """
    g = f.grid
    floor = _chirp_floor(g) if t_floor is None else t_floor
    if t == 0 or abs(t) < floor:
        raise GridError(f"|t|={abs(t):.3g} below chirp-resolution floor {floor:.3g}")
    x = np.asarray(g.x)
    dx, L, n = g.dx, g.half_width, g.n_points
    h = np.exp(-1j * x * x / (4 * t)) * f.values  # M_t^{-1}
    # S_k = sum_j h_j exp(i w_k x_j), w_k = x_k / (2t); split x_j = -L + j dx
    # czt evaluates sum_j h_j z_k^{-j} with z_k = A W^{-k}, so
    # z_k^{-j} = A^{-j} W^{kj} = exp(i w_k j dx)
    A = np.exp(1j * L * dx / (2 * t))
    W = np.exp(1j * dx * dx / (2 * t))
    S = czt(h, m=n, w=W, a=A)
    w = x / (2 * t)
    S = S * np.exp(1j * w * (-L)) * dx
    pref = np.sqrt(4 * np.pi * 1j * t + 0j) / (4 * np.pi * t)
    out = np.exp(-1j * x * x / (4 * t)) * pref * S
    return ComplexField(g, out)


def conjugation_constant(h: ComplexField, s: float) -> Tuple[complex, float]:
    """Measure c in ``F M_s F^{-1} h = c U(-tau) h`` on the frequency side.

    ``h`` is read as a function of frequency on the lattice ``grid.xi``
    (see :meth:`GridSpec.frequency_grid`); the comparison flow runs on that
    lattice for time ``tau = 1/(4s)``, the value forced by the transform
    convention above.  Returns ``(c, residual)`` where ``residual`` is the
    relative L^2 misfit of the best multiple.
    """
    g = h.grid  # spatial grid; h.values indexed like g.xi
    spatial = inverse_fourier(h.values, g)
    lhs = fourier(modulate(spatial, s))
    fg = g.frequency_grid()
    # fg.x coincides with g.xi sample for sample
    rhs = free_propagate(ComplexField(fg, h.values), -1.0 / (4 * s)).values
    c = np.vdot(rhs, lhs) / np.vdot(rhs, rhs)
    resid = np.linalg.norm(lhs - c * rhs) / np.linalg.norm(lhs)
    return complex(c), float(resid)


# --------------------------------------------------------------------------
# space-time norms


def spacetime_norm(series, q, r=None) -> float:
    """``||u||_{L^q(I; L^r)}`` by composite trapezoid in time.

    ``series`` is a :class:`NormTimeSeries` or a sequence of
    ``(time, ComplexField)`` pairs (``r`` is then required).  For q = inf
    the sup of the per-time norms is returned.
    """
    if isinstance(series, NormTimeSeries):
        times, norms = series.times, series.norms
    else:
        pairs = list(series)
        if r is None:
            raise ValueError("r is required for raw (time, field) series")
        times = np.array([t for t, _ in pairs], dtype=float)
        norms = np.array([lp_norm(f, r) for _, f in pairs])
    if len(times) == 0:
        raise ValueError("empty time series")
    qv = _exponent_value(q)
    if math.isinf(qv):
        return float(np.max(norms))
    if len(times) < 2:
        raise ValueError("need at least two time samples")
    return float(np.trapezoid(norms**qv, times) ** (1.0 / qv))


def free_norm_series(phi: ComplexField, r, times: Sequence[float], chunk: int = 64) -> NormTimeSeries:
    """``||U(t) phi||_r`` on a time list, computed in chunks."""
    times = np.asarray(times, dtype=float)
    rv = _exponent_value(r)
    fhat = sfft.fft(phi.values)
    k2 = phi.grid.k_fft**2
    out = np.empty(len(times))
    for i in range(0, len(times), chunk):
        tt = times[i : i + chunk]
        u = sfft.ifft(np.exp(-1j * np.outer(tt, k2)) * fhat, axis=-1)
        out[i : i + chunk] = _lp_values(u, phi.grid.dx, rv)
    return NormTimeSeries(times, r, out)


def strichartz_ratio_probe(
    phi: ComplexField,
    p,
    beta,
    kappa,
    T: float,
    variant: str = "lp",
    n_time: int = 512,
) -> float:
    """``||U(t) phi||_{L^beta([0,T]; L^kappa)} / ||phi||``.

    ``variant='lp'`` normalizes by ``||phi||_p`` and requires
    (beta, kappa) in S(p); ``variant='hat'`` uses the hat-L^p norm and
    requires S_hat(p).  Zero data returns 0.
    """
    pc = classify_pair(p, beta, kappa)
    if variant == "lp":
        if not pc.in_S:
            raise InadmissiblePairError(f"({beta}, {kappa}) not in S({p}): violates {', '.join(pc.violated)}")
        den = lp_norm(phi, p)
    elif variant == "hat":
        if not pc.in_S_hat:
            why = ", ".join(pc.violated) or "1/beta < min(1/2 - 1/kappa, 1/4)"
            raise InadmissiblePairError(f"({beta}, {kappa}) not in S_hat({p}): violates {why}")
        den = hat_lp_norm(phi, p)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    if den == 0:
        return 0.0
    times = np.linspace(0.0, T, n_time + 1)
    series = free_norm_series(phi, kappa, times)
    return spacetime_norm(series, beta) / den


# --------------------------------------------------------------------------
# box diagnostics


def leakage(f: ComplexField, edge_fraction: float = 0.05) -> float:
    """Fraction of the mass within ``edge_fraction * 2L`` of the box edge."""
    x = f.grid.x
    L = f.grid.half_width
    a2 = np.abs(f.values) ** 2
    total = a2.sum()
    if total == 0:
        return 0.0
    edge = np.abs(x) >= L - edge_fraction * 2 * L
    return float(a2[edge].sum() / total)


def bandwidth(f: ComplexField, energy: float = 0.9999) -> float:
    """Smallest xi_B with ``energy`` of the spectral mass in ``|xi| <= xi_B``."""
    fh = np.abs(fourier(f)) ** 2
    total = fh.sum()
    if total == 0:
        return 0.0
    xi = np.abs(f.grid.xi)
    order = np.argsort(xi, kind="stable")
    cum = np.cumsum(fh[order]) / total
    idx = int(np.searchsorted(cum, energy))
    return float(xi[order][min(idx, len(order) - 1)])


def wrap_time(f: ComplexField, energy: float = 0.9999) -> float:
    """Wrap-around bound ``L / (8 xi_B)``; dispersive fits stay below it."""
    xb = bandwidth(f, energy)
    return math.inf if xb == 0 else f.grid.half_width / (8 * xb)
