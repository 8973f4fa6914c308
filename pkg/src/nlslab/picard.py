"""Picard iteration for the twisted integral equation.

The unknown is the twisted state ``v(t) = U(-t) u(t)``, which solves

    v(t) = phi + i int_0^t U(-s) N(U(s) v(s)) ds.

Iterates live on a uniform time lattice; the time integral is a
composite trapezoid.  Distances are measured in the X_T norm
``max(sup_t ||v(t)||_p, ||u||_{L^q([0,T]; L^r)})`` sampled on the lattice.

Failure of contraction, not blow-up of a norm, is what the solver can
observe; every lifespan quantity reported here is that proxy.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid

from .exponents import ExponentConfig, as_rational, theorem_applicability
from .grid import ComplexField, GridSpec, NormTimeSeries, lp_norm, _lp_values
from .nonlinearity import NonlinearitySpec, apply_values

__all__ = [
    "TwistedTrajectory",
    "XTNormReport",
    "NonContractionError",
    "QuadratureResolutionError",
    "GridBreakdownError",
    "picard_solve",
    "contraction_factors",
    "contraction_horizon",
    "twisted_persistence_scan",
    "TwistedScan",
    "modulus_of_continuity",
    "bilinear_duhamel_probe",
    "weighted_duhamel_probe",
    "tmax_estimate",
    "TmaxResult",
    "PROXY_NOTE",
]

PROXY_NOTE = (
    "lifespan and T_max values are contraction-failure proxies on a sampled "
    "time lattice; true blow-up times are not computable"
)


class NonContractionError(RuntimeError):
    """Successive Picard distances grew for three iterations in a row."""

    def __init__(self, message: str, report: "XTNormReport"):
        super().__init__(message)
        self.report = report


class QuadratureResolutionError(RuntimeError):
    """Halving the time lattice moved the solution by more than 10 tol."""


class GridBreakdownError(RuntimeError):
    """The periodic box no longer models the line (edge leakage)."""


@dataclass
class TwistedTrajectory:
    """``v(t_j) = U(-t_j) u(t_j)`` on a time lattice."""

    grid: GridSpec
    times: np.ndarray
    v_values: np.ndarray  # (n_times, n_points)
    phi: ComplexField

    def v(self, j: int) -> ComplexField:
        return ComplexField(self.grid, self.v_values[j])

    def u(self, j: int) -> ComplexField:
        j = range(len(self.times))[j]
        return ComplexField(self.grid, _flow(self.v_values[j : j + 1], self.grid, self.times[j : j + 1])[0])

    @property
    def v_states(self):
        return [self.v(j) for j in range(len(self.times))]

    def u_values(self) -> np.ndarray:
        return _flow(self.v_values, self.grid, self.times)


@dataclass(frozen=True)
class XTNormReport:
    sup_twisted_lp: float
    lqlr: float
    xt: float
    contraction_factors: tuple
    distances: tuple
    iterations: int
    converged: bool
    T: float
    n_time: int
    note: str = PROXY_NOTE

    def to_json(self) -> dict:
        return {
            "sup_twisted_lp": self.sup_twisted_lp,
            "lqlr": self.lqlr,
            "xt": self.xt,
            "contraction_factors": list(self.contraction_factors),
            "distances": list(self.distances),
            "iterations": self.iterations,
            "converged": self.converged,
            "T": self.T,
            "n_time": self.n_time,
            "note": self.note,
        }


def _phases(grid: GridSpec, times: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.outer(times, grid.k_fft**2))


def _flow(vals: np.ndarray, grid: GridSpec, times: np.ndarray, phases: Optional[np.ndarray] = None, sign: int = 1) -> np.ndarray:
    """Row j -> U(sign * t_j) row j."""
    ph = _phases(grid, times) if phases is None else phases
    if sign < 0:
        ph = np.conj(ph)
    return sfft.ifft(ph * sfft.fft(vals, axis=-1), axis=-1)


class _Lattice:
    """Precomputed time lattice and X_T norm machinery for one solve."""

    def __init__(self, grid: GridSpec, cfg: ExponentConfig, t0: float, T: float, n_time: int):
        if n_time < 1:
            raise ValueError("n_time must be positive")
        self.grid = grid
        self.times = t0 + np.linspace(0.0, T, n_time + 1)
        self.h = T / n_time
        self.T = T
        self.n_time = n_time
        self.phases = _phases(grid, self.times)
        self.p = float(cfg.p)
        self.q = float(cfg.q)
        self.r = float(cfg.r)

    def to_u(self, v: np.ndarray) -> np.ndarray:
        return _flow(v, self.grid, self.times, self.phases, +1)

    def duhamel(self, u: np.ndarray, spec: NonlinearitySpec) -> np.ndarray:
        """Cumulative ``int_{t0}^{t_j} U(-s) N(u(s)) ds`` (trapezoid)."""
        F = apply_values(spec, u)
        G = _flow(F, self.grid, self.times, self.phases, -1)
        return cumulative_trapezoid(G, dx=self.h, axis=0, initial=0)

    def twisted_sup(self, v: np.ndarray) -> float:
        return float(np.max(_lp_values(v, self.grid.dx, self.p)))

    def lqlr(self, u: np.ndarray) -> float:
        n = _lp_values(u, self.grid.dx, self.r)
        if self.n_time == 0:
            return 0.0
        return float(np.trapezoid(n**self.q, dx=self.h) ** (1 / self.q))

    def xt(self, v: np.ndarray, u: np.ndarray) -> float:
        return max(self.twisted_sup(v), self.lqlr(u))


def _check_hypotheses(cfg: ExponentConfig, check: bool):
    if not check:
        return
    app = theorem_applicability(cfg.alpha, cfg.p)
    if not (app["lwp"]["holds"] or app["sgwp"]["holds"]):
        warnings.warn(
            f"(alpha, p) = ({cfg.alpha}, {cfg.p}) is outside the proven local theory; exploratory run",
            RuntimeWarning,
            stacklevel=3,
        )


def _iterate(lat: _Lattice, v0: np.ndarray, spec: NonlinearitySpec, tol: float, max_iter: int, stop_on_growth: bool = True, min_iter: int = 1):
    """Core Picard loop.  Returns (v, u, distances, ratios, converged)."""
    m = len(lat.times)
    base = np.broadcast_to(v0, (m, v0.size))
    v = np.array(base)
    u = lat.to_u(v)
    dists: List[float] = []
    ratios: List[float] = []
    growth = 0
    converged = False
    for it in range(1, max_iter + 1):
        v_new = base + 1j * lat.duhamel(u, spec)
        if not np.all(np.isfinite(v_new)):
            raise FloatingPointError(f"non-finite Picard iterate at iteration {it}")
        u_new = lat.to_u(v_new)
        d = lat.xt(v_new - v, u_new - u)
        if dists:
            prev = dists[-1]
            rho = d / prev if prev > 0 else (0.0 if d == 0 else math.inf)
            ratios.append(rho)
            growth = growth + 1 if rho > 1 else 0
        dists.append(d)
        v, u = v_new, u_new
        if d <= tol and it >= min_iter:
            converged = True
            break
        if stop_on_growth and growth >= 3:
            break
    return v, u, dists, ratios, converged, growth >= 3


def _report(lat: _Lattice, v, u, dists, ratios, converged) -> XTNormReport:
    sup_v = lat.twisted_sup(v)
    lq = lat.lqlr(u)
    return XTNormReport(sup_v, lq, max(sup_v, lq), tuple(ratios), tuple(dists), len(dists), converged, lat.T, lat.n_time)


def picard_solve(
    phi: ComplexField,
    spec: NonlinearitySpec,
    cfg: ExponentConfig,
    T: float,
    n_time: int = 64,
    tol: float = 1e-10,
    max_iter: int = 60,
    halving_check: bool = True,
    check_hypotheses: bool = True,
    t0: float = 0.0,
):
    """Solve the twisted equation on ``[t0, t0 + T]`` by Picard iteration.

    ``phi`` is the twisted datum ``v(t0)`` (the ordinary datum when
    ``t0 = 0``).  Returns ``(TwistedTrajectory, XTNormReport)``.

    Raises :class:`NonContractionError` when the distance ratio exceeds 1
    for three consecutive iterations or the iteration budget runs out, and
    :class:`QuadratureResolutionError` when the half-resolution solve
    differs from the full one by more than ``10 tol`` in X_T distance.
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if n_time < 16:
        raise ValueError("n_time must be at least 16")
    _check_hypotheses(cfg, check_hypotheses)
    lat = _Lattice(phi.grid, cfg, t0, T, n_time)
    v, u, dists, ratios, converged, grew = _iterate(lat, phi.values, spec, tol, max_iter)
    report = _report(lat, v, u, dists, ratios, converged)
    if grew:
        raise NonContractionError(f"Picard distances grew three times in a row (T={T:.4g})", report)
    if not converged:
        raise NonContractionError(f"no convergence to tol={tol:g} within {max_iter} iterations (T={T:.4g})", report)
    if halving_check:
        if n_time % 2:
            raise ValueError("halving check needs an even n_time")
        coarse = _Lattice(phi.grid, cfg, t0, T, n_time // 2)
        vc, uc, _, _, conv_c, _ = _iterate(coarse, phi.values, spec, tol, max_iter)
        shift = coarse.xt(v[::2] - vc, u[::2] - uc)
        if not conv_c or shift > 10 * tol:
            raise QuadratureResolutionError(
                f"halving n_time shifts the solution by {shift:.3g} > 10*tol={10 * tol:.3g}; refine n_time or relax tol"
            )
    return TwistedTrajectory(phi.grid, lat.times, v, phi), report


def contraction_factors(
    phi: ComplexField,
    spec: NonlinearitySpec,
    cfg: ExponentConfig,
    T: float,
    n_time: int = 64,
    n_iter: int = 3,
) -> tuple:
    """First ``n_iter`` Picard distances and their ratios on ``[0, T]``.

    No convergence requirement; used to map the contraction regime.
    Returns ``(distances, ratios)``.
    """
    lat = _Lattice(phi.grid, cfg, 0.0, T, n_time)
    _, _, dists, ratios, _, _ = _iterate(lat, phi.values, spec, -1.0, n_iter, stop_on_growth=False)
    return np.array(dists), np.array(ratios)


def contraction_horizon(
    phi: ComplexField,
    spec: NonlinearitySpec,
    cfg: ExponentConfig,
    theta: float = 0.5,
    n_time: int = 64,
    T_guess: float = 1.0,
    rel_tol: float = 1e-3,
    max_expand: int = 60,
) -> float:
    """Largest T whose first Picard contraction factor stays below ``theta``.

    Solves ``rho_1(T) = theta`` by bracketing and bisection in ``log T``;
    ``rho_1 = d(v_2, v_1) / d(v_1, v_0)``.  Returns ``inf`` for the free
    flow.
    """
    if spec.lam == 0 or not np.any(phi.values):
        return math.inf

    def rho(T):
        _, r = contraction_factors(phi, spec, cfg, T, n_time, n_iter=2)
        return r[0]

    lo = hi = T_guess
    r = rho(T_guess)
    n = 0
    if r < theta:
        while r < theta:
            lo, hi = hi, hi * 2
            r = rho(hi)
            n += 1
            if n > max_expand:
                return math.inf
    else:
        while r >= theta:
            hi, lo = lo, lo / 2
            r = rho(lo)
            n += 1
            if n > max_expand:
                return 0.0
    while hi / lo - 1 > rel_tol:
        mid = math.sqrt(lo * hi)
        if rho(mid) < theta:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


@dataclass(frozen=True)
class TwistedScan:
    norms: NormTimeSeries  # ||v(t)||_p
    running_sup: np.ndarray
    increments: np.ndarray  # ||v(t_{j+1}) - v(t_j)||_p

    @property
    def M(self) -> float:
        return float(self.running_sup[-1])


def twisted_persistence_scan(traj: TwistedTrajectory, p) -> TwistedScan:
    """Per-time ``||v(t)||_p``, its running sup M(t), and adjacent increments."""
    dx = traj.grid.dx
    pv = float(as_rational(p))
    norms = np.asarray(_lp_values(traj.v_values, dx, pv))
    inc = np.asarray(_lp_values(np.diff(traj.v_values, axis=0), dx, pv)) if len(traj.times) > 1 else np.zeros(0)
    return TwistedScan(NormTimeSeries(traj.times, as_rational(p), norms), np.maximum.accumulate(norms), inc)


def modulus_of_continuity(traj: TwistedTrajectory, p, strides: Sequence[int]):
    """``omega(h) = max_j ||v(t_{j+k}) - v(t_j)||_p`` for ``h = k dt``.

    Returns ``(h, omega)`` arrays.
    """
    dx = traj.grid.dx
    pv = float(as_rational(p))
    dt = traj.times[1] - traj.times[0]
    hs, om = [], []
    for k in strides:
        if k < 1 or k >= len(traj.times):
            continue
        diff = traj.v_values[k:] - traj.v_values[:-k]
        om.append(float(np.max(_lp_values(diff, dx, pv))))
        hs.append(k * dt)
    return np.array(hs), np.array(om)


def _duhamel_from_u(traj: TwistedTrajectory, spec: NonlinearitySpec) -> tuple:
    times = traj.times
    u = traj.u_values()
    F = apply_values(spec, u)
    G = _flow(F, traj.grid, times, sign=-1)
    D = cumulative_trapezoid(G, x=times, axis=0, initial=0)
    return u, F, D


def bilinear_duhamel_probe(traj: TwistedTrajectory, spec: NonlinearitySpec, cfg: ExponentConfig, T: Optional[float] = None) -> float:
    """``sup_t ||int_0^t U(-s) N(u) ds||_p / (||u||_{L^q L^r}^{a-1} sup_t ||v||_p)``.

    Evaluated on the trajectory's lattice (restricted to ``[0, T]`` when
    given).  Zero trajectories give 0.
    """
    if cfg.p <= as_rational("4/3"):
        raise ValueError("the bilinear Duhamel estimate needs p > 4/3")
    tr = _restrict(traj, T)
    u, _, D = _duhamel_from_u(tr, spec)
    dx = tr.grid.dx
    p, q, r = float(cfg.p), float(cfg.q), float(cfg.r)
    lhs = float(np.max(_lp_values(D, dx, p)))
    lq = float(np.trapezoid(np.asarray(_lp_values(u, dx, r)) ** q, tr.times) ** (1 / q))
    sup_v = float(np.max(_lp_values(tr.v_values, dx, p)))
    den = lq ** float(spec.alpha - 1) * sup_v
    return 0.0 if den == 0 else lhs / den


def weighted_duhamel_probe(traj: TwistedTrajectory, spec: NonlinearitySpec, cfg: ExponentConfig, T: Optional[float] = None) -> float:
    """``sup_t ||int_0^t U(-s) N(u) ds||_p / ||s^{1/p-1/2} N(u)||_{L^sigma L^rho}``.

    Uses sigma = 4/3 and rho = 2p/(3p-2).
    """
    if cfg.p <= as_rational("4/3"):
        raise ValueError("the weighted Duhamel estimate needs p > 4/3")
    tr = _restrict(traj, T)
    _, F, D = _duhamel_from_u(tr, spec)
    dx = tr.grid.dx
    p = float(cfg.p)
    sigma = 4.0 / 3.0
    rho = 2 * p / (3 * p - 2)
    lhs = float(np.max(_lp_values(D, dx, p)))
    w = tr.times ** (1 / p - 0.5)
    inner = np.asarray(_lp_values(F, dx, rho)) * w
    rhs = float(np.trapezoid(inner**sigma, tr.times) ** (1 / sigma))
    return 0.0 if rhs == 0 else lhs / rhs


def _restrict(traj: TwistedTrajectory, T: Optional[float]) -> TwistedTrajectory:
    if T is None:
        return traj
    keep = traj.times <= T * (1 + 1e-12)
    return TwistedTrajectory(traj.grid, traj.times[keep], traj.v_values[keep], traj.phi)


@dataclass(frozen=True)
class TmaxResult:
    horizon: float
    reason: str  # "t_end" | "contraction" | "ceiling" | "grid"
    window_starts: tuple
    window_lengths: tuple
    twisted_norms: tuple
    note: str = PROXY_NOTE

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "reason": self.reason,
            "window_starts": list(self.window_starts),
            "window_lengths": list(self.window_lengths),
            "twisted_norms": list(self.twisted_norms),
            "note": self.note,
        }


def tmax_estimate(
    phi: ComplexField,
    spec: NonlinearitySpec,
    cfg: ExponentConfig,
    t_end: float,
    window_constant: float = 0.05,
    ceiling: float = 1e6,
    n_time: int = 32,
    tol: float = 1e-9,
    max_halvings: int = 6,
    max_windows: int = 10_000,
    leakage_threshold: float = 1e-4,
) -> TmaxResult:
    """Greedy continuation of the twisted solution by Picard windows.

    Window k has length ``window_constant * ||v(t_k)||_p^{e}`` with ``e``
    the lifespan exponent, halved up to ``max_halvings`` times if Picard
    fails to contract.  Stops at ``t_end``, at contraction failure, when
    the twisted norm exceeds ``ceiling``, or on grid breakdown (edge
    leakage of u above ``leakage_threshold``).
    """
    if cfg.lifespan_exp is None:
        raise ValueError("lifespan windows need a subcritical (alpha, p)")
    e = float(cfg.lifespan_exp)
    grid = phi.grid
    t = 0.0
    v = phi
    starts, lengths, norms = [], [], []
    edge = np.abs(grid.x) >= 0.9 * grid.half_width
    reason = "t_end"
    while t < t_end * (1 - 1e-12):
        if len(starts) >= max_windows:
            reason = "contraction"
            break
        nv = lp_norm(v, cfg.p)
        norms.append(nv)
        if nv > ceiling:
            reason = "ceiling"
            break
        if nv == 0 or spec.lam == 0:
            lengths.append(t_end - t)
            starts.append(t)
            t = t_end
            break
        Tw = min(window_constant * nv**e, t_end - t)
        ok = False
        for _ in range(max_halvings + 1):
            try:
                traj, _ = picard_solve(v, spec, cfg, Tw, n_time, tol, halving_check=False, check_hypotheses=False, t0=t)
                ok = True
                break
            except (NonContractionError, FloatingPointError):
                Tw /= 2
        if not ok:
            reason = "contraction"
            break
        starts.append(t)
        lengths.append(Tw)
        t += Tw
        v = traj.v(-1)
        u_now = traj.u(-1).values
        a2 = np.abs(u_now) ** 2
        if a2.sum() > 0 and a2[edge].sum() / a2.sum() > leakage_threshold:
            reason = "grid"
            break
    return TmaxResult(t, reason, tuple(starts), tuple(lengths), tuple(norms))
