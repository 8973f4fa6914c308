"""Initial data families sampled on a grid.

Singular profiles ``|x|^{-beta}`` have an integrable spike at the origin;
the sample nearest the origin is replaced by the cell average over
``[-dx/2, dx/2]`` so the discrete L^1 mass is right.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .exponents import as_rational
from .grid import ComplexField, GridSpec, lp_norm

__all__ = [
    "gaussian",
    "box",
    "heavy_tail",
    "singular",
    "sech",
    "random_field",
    "scaling_orbit",
    "concentrated",
    "make_datum",
]


def gaussian(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0, center: float = 0.0, velocity: float = 0.0) -> ComplexField:
    x = np.asarray(grid.x)
    return ComplexField(grid, amplitude * np.exp(-((x - center) / width) ** 2 + 1j * velocity * x))


def box(grid: GridSpec, a: float = 0.0, b: float = 1.0, amplitude: float = 1.0) -> ComplexField:
    """Indicator of ``[a, b)`` (sampled at cell points)."""
    x = np.asarray(grid.x)
    return ComplexField(grid, amplitude * ((x >= a) & (x < b)).astype(float))


def heavy_tail(grid: GridSpec, beta: float = 1.0, amplitude: float = 1.0) -> ComplexField:
    """``(1 + x^2)^{-beta/2}``: in L^p iff beta p > 1."""
    x = np.asarray(grid.x)
    return ComplexField(grid, amplitude * (1 + x * x) ** (-beta / 2))


def singular(
    grid: GridSpec,
    beta: float = 0.5,
    amplitude: float = 1.0,
    envelope: Optional[float] = 1.0,
    cutoff: Optional[float] = None,
    core: Optional[float] = None,
) -> ComplexField:
    """``|x|^{-beta}`` times a Gaussian envelope (or a hard cutoff at ``|x| <= cutoff``).

    In L^p near the origin iff beta p < 1.  The origin cell carries the
    cell average ``(dx/2)^{-beta} / (1 - beta)``.  With ``core = eps`` the
    spike is softened to ``(x^2 + eps^2)^{-beta/2}``, which is a pure power
    law on scales much larger than ``eps``.
    """
    if not (0 < beta < 1):
        raise ValueError("beta must lie in (0, 1) for an integrable spike")
    x = np.asarray(grid.x)
    dx = grid.dx
    ax = np.abs(x)
    if core is not None:
        vals = (ax * ax + core * core) ** (-beta / 2)
    else:
        vals = np.empty_like(ax)
        near = ax < dx / 2
        vals[~near] = ax[~near] ** (-beta)
        vals[near] = (dx / 2) ** (-beta) / (1 - beta)
    if envelope is not None:
        vals *= np.exp(-((x / envelope) ** 2) / 2)
    if cutoff is not None:
        vals *= ax <= cutoff
    return ComplexField(grid, amplitude * vals)


def sech(grid: GridSpec, amplitude: float = 1.0, width: float = 1.0) -> ComplexField:
    x = np.asarray(grid.x)
    return ComplexField(grid, amplitude / np.cosh(x / width))


def random_field(grid: GridSpec, seed: int = 0, amplitude: float = 1.0, width: float = 2.0) -> ComplexField:
    """Smooth random field: complex white noise filtered by a Gaussian window."""
    rng = np.random.default_rng(seed)
    x = np.asarray(grid.x)
    noise = rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)
    kern = np.exp(-(x / 0.5) ** 2)
    smooth = np.fft.ifft(np.fft.fft(noise) * np.fft.fft(np.fft.ifftshift(kern)))
    smooth *= np.exp(-((x / width) ** 2))
    m = np.abs(smooth).max()
    return ComplexField(grid, amplitude * smooth / (m if m > 0 else 1.0))


def scaling_orbit(profile, grid: GridSpec, s: float, alpha, p) -> ComplexField:
    """Point on the NLS scaling orbit with ``||phi_s||_p = s ||phi_1||_p``.

    ``profile`` is a callable ``x -> values``.  Returns
    ``lam^{2/(alpha-1)} profile(lam x)`` with
    ``lam = s^{1 / (2/(alpha-1) - 1/p)}``; along this orbit the local
    existence time scales exactly like ``s^{lifespan_exponent(alpha, p)}``.
    """
    a, pp = float(as_rational(alpha)), float(as_rational(p))
    k = 2 / (a - 1) - 1 / pp
    if k <= 0:
        raise ValueError("scaling orbit needs a subcritical (alpha, p)")
    lam = s ** (1 / k)
    x = np.asarray(grid.x)
    return ComplexField(grid, lam ** (2 / (a - 1)) * profile(lam * x))


def concentrated(grid: GridSpec, width: float, p, norm: float = 1.0, profile=None) -> ComplexField:
    """``profile(x / width)`` rescaled to have discrete L^p norm ``norm``.

    Along ``width -> 0`` this is the L^p-invariant concentration family
    that saturates estimates holding uniformly on an L^p ball.  The
    default profile is ``exp(-x^2)``.
    """
    if not width > 0:
        raise ValueError("width must be positive")
    prof = (lambda y: np.exp(-y * y)) if profile is None else profile
    vals = np.asarray(prof(np.asarray(grid.x) / width), dtype=np.complex128)
    nrm = lp_norm(vals, p, dx=grid.dx)
    if nrm == 0:
        raise ValueError("profile vanishes on the grid")
    return ComplexField(grid, vals * (norm / nrm))


_FAMILIES = {
    "gaussian": gaussian,
    "box": box,
    "heavy_tail": heavy_tail,
    "singular": singular,
    "sech": sech,
    "random": random_field,
    "concentrated": concentrated,
}


def make_datum(grid: GridSpec, family: str, **params) -> ComplexField:
    """Build a datum by family name (used by experiment configs)."""
    try:
        fn = _FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown data family {family!r}; choose from {sorted(_FAMILIES)}") from None
    return fn(grid, **params)
