"""Propagate the cubic soliton and compare with the exact solution.

``e^{it} sech(x)`` solves ``i u_t + u_xx + 2 |u|^2 u = 0``.  The error
should fall by about 4x each time ``dt`` is halved until the
discretization floor.

Run: python3 demos/soliton.py
"""
import numpy as np

from nlslab.data import sech
from nlslab.grid import GridSpec
from nlslab.integrator import IntegratorConfig, evolve
from nlslab.nonlinearity import NonlinearitySpec


def main(t_end=1.0):
    g = GridSpec(4096, 32.0)
    exact = np.exp(1j * t_end) / np.cosh(np.asarray(g.x))
    spec = NonlinearitySpec("gauge", 3, 2.0)
    print(f"{'dt':>8} {'rel L2 error':>14} {'mass drift':>12}")
    for dt in (1e-2, 5e-3, 2.5e-3, 1.25e-3):
        tr = evolve(sech(g), spec, IntegratorConfig(dt, t_end))
        err = np.linalg.norm(tr.final.values - exact) / np.linalg.norm(exact)
        drift = abs(tr.mass[-1] / tr.mass[0] - 1)
        print(f"{dt:8.2e} {err:14.3e} {drift:12.2e}")


if __name__ == "__main__":
    main()
