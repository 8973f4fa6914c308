"""nlslab: numerical laboratory for 1D nonlinear Schrodinger equations with L^p data.

Exact exponent calculus, spectral free propagators, a Strang split-step
integrator, a Picard solver for the twisted integral equation, the
amplitude-threshold data splitting, and an experiment harness.
"""
__version__ = "0.1.0"

from .exponents import ExponentConfig, as_rational  # noqa: E402
from .grid import ComplexField, GridSpec, NormTimeSeries, free_propagate, lp_norm  # noqa: E402
from .nonlinearity import NonlinearitySpec  # noqa: E402
from .integrator import IntegratorConfig, evolve  # noqa: E402
from .picard import picard_solve  # noqa: E402

__all__ = [
    "__version__",
    "ExponentConfig",
    "as_rational",
    "ComplexField",
    "GridSpec",
    "NormTimeSeries",
    "free_propagate",
    "lp_norm",
    "NonlinearitySpec",
    "IntegratorConfig",
    "evolve",
    "picard_solve",
]
