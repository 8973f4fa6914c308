import cmath
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab.grid import ComplexField, GridError, GridSpec
from nlslab.nonlinearity import NonlinearitySpec, apply, apply_values, g_kernel, lipschitz_probe, modulus_power

G = GridSpec(64, 4.0)
KINDS = ("gauge", "conjugate", "modulus")


def _const(c, grid=G):
    return ComplexField(grid, np.full(grid.n_points, c, dtype=complex))


def _rand(rng, grid=G, scale=1.0):
    return ComplexField(grid, scale * (rng.standard_normal(grid.n_points) + 1j * rng.standard_normal(grid.n_points)))


@pytest.mark.parametrize("lam", [1.0, -1.0, 2.5])
def test_apply_examples(lam):
    assert np.allclose(apply(NonlinearitySpec("gauge", 3, lam), _const(1)).values, lam)
    assert np.allclose(apply(NonlinearitySpec("gauge", 3, lam), _const(2j)).values, lam * 8j)
    # |3+4i|^2 = 25; the modulus 5 is the alpha = 1 value
    out = apply(NonlinearitySpec("modulus", 2, lam), _const(3 + 4j)).values
    assert np.allclose(out, lam * 5**2)
    assert np.all(out.imag == 0)


def test_modulus_kind_value():
    out = apply(NonlinearitySpec("modulus", F(3, 2), 1.0), _const(3 + 4j)).values
    assert np.allclose(out, 5**1.5)


def test_conjugate_kind_value():
    out = apply(NonlinearitySpec("conjugate", 3, 1.0), _const(1 + 1j)).values
    assert np.allclose(out, 2 * (1 - 1j))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("alpha", [F(3, 2), 2, 3, F(9, 2)])
def test_apply_zero_is_exactly_zero(kind, alpha):
    out = apply(NonlinearitySpec(kind, alpha, 1.0), ComplexField.zeros(G)).values
    assert np.array_equal(out, np.zeros(G.n_points))


def test_modulus_power_zero_and_fractional():
    u = np.array([0, 4, 1j * 9])
    assert np.allclose(modulus_power(u, F(1, 2)), [0, 2, 3])
    assert modulus_power(u, F(1, 2))[0] == 0.0


def test_spec_validation_and_json():
    with pytest.raises(ValueError):
        NonlinearitySpec("cubic", 3)
    with pytest.raises(ValueError):
        NonlinearitySpec("gauge", 1)
    s = NonlinearitySpec("conjugate", "7/2", -1)
    assert s.to_json() == {"kind": "conjugate", "alpha": "7/2", "lambda": -1.0}
    assert NonlinearitySpec.from_json(s.to_json()) == s


def test_lipschitz_probe_examples():
    spec = NonlinearitySpec("gauge", 3, 1.0)
    u = _rand(np.random.default_rng(0))
    assert lipschitz_probe(spec, u, u) == 0.0
    assert lipschitz_probe(spec, _const(1), ComplexField.zeros(G)) == pytest.approx(1.0)


def test_lipschitz_probe_bounded_over_random_pairs():
    rng = np.random.default_rng(1)
    spec = NonlinearitySpec("gauge", 3, 1.0)
    worst = 0.0
    for _ in range(1000):
        u, v = _rand(rng, scale=rng.uniform(0.01, 10)), _rand(rng, scale=rng.uniform(0.01, 10))
        worst = max(worst, lipschitz_probe(spec, u, v))
    assert worst <= 2.0


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("alpha", [F(3, 2), 3, F(9, 2)])
def test_lipschitz_probe_bounded_all_kinds(kind, alpha):
    rng = np.random.default_rng(2)
    spec = NonlinearitySpec(kind, alpha, -3.0)
    ratios = [lipschitz_probe(spec, _rand(rng), _rand(rng, scale=0.1)) for _ in range(100)]
    # the mean value theorem gives the constant alpha for every kind
    assert max(ratios) <= float(alpha)


def test_lipschitz_probe_grid_mismatch():
    spec = NonlinearitySpec()
    with pytest.raises(GridError):
        lipschitz_probe(spec, ComplexField.zeros(G), ComplexField.zeros(GridSpec(64, 2.0)))


def test_g_kernel_cases():
    rng = np.random.default_rng(3)
    spec = NonlinearitySpec("gauge", F(7, 3), 1.5)
    v, w1 = _rand(rng), _rand(rng)
    zero = ComplexField.zeros(G)
    assert np.array_equal(g_kernel(spec, v, w1, w1).values, np.zeros(G.n_points))
    expected = apply(spec, v + w1).values - apply(spec, v).values
    assert np.allclose(g_kernel(spec, v, w1, zero).values, expected, rtol=0, atol=1e-14)
    assert np.allclose(g_kernel(spec, zero, w1, zero).values, apply(spec, w1).values, rtol=0, atol=1e-14)


@pytest.mark.parametrize("kind", ["conjugate", "modulus"])
def test_g_kernel_requires_gauge(kind):
    z = ComplexField.zeros(G)
    with pytest.raises(ValueError, match="gauge"):
        g_kernel(NonlinearitySpec(kind, 3), z, z, z)


def test_zero_coupling_gives_zero():
    u = _rand(np.random.default_rng(4))
    assert np.array_equal(apply(NonlinearitySpec("gauge", 3, 0.0), u).values, np.zeros(G.n_points))


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.0, math.pi / 3, math.pi / 2, 1.234]), st.sampled_from([F(3, 2), 3, F(9, 2)]))
def test_gauge_covariance(seed, theta, alpha):
    spec = NonlinearitySpec("gauge", alpha, 1.0)
    u = _rand(np.random.default_rng(seed)).values
    rot = cmath.exp(1j * theta)
    assert np.allclose(apply_values(spec, rot * u), rot * apply_values(spec, u), rtol=1e-13, atol=1e-13)


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100.0), st.sampled_from(KINDS), st.sampled_from([F(3, 2), 3, F(9, 2)]))
def test_homogeneity(seed, s, kind, alpha):
    spec = NonlinearitySpec(kind, alpha, 1.0)
    u = _rand(np.random.default_rng(seed)).values
    lhs = apply_values(spec, s * u)
    rhs = s ** float(alpha) * apply_values(spec, u)
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=0)
