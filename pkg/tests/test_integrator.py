import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlslab.data import box, gaussian, sech
from nlslab.grid import ComplexField, GridSpec, free_propagate
from nlslab.integrator import IntegrationError, IntegratorConfig, dealias_mask, evolve, mass
from nlslab.nonlinearity import NonlinearitySpec

G = GridSpec(1024, 32.0)
CUBIC = NonlinearitySpec("gauge", 3, 2.0)


def _rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_config_validation():
    with pytest.raises(ValueError):
        IntegratorConfig(0.0, 1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(0.1, -1.0)
    with pytest.raises(ValueError):
        IntegratorConfig(0.1, 1.0, record_every=0)
    with pytest.raises(ValueError):
        IntegratorConfig(0.1, 1.0, dealias="half")
    with pytest.raises(ValueError):
        IntegratorConfig(0.3, 1.0).n_steps
    assert IntegratorConfig(0.1, 1.0).n_steps == 10


def test_linear_limit_matches_free_flow():
    phi = gaussian(G, 1.0, 1.0, 0.0, 2.0)
    spec = NonlinearitySpec("gauge", 3, 0.0)
    tr = evolve(phi, spec, IntegratorConfig(0.01, 2.0))
    assert _rel(tr.final.values, free_propagate(phi, 2.0).values) <= 1e-10


def test_soliton():
    # e^{it} sech(x) solves i u_t + u_xx + 2 |u|^2 u = 0
    g = GridSpec(4096, 32.0)
    x = np.asarray(g.x)
    tr = evolve(sech(g), CUBIC, IntegratorConfig(1e-3, 1.0, record_every=100))
    assert _rel(tr.final.values, np.exp(1j) / np.cosh(x)) <= 1e-6
    amp = np.abs(tr.values)
    assert np.max(np.abs(amp - amp[0])) <= 1e-6


def test_second_order_self_convergence():
    phi = gaussian(G, 1.5)

    def run(dt):
        return evolve(phi, CUBIC, IntegratorConfig(dt, 1.0, dealias="none")).final.values

    ref = run(1e-4)
    errs = [np.linalg.norm(run(dt) - ref) for dt in (0.04, 0.02, 0.01)]
    for a, b in zip(errs, errs[1:]):
        assert a / b == pytest.approx(4.0, abs=0.5)


def test_time_reversibility():
    phi = gaussian(G, 1.5)
    cfg = IntegratorConfig(1e-3, 1.0)
    fwd = evolve(phi, CUBIC, cfg)
    back = evolve(fwd.final, CUBIC, cfg, reverse=True)
    assert back.times[-1] == pytest.approx(-1.0)
    assert _rel(back.final.values, phi.values) <= 1e-6


def test_records_layout():
    tr = evolve(gaussian(G), CUBIC, IntegratorConfig(0.01, 1.05, record_every=10))
    assert tr.times[0] == 0.0
    assert np.allclose(np.diff(tr.times[:-1]), 0.1)
    assert tr.times[-1] == pytest.approx(1.05)
    assert np.array_equal(tr.values[0], gaussian(G).values)
    assert len(tr.states) == len(tr.times) == len(tr.mass)


def test_mass_of_zero_field():
    assert mass(ComplexField.zeros(G)) == 0.0


def test_gauge_run_conserves_mass():
    tr = evolve(gaussian(G), NonlinearitySpec("gauge", 3, 1.0), IntegratorConfig(1e-3, 10.0, record_every=100))
    assert tr.times[-1] == pytest.approx(10.0)
    assert np.max(np.abs(tr.mass / tr.mass[0] - 1)) <= 1e-8


@settings(max_examples=20)
@given(st.sampled_from(["3/2", 2, 3, "9/2"]), st.floats(-2, 2), st.floats(0.1, 2.0))
def test_gauge_mass_conservation_property(alpha, lam, amp):
    tr = evolve(gaussian(G, amp), NonlinearitySpec("gauge", alpha, lam), IntegratorConfig(0.01, 1.0, record_every=20))
    assert np.max(np.abs(tr.mass / tr.mass[0] - 1)) <= 1e-8


def test_modulus_kind_does_not_conserve_mass():
    tr = evolve(gaussian(G, 1.5), NonlinearitySpec("modulus", 2, 1.0), IntegratorConfig(1e-3, 1.0))
    assert abs(tr.mass[-1] / tr.mass[0] - 1) > 1e-2


def test_nonfinite_state_raises_with_time():
    with np.errstate(all="ignore"):
        with pytest.raises(IntegrationError) as exc:
            evolve(gaussian(G, 10.0), NonlinearitySpec("modulus", 3, 1.0), IntegratorConfig(0.5, 50.0))
    assert exc.value.time > 0
    assert "t=" in str(exc.value)


def test_leakage_flag():
    assert not evolve(gaussian(G), CUBIC, IntegratorConfig(0.01, 0.1)).leakage_flag
    near_edge = box(G, 30.0, 31.0)
    assert evolve(near_edge, CUBIC, IntegratorConfig(0.01, 0.1)).leakage_flag


def test_dealias_mask():
    assert dealias_mask(G, "none") is None
    m = dealias_mask(G, "two_thirds")
    assert set(np.unique(m)) == {0.0, 1.0}
    assert np.all(m[np.abs(G.k_fft) <= 0.5 * G.nyquist] == 1)
    assert np.all(m[np.abs(G.k_fft) > 0.7 * G.nyquist] == 0)


def test_trajectory_norms():
    tr = evolve(gaussian(G), CUBIC, IntegratorConfig(0.1, 0.5))
    assert np.allclose(tr.norms(2) ** 2, tr.mass)
