import json
import math
from fractions import Fraction as F

import mpmath
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from nlslab.exponents import (
    INF,
    ExponentConfig,
    ExponentDomainError,
    Q_p_of_r,
    as_rational,
    classify_pair,
    continuation_schedule,
    contraction_exponent,
    critical_p,
    decay_exponent,
    gwp_p_lower_bound,
    lifespan_exponent,
    lp_divergence_exponent,
    lwp_p_lower_bound,
    pdecomp_gamma,
    q_from_scaling,
    r_of_alpha,
    rational_power,
    rational_to_str,
    scatter_increment_exponent,
    theorem_applicability,
)

alphas = st.fractions(min_value=F(101, 100), max_value=F(499, 100), max_denominator=100)


def _p_above(lo):
    """Rationals in (lo, 2]."""
    t = st.fractions(min_value=0, max_value=1, max_denominator=60).filter(lambda t: t > 0)
    return t.map(lambda t: lo + (2 - lo) * t)


# --- rationals ---------------------------------------------------------------


def test_as_rational_lowest_terms():
    x = as_rational("6/4")
    assert (x.numerator, x.denominator) == (3, 2)
    assert as_rational("-2/4") == F(-1, 2)
    assert as_rational(1.9) == F(19, 10)


def test_as_rational_rejects_bool_and_nan():
    with pytest.raises(TypeError):
        as_rational(True)
    with pytest.raises(ExponentDomainError):
        as_rational(float("nan"))


@given(st.fractions(max_denominator=10**6))
def test_rational_string_round_trip(x):
    s = rational_to_str(x)
    n, d = s.split("/")
    assert int(d) > 0
    assert math.gcd(int(n), int(d)) == 1
    assert as_rational(s) == x


def test_rational_to_str_infinite():
    assert rational_to_str(INF) == "inf"


# --- r_of_alpha ---------------------------------------------------------------


@pytest.mark.parametrize("alpha, r", [(2, 3), (3, 4), (4, 6)])
def test_r_of_alpha_values(alpha, r):
    assert r_of_alpha(alpha) == r


@pytest.mark.parametrize("alpha", [1, F(1, 2), 5, 6])
def test_r_of_alpha_domain(alpha):
    with pytest.raises(ExponentDomainError):
        r_of_alpha(alpha)


def test_r_of_alpha_continuous_at_three():
    eps = F(1, 10**9)
    assert abs(r_of_alpha(3 - eps) - 4) <= 2 * eps
    assert abs(r_of_alpha(3 + eps) - 4) <= 2 * eps


# --- q and Q ---------------------------------------------------------------------


def test_q_from_scaling_values():
    # 2/q = 1/2 - 1/4 = 1/4
    assert q_from_scaling(2, 4) == 8
    # 2/q = 4/7 - 1/7 = 3/7
    assert q_from_scaling("7/4", 7) == F(14, 3)


@pytest.mark.parametrize("p", [F(3, 2), 2, F(7, 4)])
def test_q_from_scaling_degenerate(p):
    with pytest.raises(ExponentDomainError):
        q_from_scaling(p, p)


def test_Q_p_of_r_values():
    assert Q_p_of_r(2, 4) == 8
    assert Q_p_of_r("7/4", 7) == F(14, 3)
    assert Q_p_of_r("3/2", INF) == 3


@given(_p_above(F(1)), st.fractions(min_value=F(2), max_value=F(50), max_denominator=40))
def test_q_satisfies_scaling_relation(p, r):
    assume(1 / p > 1 / r)
    q = q_from_scaling(p, r)
    assert isinstance(q, F)
    assert 2 / q + 1 / r == 1 / p


# --- classify_pair --------------------------------------------------------------


def test_classify_pair_l2_endpoint():
    pc = classify_pair(2, 8, 4)
    # 2/8 + 1/4 = 1/2; 0 < 1/4 < 1/2; 0 < 1/8 < 1/4; 1/8 < min(1/4, 1/4)
    assert pc.in_S and pc.in_S_hat


def test_classify_pair_forced_infinite_kappa():
    # 2/4 + 1/kappa = 1/2 forces 1/kappa = 0
    pc = classify_pair(2, 4, INF)
    assert not pc.in_S
    assert pc.violated


def test_classify_pair_special_member():
    pc = classify_pair(2, 4, 5)
    assert pc.in_S_hat and pc.special
    assert not pc.in_S


def test_classify_pair_names_violation():
    pc = classify_pair("3/2", 3, 3)
    assert not pc.in_S
    assert any("scaling" in v or "2/beta" in v for v in pc.violated)


@given(
    _p_above(F(1)),
    st.fractions(min_value=F(1, 10), max_value=F(40), max_denominator=30),
    st.fractions(min_value=F(1, 10), max_value=F(40), max_denominator=30),
)
def test_hat_pairs_are_strichartz_pairs_unless_special(p, beta, kappa):
    pc = classify_pair(p, beta, kappa)
    if pc.in_S_hat and not pc.special:
        assert pc.in_S


@given(_p_above(F(1)), st.fractions(min_value=F(5, 2), max_value=F(40), max_denominator=30))
def test_admissible_family_from_scaling(p, kappa):
    # beta solves 2/beta + 1/kappa = 1/p
    gap = 1 / p - 1 / kappa
    assume(gap > 0)
    beta = 2 / gap
    pc = classify_pair(p, beta, kappa)
    expected = (0 < 1 / kappa < F(1, 2)) and (0 < 1 / beta < F(1, 2) - 1 / kappa)
    assert pc.in_S == expected


# --- theorem bounds -------------------------------------------------------------


def test_lwp_bound_values():
    assert lwp_p_lower_bound(3) == max(F(1), F(4, 3), F(4, 3)) == F(4, 3)
    assert lwp_p_lower_bound(2) == max(F(1, 2), F(1), F(3, 2)) == F(3, 2)


def test_lwp_bound_tends_to_two():
    assert lwp_p_lower_bound(F(4999, 1000)) == F(3999, 2000)
    assert lwp_p_lower_bound(F(49999, 10000)) < 2


def test_gwp_bound_values():
    # max(2*6/20, 2*14/16) = 7/4
    assert gwp_p_lower_bound(3) == F(7, 4)
    # first: 3*7/(32+8-4) = 21/36; second: 3*17/(2*(16-8+5)) = 51/26
    assert gwp_p_lower_bound(4) == max(F(21, 36), F(51, 26)) == F(51, 26)


def test_gwp_bound_near_five():
    a = F(4999, 1000)
    first = (a - 1) * (a + 3) / (2 * a * a + 2 * a - 4)
    second = (a - 1) * (3 * a + 5) / (2 * (a * a - 2 * a + 5))
    assert first > F(1, 2) and second > 1
    assert gwp_p_lower_bound(a) == max(first, second)


def test_gwp_bound_domain():
    with pytest.raises(ExponentDomainError):
        gwp_p_lower_bound(2)


@pytest.mark.parametrize("alpha, p", [(F(9, 2), F(7, 4)), (5, 2), (3, 1)])
def test_critical_p(alpha, p):
    assert critical_p(alpha) == p


def test_lifespan_values():
    assert lifespan_exponent(3, 2) == -4
    # -2 (7/4) 2 / (7/2 - 2) = -7 / (3/2)
    assert lifespan_exponent(3, "7/4") == F(-14, 3)


def test_lifespan_critical_raises():
    with pytest.raises(ExponentDomainError):
        lifespan_exponent(3, 1)
    with pytest.raises(ExponentDomainError):
        lifespan_exponent(F(9, 2), F(7, 4))


@given(alphas)
def test_lifespan_l2_formula(alpha):
    assert lifespan_exponent(alpha, 2) == -4 * (alpha - 1) / (5 - alpha)


def test_decay_values():
    assert decay_exponent(2) == 0
    assert decay_exponent(1) == F(1, 2)
    assert decay_exponent("7/4") == F(1, 14)


@given(
    st.fractions(min_value=1, max_value=2, max_denominator=100),
    st.fractions(min_value=1, max_value=2, max_denominator=100),
)
def test_decay_monotone(p1, p2):
    assume(p1 < p2)
    assert decay_exponent(p1) > decay_exponent(p2) >= 0


def test_pdecomp_gamma_value():
    # (5/9 - 1/2) / (5/8 - 5/9) = (1/18) / (5/72)
    assert pdecomp_gamma("9/5", "8/5") == F(4, 5)


def test_pdecomp_gamma_domain():
    with pytest.raises(ExponentDomainError):
        pdecomp_gamma("8/5", "9/5")


def test_contraction_exponent():
    # 1 - 2/(7/2)
    assert contraction_exponent(3, "7/4") == F(3, 7)
    assert contraction_exponent(3, 2) == F(1, 2)


def test_scatter_increment_exponent():
    assert scatter_increment_exponent(F(9, 2)) == F(-3, 4)
    assert scatter_increment_exponent(3) == 0


def test_lp_divergence_exponent():
    # beta p' - 1 over p' with beta = 2/5, p' = 7/2
    assert lp_divergence_exponent("2/5", "7/2") == (F(2, 5) * F(7, 2) - 1) / F(7, 2)


# --- ExponentConfig -------------------------------------------------------------


def test_config_theorem_12_case():
    ec = ExponentConfig.build("9/2", "7/4")
    assert (ec.r, ec.q, ec.p_dual, ec.decay_exp) == (7, F(14, 3), F(7, 3), F(1, 14))
    assert ec.lifespan_exp is None


def test_config_json_round_trip():
    ec = ExponentConfig.build(3, "7/4")
    d = json.loads(json.dumps(ec.to_json()))
    assert d["q"] == "14/1" or as_rational(d["q"]) == ec.q
    assert ExponentConfig.from_json(d) == ec


@given(alphas.flatmap(lambda a: st.tuples(st.just(a), _p_above(max(lwp_p_lower_bound(a), F(1))))))
def test_config_invariants(ap):
    alpha, p = ap
    ec = ExponentConfig.build(alpha, p)
    assert 2 / ec.q + 1 / ec.r == 1 / ec.p
    assert 1 / ec.p + 1 / ec.p_dual == 1
    assert ec.decay_exp >= 0 and (ec.decay_exp == 0) == (p == 2)
    ec.check()


@given(alphas.flatmap(lambda a: st.tuples(st.just(a), _p_above(max(lwp_p_lower_bound(a), F(1))))))
def test_lwp_range_gives_admissible_pair(ap):
    alpha, p = ap
    r = r_of_alpha(alpha)
    assert classify_pair(p, q_from_scaling(p, r), r).in_S


# --- rational powers and the continuation schedule -----------------------------


def test_rational_power_exact_cases():
    assert rational_power(8, -4) == F(1, 4096)
    assert rational_power(F(4, 9), F(3, 2)) == F(8, 27)


def test_rational_power_irrational_precision():
    val = rational_power(2, F(1, 3))
    with mpmath.workprec(300):
        ref = mpmath.cbrt(2)
        assert abs(val - ref) <= ref * mpmath.mpf(2) ** -110


def test_schedule_integer_exponent():
    s = continuation_schedule(3, 2, "3/2", gamma=1, M=2, N=4)
    assert s.delta_N == F(1, 4096)
    assert s.T_N == s.k_max * s.delta_N


@given(st.integers(2, 50))
def test_schedule_zero_gamma(N):
    s = continuation_schedule(3, 2, "3/2", gamma=0, M=2, N=N)
    assert s.delta_N == 1


def _k_max_oracle(alpha, p0, gamma, N, C=1):
    a, p0, g = (mpmath.mpf(x.numerator) / x.denominator for x in map(F, (alpha, p0, gamma)))
    with mpmath.workprec(200):
        per = mpmath.power(N, -1 + 2 * (a - 1) / (5 - a) * (1 / p0 - mpmath.mpf(1) / 2))
        bound = C * mpmath.power(N, g)
        k = 0
        while (k + 1) * per <= bound:
            k += 1
    return k


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_schedule_k_max_brute_force(N):
    s = continuation_schedule(3, "9/5", "8/5", M=2, N=N)
    assert s.gamma == F(4, 5)
    assert s.k_max == _k_max_oracle(3, F(8, 5), F(4, 5), N)


def test_schedule_delta_matches_high_precision():
    s = continuation_schedule(3, "9/5", "8/5", M=2, N=2)
    with mpmath.workprec(300):
        ref = mpmath.power(4, mpmath.mpf(-16) / 5)
        assert abs(s.delta_N - ref) <= ref * mpmath.mpf(2) ** -100


def test_schedule_domain():
    with pytest.raises(ExponentDomainError):
        continuation_schedule(5, 2, "3/2")
    with pytest.raises(ExponentDomainError):
        continuation_schedule(3, 2, "3/2", N=1)


# --- applicability --------------------------------------------------------------


def test_applicability_cases():
    a = theorem_applicability("9/2", "7/4")
    assert a["sgwp"]["holds"] and not a["lwp"]["holds"]
    a = theorem_applicability(3, "19/10")
    assert a["lgwp"]["holds"] and a["lwp"]["holds"]
    assert not theorem_applicability(3, "7/4")["lgwp"]["holds"]
    # upper end min(alpha + 1, (3 alpha + 5) / (2 alpha)) = 7/3 at alpha = 3
    assert theorem_applicability(3, "11/5")["hat_gwp"]["holds"]
    assert not theorem_applicability(3, "7/3")["hat_gwp"]["holds"]
    assert theorem_applicability(3, "9/5")["splitting"]["holds"]
