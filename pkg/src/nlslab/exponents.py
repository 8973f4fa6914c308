"""Exact exponent arithmetic for the 1D L^p NLS theory.

Every exponent here is a :class:`fractions.Fraction`.  Floats are only
produced at the boundary (``float(cfg.q)`` etc.) by callers that feed a
simulation.  Inequalities between exponents are decided exactly.

The "infinite" exponent is represented by :data:`INF` (``math.inf``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath

__all__ = [
    "INF",
    "Rational",
    "as_rational",
    "rational_to_str",
    "ExponentConfig",
    "PairClass",
    "ExponentDomainError",
    "r_of_alpha",
    "q_from_scaling",
    "Q_p_of_r",
    "classify_pair",
    "lwp_p_lower_bound",
    "gwp_p_lower_bound",
    "critical_p",
    "lifespan_exponent",
    "decay_exponent",
    "pdecomp_gamma",
    "contraction_exponent",
    "scatter_increment_exponent",
    "lp_divergence_exponent",
    "rational_power",
    "continuation_schedule",
    "ContinuationSchedule",
    "theorem_applicability",
]

INF = math.inf

Rational = Fraction
RationalLike = Union[Fraction, int, str, float]

# Working precision for rational powers with non-integer exponents:
# 113-bit binary mantissa (IEEE quad), round-to-nearest-even.
POWER_PREC_BITS = 113


class ExponentDomainError(ValueError):
    """An exponent argument lies outside the range where a formula is defined."""


def as_rational(x: RationalLike) -> Fraction:
    """Convert ``x`` to an exact :class:`Fraction`.

    Strings accept ``"a/b"`` and decimal notation.  Floats go through their
    shortest repr, so ``1.9`` becomes ``19/10`` rather than the binary
    expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ExponentDomainError(f"non-finite exponent {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot interpret {x!r} as a rational exponent")


def rational_to_str(x: Union[Fraction, float]) -> str:
    """Serialize as ``"num/den"`` (``"inf"`` for the infinite exponent)."""
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    x = as_rational(x)
    return f"{x.numerator}/{x.denominator}"


def _inv(x) -> Fraction:
    """1/x with 1/inf = 0."""
    if isinstance(x, float) and math.isinf(x):
        return Fraction(0)
    return 1 / as_rational(x)


def r_of_alpha(alpha: RationalLike) -> Fraction:
    """Auxiliary spatial exponent: alpha+1 on (1,3], 2(alpha-1) on [3,5)."""
    a = as_rational(alpha)
    if not (1 < a < 5):
        raise ExponentDomainError(f"alpha={a} outside (1, 5)")
    return a + 1 if a <= 3 else 2 * (a - 1)


def q_from_scaling(p: RationalLike, r) -> Fraction:
    """Temporal exponent q with 2/q + 1/r = 1/p.

    ``r`` may be :data:`INF`, in which case q = 2p.
    """
    p = as_rational(p)
    gap = 1 / p - _inv(r)
    if gap <= 0:
        raise ExponentDomainError(f"1/p - 1/r = {gap} <= 0; q is not finite and positive")
    return 2 / gap


def Q_p_of_r(p: RationalLike, r) -> Fraction:
    """Same relation as :func:`q_from_scaling`, in the (p, r) -> Q_p(r) notation."""
    return q_from_scaling(p, r)


def decay_exponent(p: RationalLike) -> Fraction:
    """Dispersive L^{p'}-L^p decay rate 1/p - 1/2 (one space dimension)."""
    p = as_rational(p)
    if not (1 <= p <= 2):
        raise ExponentDomainError(f"p={p} outside [1, 2]")
    return 1 / p - Fraction(1, 2)


def critical_p(alpha: RationalLike) -> Fraction:
    """Scaling-critical data integrability (alpha-1)/2."""
    a = as_rational(alpha)
    if a <= 1:
        raise ExponentDomainError(f"alpha={a} must exceed 1")
    return (a - 1) / 2


def lifespan_exponent(alpha: RationalLike, p: RationalLike) -> Fraction:
    """Exponent e in T ~ ||phi||_{L^p}^e, e = -2p(alpha-1)/(2p-alpha+1)."""
    a, p = as_rational(alpha), as_rational(p)
    den = 2 * p - a + 1
    if den == 0:
        raise ExponentDomainError(f"2p = alpha-1 (p={p}, alpha={a}): critical, no lifespan scaling")
    if den < 0:
        raise ExponentDomainError(f"2p < alpha-1 (p={p}, alpha={a}): supercritical")
    return -2 * p * (a - 1) / den


def lwp_p_lower_bound(alpha: RationalLike) -> Fraction:
    """Lower end of the large-data local theory: max((a-1)/2, 2(a-1)/a, (a+1)/a)."""
    a = as_rational(alpha)
    if not (1 < a < 5):
        raise ExponentDomainError(f"alpha={a} outside (1, 5)")
    return max((a - 1) / 2, 2 * (a - 1) / a, (a + 1) / a)


def gwp_p_lower_bound(alpha: RationalLike) -> Fraction:
    """Lower end of the large-data global theory (gauge case, 3 <= alpha < 5)."""
    a = as_rational(alpha)
    if not (3 <= a < 5):
        raise ExponentDomainError(f"alpha={a} outside [3, 5)")
    first = (a - 1) * (a + 3) / (2 * a * a + 2 * a - 4)
    second = (a - 1) * (3 * a + 5) / (2 * (a * a - 2 * a + 5))
    return max(first, second)


def pdecomp_gamma(p: RationalLike, p0: RationalLike) -> Fraction:
    """Growth exponent gamma = (1/p - 1/2) / (1/p0 - 1/p) of the L^2 part of a split."""
    p, p0 = as_rational(p), as_rational(p0)
    if not (1 < p0 < p <= 2):
        raise ExponentDomainError(f"need 1 < p0 < p <= 2, got p={p}, p0={p0}")
    return (1 / p - Fraction(1, 2)) / (1 / p0 - 1 / p)


def contraction_exponent(alpha: RationalLike, p: RationalLike) -> Fraction:
    """Power of T in the Picard contraction factor, 1 - (alpha-1)/(2p).

    The same power governs the Hoelder modulus of the twisted trajectory
    in L^p.
    """
    a, p = as_rational(alpha), as_rational(p)
    if a <= 1 or p <= 0:
        raise ExponentDomainError(f"need alpha > 1 and p > 0, got alpha={a}, p={p}")
    return 1 - (a - 1) / (2 * p)


def scatter_increment_exponent(alpha: RationalLike) -> Fraction:
    """Power of t in the late-time twisted increments, 1 - (alpha-1)/2.

    With ||u(t)||_inf ~ t^{-1/2}, ||v(2t) - v(t)||_p is bounded by
    ``t ||u||_inf^{alpha-1}`` up to constants.  Negative iff alpha > 3;
    the per-dyadic-level contraction factor is ``2**(-exponent)``.
    """
    a = as_rational(alpha)
    if a <= 1:
        raise ExponentDomainError(f"alpha={a} must exceed 1")
    return 1 - (a - 1) / 2


def lp_divergence_exponent(beta: RationalLike, r: RationalLike) -> Fraction:
    """Growth rate in ``1/dx`` of the sampled L^r norm of ``|x|^{-beta}``: beta - 1/r.

    Positive iff the profile is not locally L^r.
    """
    b, r = as_rational(beta), as_rational(r)
    if r <= 0:
        raise ExponentDomainError(f"r={r} must be positive")
    return b - 1 / r


@dataclass(frozen=True)
class PairClass:
    beta: Fraction
    kappa: Fraction
    in_S: bool
    in_S_hat: bool
    special: bool = False
    violated: tuple = ()


def classify_pair(p: RationalLike, beta, kappa) -> PairClass:
    """Membership of (beta, kappa) in the admissible sets S(p) and S_hat(p).

    ``special`` flags the (4, r), r > 4 family, which belongs to S_hat(p)
    regardless of the strict 1/beta < 1/4 condition.  ``violated`` names
    the failed S(p) conditions.
    """
    p = as_rational(p)
    ib, ik = _inv(beta), _inv(kappa)
    violated = []
    if 2 * ib + ik != 1 / p:
        violated.append("2/beta + 1/kappa = 1/p")
    if not (0 < ik < Fraction(1, 2)):
        violated.append("0 < 1/kappa < 1/2")
    if not (0 < ib < Fraction(1, 2) - ik):
        violated.append("0 < 1/beta < 1/2 - 1/kappa")
    in_S = not violated
    special = ib == Fraction(1, 4) and 0 < ik < Fraction(1, 4)
    in_S_hat = (in_S and ib < min(Fraction(1, 2) - ik, Fraction(1, 4))) or special
    b = Fraction(0) if ib == 0 else 1 / ib
    k = Fraction(0) if ik == 0 else 1 / ik
    return PairClass(b, k, in_S, in_S_hat, special, tuple(violated))


@dataclass(frozen=True)
class ExponentConfig:
    """(alpha, p) with every derived exponent held exactly.

    ``lifespan_exp`` is ``None`` when 2p <= alpha - 1 (no subcritical
    lifespan law).
    """

    alpha: Fraction
    p: Fraction
    r: Fraction
    q: Fraction
    p_dual: Fraction
    decay_exp: Fraction
    lifespan_exp: Optional[Fraction]

    @classmethod
    def build(cls, alpha: RationalLike, p: RationalLike, r: Optional[RationalLike] = None) -> "ExponentConfig":
        """Derive all exponents; ``r`` defaults to :func:`r_of_alpha`."""
        a, p = as_rational(alpha), as_rational(p)
        if not (1 < p <= 2):
            raise ExponentDomainError(f"p={p} outside (1, 2]")
        r = r_of_alpha(a) if r is None else as_rational(r)
        q = q_from_scaling(p, r)
        p_dual = p / (p - 1)
        try:
            life = lifespan_exponent(a, p)
        except ExponentDomainError:
            life = None
        return cls(a, p, r, q, p_dual, decay_exponent(p), life)

    def check(self) -> None:
        """Assert the defining exact relations."""
        assert 2 / self.q + 1 / self.r == 1 / self.p
        assert 1 / self.p + 1 / self.p_dual == 1
        assert self.decay_exp >= 0 and (self.decay_exp == 0) == (self.p == 2)

    def to_json(self) -> dict:
        d = {
            k: (None if v is None else rational_to_str(v))
            for k, v in (
                ("alpha", self.alpha),
                ("p", self.p),
                ("r", self.r),
                ("q", self.q),
                ("p_dual", self.p_dual),
                ("decay_exp", self.decay_exp),
                ("lifespan_exp", self.lifespan_exp),
            )
        }
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ExponentConfig":
        return cls.build(d["alpha"], d["p"], d.get("r"))


def _exact_root(x: Fraction, n: int) -> Optional[Fraction]:
    """Exact n-th root of a positive rational, or None if irrational."""
    def iroot(m: int) -> Optional[int]:
        if m < 2:
            return m
        # integer Newton iteration from above
        c = 1 << ((m.bit_length() + n - 1) // n)
        while True:
            nxt = ((n - 1) * c + m // c ** (n - 1)) // n
            if nxt >= c:
                break
            c = nxt
        return c if c**n == m else None

    num, den = iroot(x.numerator), iroot(x.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def rational_power(base: RationalLike, exponent: RationalLike):
    """base**exponent, exact when the result is rational.

    Returns a :class:`Fraction` when the exponent is an integer or the base
    is a perfect power of the exponent's denominator; otherwise an
    :class:`mpmath.mpf` computed at :data:`POWER_PREC_BITS` bits with
    round-to-nearest.
    """
    b, e = as_rational(base), as_rational(exponent)
    if b <= 0:
        raise ExponentDomainError("rational_power needs a positive base")
    if e.denominator == 1:
        return b ** e.numerator
    root = _exact_root(b, e.denominator)
    if root is not None:
        return root ** e.numerator
    with mpmath.workprec(POWER_PREC_BITS):
        return mpmath.power(mpmath.mpf(b.numerator) / b.denominator, mpmath.mpf(e.numerator) / e.denominator)


def _floor(x) -> int:
    if isinstance(x, Fraction):
        return math.floor(x)
    with mpmath.workprec(POWER_PREC_BITS):
        return int(mpmath.floor(x))


@dataclass(frozen=True)
class ContinuationSchedule:
    delta_N: object  # Fraction or mpmath.mpf
    k_max: int
    T_N: object
    gamma: Fraction
    delta_exponent: Fraction
    k_exponent: Fraction

    def to_json(self) -> dict:
        def s(v):
            return rational_to_str(v) if isinstance(v, Fraction) else mpmath.nstr(v, 30)

        return {
            "delta_N": s(self.delta_N),
            "k_max": self.k_max,
            "T_N": s(self.T_N),
            "gamma": rational_to_str(self.gamma),
            "delta_exponent": rational_to_str(self.delta_exponent),
            "k_exponent": rational_to_str(self.k_exponent),
        }


def continuation_schedule(
    alpha: RationalLike,
    p: RationalLike,
    p0: RationalLike,
    gamma: Optional[RationalLike] = None,
    M: RationalLike = 2,
    N: RationalLike = 2,
    C: RationalLike = 1,
) -> ContinuationSchedule:
    """Window length, window count and reach of the splitting continuation.

    delta_N = (M N)^(-4(alpha-1) gamma / (5-alpha)); k_max is the largest k
    with k N^(-1 + 2(alpha-1)/(5-alpha) (1/p0 - 1/2)) <= C N^gamma, and
    T_N = k_max delta_N.  ``gamma`` defaults to :func:`pdecomp_gamma`.
    The data class exponent in the k-condition is p0, the exponent of the
    class the split datum belongs to.
    """
    a = as_rational(alpha)
    if 5 - a <= 0:
        raise ExponentDomainError(f"alpha={a}: 5 - alpha <= 0")
    if not (1 < a < 5):
        raise ExponentDomainError(f"alpha={a} outside (1, 5)")
    p, p0 = as_rational(p), as_rational(p0)
    g = pdecomp_gamma(p, p0) if gamma is None else as_rational(gamma)
    M, N, C = as_rational(M), as_rational(N), as_rational(C)
    if N <= 1 or M <= 0 or C <= 0:
        raise ExponentDomainError("need N > 1, M > 0, C > 0")
    delta_exp = -4 * (a - 1) * g / (5 - a)
    delta = rational_power(M * N, delta_exp)
    per_window = -1 + 2 * (a - 1) / (5 - a) * (1 / p0 - Fraction(1, 2))
    k_exp = g - per_window
    bound = C * rational_power(N, k_exp)
    k_max = _floor(bound)
    if isinstance(delta, Fraction):
        T_N = k_max * delta
    else:
        with mpmath.workprec(POWER_PREC_BITS):
            T_N = k_max * delta
    return ContinuationSchedule(delta, k_max, T_N, g, delta_exp, k_exp)


def theorem_applicability(alpha: RationalLike, p: RationalLike) -> dict:
    """Which main-theorem hypotheses (alpha, p) satisfies.

    Keys: ``lwp`` (large-data local), ``sgwp`` (small-data global, critical),
    ``lgwp`` (large-data global, gauge), ``hat_gwp`` (hat-L^p global, gauge),
    ``splitting`` (range of the splitting lemma).  Each value holds a
    boolean ``holds`` plus the bound it was checked against.
    """
    a, p = as_rational(alpha), as_rational(p)
    out = {}
    if 1 < a < 5:
        lb = lwp_p_lower_bound(a)
        out["lwp"] = {"holds": lb < p <= 2, "p_lower_bound": rational_to_str(lb)}
    else:
        out["lwp"] = {"holds": False, "reason": "alpha outside (1,5)"}
    out["sgwp"] = {
        "holds": 4 < a < 5 and p == critical_p(a),
        "critical_p": rational_to_str(critical_p(a)) if a > 1 else None,
    }
    if 3 <= a < 5:
        gb = gwp_p_lower_bound(a)
        out["lgwp"] = {"holds": gb < p <= 2, "p_lower_bound": rational_to_str(gb), "gauge_only": True}
    else:
        out["lgwp"] = {"holds": False, "reason": "alpha outside [3,5)", "gauge_only": True}
    if a > 2:
        ub = min(a + 1, (3 * a + 5) / (2 * a))
        out["hat_gwp"] = {"holds": 2 <= p < ub, "p_upper_bound": rational_to_str(ub), "gauge_only": True}
    else:
        out["hat_gwp"] = {"holds": False, "reason": "alpha <= 2", "gauge_only": True}
    sb = max(2 * a / 5, (a + 1) / a) if a > 1 else None
    out["splitting"] = {
        "holds": sb is not None and sb < p < 2,
        "p_lower_bound": None if sb is None else rational_to_str(sb),
    }
    return out
