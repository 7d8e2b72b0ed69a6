"""
Regularity-exponent arithmetic for kinetic transport equations

    d_t f + div_x(v f + u f) = (lam D_t^alpha + D_x^alpha) D_v^beta g.

Every function here is pure.  Integer and Fraction inputs are carried through
in exact rational arithmetic; any float input drops the computation to binary
floating point.  ``math.inf`` is accepted wherever an integrability exponent
may be infinite.

Empty admissible ranges are reported with the :class:`Infeasible` value rather
than an exception, because experiments need to branch on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

from .spectral import conjugate_exponent

Number = Union[int, float, Fraction]


class ExponentDomainError(ValueError):
    """Parameters outside the range in which a formula is stated."""


@dataclass(frozen=True)
class Infeasible:
    """An empty open range; ``bound`` is the offending value (<= 0)."""

    bound: Number
    reason: str = ""

    def __bool__(self):
        return False


def _exact(x):
    if isinstance(x, bool):
        raise TypeError("booleans are not exponents")
    if isinstance(x, int):
        return Fraction(x)
    return x


def _simplify(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return int(x)
    return x


def _recip(p):
    """1/p with 1/inf = 0, exact for rationals."""
    if isinstance(p, float) and math.isinf(p):
        return Fraction(0)
    return 1 / _exact(p)


@dataclass(frozen=True)
class KineticParams:
    """Exponents of the kinetic equation and of the assumed regularity of f.

    ``p``/``q`` are the integrability exponents of g (and of f where a theorem
    uses them); ``R`` bounds the velocity support and ``T`` the time support.
    """

    alpha: Number = 0
    beta: Number = 0
    lam: int = 0
    d: int = 1
    k: Number = 0
    l: Number = 0
    R: Number = 1
    T: Number = 1
    p: Number = 2
    q: Number = 2

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ExponentDomainError(f"alpha must lie in [0,1], got {self.alpha}")
        if self.beta < 0 or self.k < 0 or self.l < 0:
            raise ExponentDomainError("beta, k, l must be nonnegative")
        if self.lam not in (0, 1):
            raise ExponentDomainError("lam must be 0 or 1")
        if int(self.d) != self.d or self.d < 1:
            raise ExponentDomainError("d must be a positive integer")
        if self.R < 1:
            raise ExponentDomainError("R must be >= 1")
        if not self.T > 0:
            raise ExponentDomainError("T must be positive")
        if self.p < 1 or self.q < 1:
            raise ExponentDomainError("p, q must be >= 1")


@dataclass(frozen=True)
class RegUParams:
    """Exponents (s, s0, r, r0) and the integrability pair (a1, a2) for the u != 0 theorem."""

    s: Number
    s0: Number
    r: Number
    r0: Number
    pair: tuple = (2, math.inf)

    def __post_init__(self):
        s, s0, r, r0 = self.s, self.s0, self.r, self.r0
        if not 0 < s <= Fraction(1, 2):
            raise ExponentDomainError(f"s must lie in (0, 1/2], got {s}")
        if not s <= s0 <= 2 * s:
            raise ExponentDomainError(f"s0 must lie in [s, 2s], got {s0}")
        if not 0 <= r < Fraction(1, 2):
            raise ExponentDomainError(f"r must lie in [0, 1/2), got {r}")
        if not 0 <= r0 <= 2 * r:
            raise ExponentDomainError(f"r0 must lie in [0, 2r], got {r0}")
        if tuple(self.pair) not in ((2, math.inf), (math.inf, 2)):
            raise ExponentDomainError("pair must be (2, inf) or (inf, 2)")


def reg0_i_exponent(params: KineticParams) -> Number:
    """Time-space order gained in H^s_{t,x} H^{-3/2}_v (velocity averaging form)."""
    a, b, k, l = map(_exact, (params.alpha, params.beta, params.k, params.l))
    if l > b:
        raise ExponentDomainError(f"requires 0 <= l <= beta, got l={l}, beta={b}")
    den = 2 * (1 + b + 2 * k - l)
    if den <= 0:
        raise ExponentDomainError("nonpositive denominator")
    return _simplify((1 - a) * (1 + 2 * k) / den)


def reg0_ii_exponent(params: KineticParams) -> Number:
    """Time-space order gained by f itself in L^2_v H^s_{t,x}."""
    a, b, k, l = map(_exact, (params.alpha, params.beta, params.k, params.l))
    if l > 1 + b:
        raise ExponentDomainError(f"requires 0 <= l <= 1 + beta, got l={l}")
    den = 1 + b + 2 * k - l
    if den <= 0:
        # only reachable with k = 0 and l = 1 + beta: no velocity regularity, no gain
        return 0
    return _simplify((1 - a) * k / den)


def regp_sup_exponent(params: KineticParams, p, q, p_prime, q_prime):
    """Strict upper bound on s for D_x^s f in L^{p'}_{t,x} L^{q'}_v; Infeasible if <= 0."""
    if p_prime < p or q_prime < q:
        raise ValueError("need p' >= p and q' >= q")
    if p < 1 or q < 1:
        raise ValueError("need p, q >= 1")
    a, b, k = map(_exact, (params.alpha, params.beta, params.k))
    d = _exact(params.d)
    base = 1 + b + k
    dp = _recip(p_prime) - _recip(p)
    dq = _recip(q_prime) - _recip(q)
    bound = (1 - a) * k / base + dp * (d + (a + b + k) / base) + dq * d * (1 - a) / base
    bound = _simplify(bound)
    if bound <= 0:
        return Infeasible(bound, "integrability gain exceeds the differentiability budget")
    return bound


def regu_conditions(params: KineticParams, u_params: RegUParams) -> dict:
    """The three admissibility conditions of the u != 0 theorem, individually."""
    a, b, k, l = map(_exact, (params.alpha, params.beta, params.k, params.l))
    s, s0, r, r0 = map(_exact, (u_params.s, u_params.s0, u_params.r, u_params.r0))
    threshold = (1 - a) * (k + r) / (1 + b + 2 * k - l)
    return {
        "interpolation": r0 * s + s0 * r >= 2 * r * s,
        "l_range": 0 <= l <= 1 - 2 * r + b,
        "s_range": 0 <= s <= threshold,
        "threshold": _simplify(threshold),
    }


def regu_admissible(params: KineticParams, u_params: RegUParams) -> bool:
    c = regu_conditions(params, u_params)
    return bool(c["interpolation"] and c["l_range"] and c["s_range"])


def burgers_instance(eps, s0) -> tuple:
    """Parameters used to lift Burgers with rough transport into the u != 0 theorem.

    Returns ``(params, u_params)`` with alpha = eps^2, beta = 1 + eps^2,
    k = r = 1/2 - eps, l = 0, r0 = 1/2 - 5 eps/2 and s = s0 - eps.
    """
    eps, s0 = _exact(eps), _exact(s0)
    params = KineticParams(alpha=eps**2, beta=1 + eps**2, lam=1, k=Fraction(1, 2) - eps, l=0)
    u_params = RegUParams(s=s0 - eps, s0=s0, r=Fraction(1, 2) - eps, r0=Fraction(1, 2) - 5 * eps / 2)
    return params, u_params


def gkol_instance(sigma, delta) -> tuple:
    """alpha = 0, beta = k = l = sigma, r = 1/2 - delta/2 and the resulting threshold s'."""
    sigma, delta = _exact(sigma), _exact(delta)
    params = KineticParams(alpha=0, beta=sigma, lam=1, k=sigma, l=sigma)
    r = Fraction(1, 2) - delta / 2
    threshold = (1 - params.alpha) * (params.k + r) / (1 + params.beta + 2 * params.k - params.l)
    return params, r, _simplify(threshold)


def classical_avg_exponent(alpha, beta, p) -> Number:
    """Classical averaging gain (1 - alpha) / ((1 + beta) p*) for p in (1, 2]."""
    if not 1 < p <= 2:
        raise ExponentDomainError(f"classical averaging is stated for p in (1, 2], got {p}")
    a, b = _exact(alpha), _exact(beta)
    return _simplify((1 - a) / ((1 + b) * _exact(conjugate_exponent(_exact(p)))))


def kolmogorov_order(params: KineticParams) -> Number:
    """sigma = (alpha + beta + k) / (1 - alpha), so that (1 + sigma) alpha + beta = sigma - k."""
    a, b, k = map(_exact, (params.alpha, params.beta, params.k))
    if a == 1:
        raise ExponentDomainError("alpha = 1 leaves no room for a Kolmogorov order")
    return _simplify((a + b + k) / (1 - a))


def gg0_kappa(d, sigma, p0, q0) -> Number:
    """Integrability loss of the Kolmogorov kernel in L^{p0}_x L^{q0}_v."""
    d, sigma = _exact(d), _exact(sigma)
    if sigma <= 0:
        raise ExponentDomainError("sigma must be positive")
    kappa = (d - d * _recip(p0)) * (1 + 1 / sigma) + (d - d * _recip(q0)) / sigma
    return _simplify(kappa)


def kernel_decay_power(d, sigma, alpha0, beta0, p0, q0) -> Number:
    """Exponent of t in ||D_x^alpha0 D_v^beta0 G(t)||_{L^p0 L^q0} ~ t^power."""
    sigma = _exact(sigma)
    return _simplify(-(_exact(gg0_kappa(d, sigma, p0, q0)) + _exact(alpha0) * (1 + 1 / sigma) + _exact(beta0) / sigma))


def cauchy_omegas(params: KineticParams, p, q, p_prime, q_prime, s):
    """Solve the two linear relations for (omega, omega'); Infeasible unless both > 0."""
    sigma = _exact(kolmogorov_order(params))
    d, k, s = _exact(params.d), _exact(params.k), _exact(s)
    ip, iq, ipp, iqq = _recip(p), _recip(q), _recip(p_prime), _recip(q_prime)
    common = (1 + sigma) * s + d * (1 + sigma) * (ip - ipp) + d * (iq - iqq)
    omega = sigma * ipp - common
    omega_p = k - common - sigma * (ip - ipp)
    omega, omega_p = _simplify(omega), _simplify(omega_p)
    if omega <= 0 or omega_p <= 0:
        return Infeasible(min(omega, omega_p), f"omega={omega}, omega'={omega_p}")
    return omega, omega_p


class SupBound(NamedTuple):
    value: Number
    strict: bool


def gkol_s_range(sigma, s0) -> SupBound:
    """Supremum of admissible s for the fractional Kolmogorov equation with transport.

    The cap sigma/(1+2 sigma) is attained; for sigma <= 1/2 the transport
    constraint s0 sigma/((1-sigma)(1+2 sigma)) is strict, so the range is open
    exactly when that constraint binds.
    """
    sigma, s0 = _exact(sigma), _exact(s0)
    if sigma <= 0 or s0 <= 0:
        raise ExponentDomainError("sigma and s0 must be positive")
    cap = sigma / (1 + 2 * sigma)
    if sigma <= Fraction(1, 2):
        other = s0 * sigma / ((1 - sigma) * (1 + 2 * sigma))
        return SupBound(_simplify(min(cap, other)), other <= cap)
    other = s0 * min(1, sigma)
    return SupBound(_simplify(min(cap, other)), False)


def gkol_s_sup(sigma, s0) -> Number:
    return gkol_s_range(sigma, s0).value


def kol_sobolev_range() -> tuple:
    """(lower, upper] for the second-order case sigma = 1 with matrix coefficients."""
    return 0, gkol_s_sup(1, Fraction(1, 3))
