"""Bessel and ultraspherical special functions.

Bessel J of real order is delegated to ``scipy.special.jv`` (AMOS), wrapped
with the supported envelope nu <= 1e4, x <= 1e6. The orthogonal polynomials,
the cap antiderivative, the Szego approximation and the three-regime Bessel
bounds are implemented here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import calibration
from .errors import DomainError

NU_MAX = 1.0e4
X_MAX = 1.0e6
K_MAX = 10_000
# exponent offset in the regime split m -/+ m**(1/3 + DELTA)
DELTA = 0.1
# above this degree rising factorials are evaluated through log-gamma
RISING_EXACT_MAX = 150
LOG_MAX_FLOAT = math.log(np.finfo(float).max)


def _check_unit_interval(x):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0):
        raise DomainError("argument must lie in [-1, 1]")
    return x


def bessel_j(nu, x):
    """J_nu(x) for real nu >= 0 and x >= 0 (scalars or arrays)."""
    nu_a = np.asarray(nu, dtype=float)
    x_a = np.asarray(x, dtype=float)
    if np.any(nu_a < 0) or np.any(nu_a > NU_MAX):
        raise DomainError(f"order must lie in [0, {NU_MAX:g}]")
    if np.any(x_a < 0) or np.any(x_a > X_MAX):
        raise DomainError(f"argument must lie in [0, {X_MAX:g}]")
    out = special.jv(nu_a, x_a)
    return float(out) if out.ndim == 0 else out


def normalized_kernel(n: int, u):
    """2^(n/2-1) Gamma(n/2) J_{n/2-1}(u) / u^(n/2-1); equals 1 at u = 0."""
    if n < 2:
        raise DomainError("dimension n must be >= 2")
    nu = n / 2 - 1
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise DomainError("u must be >= 0")
    small = u < 1e-3
    us = np.where(small, 1.0, u)
    if n == 3:
        big = np.sin(us) / us
    else:
        big = math.gamma(nu + 1) * 2.0**nu * bessel_j(nu, us) / us**nu
    # two-term ascending series near the origin
    q = 0.25 * u * u
    series = 1.0 - q / (nu + 1) + q * q / (2 * (nu + 1) * (nu + 2))
    out = np.where(small, series, big)
    return float(out) if out.ndim == 0 else out


def log_rising_factorial(a: float, k: int) -> float:
    return float(special.gammaln(a + k) - special.gammaln(a))


def rising_factorial(a: float, k: int) -> float:
    """Pochhammer symbol (a)_k = a (a+1) ... (a+k-1)."""
    if k <= RISING_EXACT_MAX:
        return float(math.prod(a + i for i in range(k))) if k else 1.0
    lr = log_rising_factorial(a, k)
    return math.inf if lr > LOG_MAX_FLOAT else math.exp(lr)


def gegenbauer_table(k_max: int, nu: float, x) -> np.ndarray:
    """Rows C_0^nu(x), ..., C_{k_max}^nu(x) by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((k_max + 1,) + x.shape)
    out[0] = 1.0
    if k_max >= 1:
        out[1] = 2 * nu * x
    for k in range(1, k_max):
        out[k + 1] = (2 * (k + nu) * x * out[k] - (k + 2 * nu - 1) * out[k - 1]) / (k + 1)
    return out


def gegenbauer(k: int, nu: float, x):
    """Gegenbauer polynomial C_k^nu(x) on [-1, 1]."""
    if k < 0 or k > K_MAX:
        raise DomainError(f"degree must lie in [0, {K_MAX}]")
    if nu <= 0:
        raise DomainError("nu must be > 0")
    x = _check_unit_interval(x)
    prev = np.ones_like(x)
    if k == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 2 * nu * x
    for j in range(1, k):
        prev, cur = cur, (2 * (j + nu) * x * cur - (j + 2 * nu - 1) * prev) / (j + 1)
    return float(cur) if cur.ndim == 0 else cur


def gegenbauer_at_one(k: int, nu: float) -> float:
    """C_k^nu(1) = (2 nu)_k / k!."""
    if k <= RISING_EXACT_MAX:
        return rising_factorial(2 * nu, k) / math.factorial(k)
    return math.exp(log_rising_factorial(2 * nu, k) - special.gammaln(k + 1))


def jacobi(k: int, a: float, b: float, x):
    """Jacobi polynomial P_k^(a,b)(x) by the standard three-term recurrence."""
    if k < 0 or k > K_MAX:
        raise DomainError(f"degree must lie in [0, {K_MAX}]")
    if a <= -1 or b <= -1:
        raise DomainError("Jacobi parameters must exceed -1")
    x = _check_unit_interval(x)
    prev = np.ones_like(x)
    if k == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = 0.5 * (a - b) + 0.5 * (a + b + 2) * x
    for n in range(1, k):
        s = 2 * n + a + b
        c1 = 2 * (n + 1) * (n + a + b + 1) * s
        c2 = (s + 1) * (a * a - b * b)
        c3 = s * (s + 1) * (s + 2)
        c4 = 2 * (n + a) * (n + b) * (s + 2)
        prev, cur = cur, ((c2 + c3 * x) * cur - c4 * prev) / c1
    return float(cur) if cur.ndim == 0 else cur


def cap_antiderivative(k: int, nu: float, x):
    """Antiderivative of C_k^nu(x) (1-x^2)^(nu-1/2) that vanishes at x = +-1.

    Equals -(1/2k) (4 nu / (2 nu + k)) (1-x^2)^(nu+1/2) C_{k-1}^{nu+1}(x).
    """
    if k < 1:
        raise DomainError("the closed form needs k >= 1")
    x = _check_unit_interval(x)
    w = np.clip(1.0 - x * x, 0.0, None) ** (nu + 0.5)
    out = -(0.5 / k) * (4 * nu / (2 * nu + k)) * w * gegenbauer(k - 1, nu + 1, x)
    return float(out) if np.ndim(out) == 0 else out


def cap_moment(k: int, nu: float, t):
    """Signed weighted cap integral of C_k^nu(x) (1-x^2)^(nu-1/2) over [t, 1].

    For k = 0 this is the (unnormalised) cap measure, via the incomplete beta
    function; for k >= 1 it is ``-cap_antiderivative(k, nu, t)``.
    """
    t = _check_unit_interval(t)
    if k == 0:
        a = nu + 0.5
        full = 2.0 ** (2 * nu) * special.beta(a, a)
        out = full * (1.0 - special.betainc(a, a, 0.5 * (1.0 + t)))
        return float(out) if np.ndim(out) == 0 else out
    return -cap_antiderivative(k, nu, t)


def _szego_rhs(k: int, nu: float, theta):
    a = nu - 0.5
    N = k + nu
    scale = math.exp(special.gammaln(k + a + 1) - special.gammaln(k + 1) - a * math.log(N))
    return scale * np.sqrt(theta / np.sin(theta)) * special.jv(a, N * theta)


def szego_pair(k: int, nu: float, theta):
    """Both sides of Szego's Hilb-type formula for ultraspherical Jacobi polynomials.

    With a = nu - 1/2 and N = k + nu, returns
    ``(sin(theta)/2)^a P_k^(a,a)(cos theta)`` and
    ``N^-a Gamma(k+a+1)/k! (theta/sin theta)^(1/2) J_a(N theta)``.
    Their difference is O(theta^(1/2) k^(-3/2)) for theta in [1/k, pi/2].
    """
    a = nu - 0.5
    theta = np.asarray(theta, dtype=float)
    lhs = (0.5 * np.sin(theta)) ** a * jacobi(k, a, a, np.cos(theta))
    return lhs, _szego_rhs(k, nu, theta)


def szego_gegenbauer(k: int, nu: float, theta):
    """Large-degree approximation of C_k^nu(cos theta) built on :func:`szego_pair`."""
    a = nu - 0.5
    theta = np.asarray(theta, dtype=float)
    conv = math.exp(log_rising_factorial(2 * nu, k) - log_rising_factorial(nu + 0.5, k))
    return conv * _szego_rhs(k, nu, theta) / (0.5 * np.sin(theta)) ** a


class Regime(enum.Enum):
    below_turning = "below_turning"
    transition = "transition"
    oscillatory = "oscillatory"


@dataclass(frozen=True)
class BesselRegimeBound:
    regime: Regime
    value: float


def kapteyn_exponent(x: float) -> float:
    """log x + sqrt(1-x^2) - log(1 + sqrt(1-x^2)); |J_m(m x)| <= exp(m * this)."""
    if not 0 < x <= 1:
        raise DomainError("x must lie in (0, 1]")
    s = math.sqrt(1.0 - x * x)
    return math.log(x) + s - math.log1p(s)


def classify_regime(m: float, u: float) -> Regime:
    if m <= 0:
        return Regime.oscillatory
    half_width = m ** (1 / 3 + DELTA)
    if u < m - half_width:
        return Regime.below_turning
    if u > m + half_width:
        return Regime.oscillatory
    return Regime.transition


def bessel_bound(m: float, u: float) -> BesselRegimeBound:
    """Regime-dependent upper bound on |J_m(u)|, never above 1."""
    if m < 0 or u < 0:
        raise DomainError("m and u must be >= 0")
    regime = classify_regime(m, u)
    if regime is Regime.below_turning:
        # u/m can underflow for subnormal u; J_m(u) is then zero in floating point too
        value = 0.0 if u / m == 0 else math.exp(m * kapteyn_exponent(u / m))
    elif regime is Regime.transition:
        value = calibration.get("bessel_transition_C") * m ** (-1 / 3)
    else:
        gap = u * u - m * m
        value = math.inf if gap <= 0 else calibration.get("bessel_oscillatory_C") * gap**-0.25
    return BesselRegimeBound(regime, min(1.0, value))


def addition_formula_sum(nu: float, u: float, v: float, theta: float, terms: int | None = None) -> float:
    """Truncated Gegenbauer addition series for J_nu(w)/w^nu, w^2 = u^2+v^2-2uv cos theta.

    Default truncation keeps ceil(u + v) + 40 terms.
    """
    if nu <= 0:
        raise DomainError("the addition formula needs nu > 0")
    if terms is None:
        terms = math.ceil(u + v) + 40
    k = np.arange(terms)
    c = gegenbauer_table(terms - 1, nu, math.cos(theta))
    ju = special.jv(nu + k, u) / u**nu
    jw = special.jv(nu + k, v) / v**nu
    return float(2.0**nu * math.gamma(nu) * np.sum((nu + k) * ju * jw * c))


def bessel_ratio(nu: float, w):
    """J_nu(w)/w^nu, finite at w = 0."""
    w = np.asarray(w, dtype=float)
    small = w < 1e-3
    ws = np.where(small, 1.0, w)
    q = 0.25 * w * w
    series = (1.0 - q / (nu + 1) + q * q / (2 * (nu + 1) * (nu + 2))) / (2.0**nu * math.gamma(nu + 1))
    out = np.where(small, series, special.jv(nu, ws) / ws**nu)
    return float(out) if out.ndim == 0 else out
