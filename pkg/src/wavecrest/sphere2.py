"""Cap-energy spectra of degree-m random spherical harmonics on S^2.

With the cap B of radius r centred on the pole, the real harmonics
P_m^k(cos t) cos(k phi), P_m^k(cos t) sin(k phi) diagonalise the form
(1/vol B) int_B phi^2, so the eigenvalue of azimuthal order k is

    lambda_k = ratio_k / ((2m+1) vol B),
    ratio_k  = int_{cos r}^1 Pbar_m^k(x)^2 dx      (int_{-1}^1 Pbar^2 = 1),

once for k = 0 and twice for 1 <= k <= m. The integrand is a polynomial of
degree 2m in x, so an (m+1)-point Gauss-Legendre rule on [cos r, 1] is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError
from .quadform import Spectrum, lyapunov_ratio
from .quadrature import gauss_legendre

# eigenvalues below this are clamped so the spectrum stays strictly positive
LAMBDA_FLOOR = np.finfo(float).tiny
_RESCALE = 1e100


@dataclass(frozen=True)
class SphereSpec:
    m: int
    r: float

    def __post_init__(self):
        if self.m < 1:
            raise DomainError("degree m must be >= 1")
        if not 0 < self.r <= math.pi:
            raise DomainError("cap radius must lie in (0, pi]")

    @classmethod
    def from_kappa(cls, m: int, kappa: float) -> "SphereSpec":
        return cls(m, kappa / (m + 0.5))

    @property
    def kappa(self) -> float:
        return self.r * (self.m + 0.5)

    @property
    def cap_volume(self) -> float:
        return 4 * math.pi * math.sin(0.5 * self.r) ** 2


def legendre_orders_scaled(m: int, x, one_minus_x=None):
    """Orthonormal associated Legendre functions Pbar_m^k(x) for k = 0..m.

    Returns ``(mant, logscale)`` with Pbar_m^k(x_i) = mant[k, i] * exp(logscale[k, i]).
    The recurrence runs upward in degree for all orders at once, starting from
    the sectoral values in log form and renormalising whenever a mantissa
    exceeds 1e100.
    """
    x = np.asarray(x, dtype=float)
    omx = 1.0 - x if one_minus_x is None else np.asarray(one_minus_x, dtype=float)
    sin2 = omx * (1.0 + x)
    k = np.arange(m + 1, dtype=float)[:, None]
    with np.errstate(divide="ignore"):
        logscale = (0.5 * np.log(k + 0.5) + 0.5 * special.gammaln(2 * k + 1)
                    - k * math.log(2.0) - special.gammaln(k + 1)
                    + 0.5 * k * np.log(sin2)[None, :])
    logscale = np.broadcast_to(logscale, (m + 1, x.size)).copy()
    cur = np.ones((m + 1, x.size))
    prev = np.zeros_like(cur)
    for l in range(1, m + 1):
        kk = k[:l]
        a = np.sqrt((4.0 * l * l - 1.0) / (l * l - kk * kk))
        b = np.sqrt(((l - 1.0) ** 2 - kk * kk) / (4.0 * (l - 1.0) ** 2 - 1.0)) if l > 1 else 0.0
        new = a * (x * cur[:l] - b * prev[:l])
        prev[:l] = cur[:l]
        cur[:l] = new
        big = np.abs(new) > _RESCALE
        if big.any():
            scale = np.where(big, np.abs(new), 1.0)
            cur[:l] /= scale
            prev[:l] /= scale
            logscale[:l] += np.log(scale)
    return cur, logscale


def legendre_orders(m: int, x) -> np.ndarray:
    """Pbar_m^k(x) for k = 0..m as a (m+1, len(x)) array (may underflow to 0)."""
    mant, logscale = legendre_orders_scaled(m, np.atleast_1d(x))
    with np.errstate(under="ignore"):
        return mant * np.exp(logscale)


@lru_cache(maxsize=32)
def _log_ratios(m: int, r: float) -> np.ndarray:
    t, w = gauss_legendre(-1.0, 1.0, m + 1)
    one_minus_c = 2.0 * math.sin(0.5 * r) ** 2
    x = 1.0 - one_minus_c * 0.5 * (1.0 - t)
    omx = one_minus_c * 0.5 * (1.0 - t)
    w = w * 0.5 * one_minus_c
    mant, logscale = legendre_orders_scaled(m, x, omx)
    with np.errstate(divide="ignore"):
        lg = 2.0 * np.log(np.abs(mant)) + 2.0 * logscale + np.log(w)[None, :]
    out = special.logsumexp(lg, axis=1)
    out.setflags(write=False)
    return out


def log_lambda_exact_all(spec: SphereSpec) -> np.ndarray:
    """log lambda_k for k = 0..m."""
    return _log_ratios(spec.m, float(spec.r)) - math.log((2 * spec.m + 1) * spec.cap_volume)


def lambda_exact_all(spec: SphereSpec) -> np.ndarray:
    with np.errstate(under="ignore"):
        return np.exp(log_lambda_exact_all(spec))


def lambda_exact(spec: SphereSpec, k: int) -> float:
    """Eigenvalue of azimuthal order k from the exact radial ratio."""
    if not 0 <= k <= spec.m:
        raise DomainError("order k must lie in [0, m]")
    return float(lambda_exact_all(spec)[k])


def bessel_square_integral(k, X):
    """int_0^X x J_k(x)^2 dx = X^2/2 (J_k(X)^2 - J_{k-1}(X) J_{k+1}(X))."""
    k = np.asarray(k, dtype=float)
    jk = special.jv(k, X)
    return 0.5 * X * X * (jk * jk - special.jv(k - 1, X) * special.jv(k + 1, X))


def lambda_bessel(spec: SphereSpec, k) -> float | np.ndarray:
    """Bessel approximation (1/(2 pi kappa^2)) int_0^kappa x J_k(x)^2 dx."""
    kap = spec.kappa
    out = bessel_square_integral(k, kap) / (2 * math.pi * kap * kap)
    return float(out) if np.ndim(out) == 0 else out


def semicircle_prediction(k, kappa: float):
    """(1/(2 pi^2 kappa)) sqrt(1 - (k/kappa)^2), zero for k >= kappa."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise DomainError("k must be >= 0")
    val = np.sqrt(np.clip(1.0 - (k / kappa) ** 2, 0.0, None)) / (2 * math.pi**2 * kappa)
    return float(val) if val.ndim == 0 else val


def _pair(orders: np.ndarray) -> np.ndarray:
    return np.concatenate([orders[:1], np.repeat(orders[1:], 2)])


def spectrum(spec: SphereSpec, method: str = "exact") -> Spectrum:
    """The 2m+1 eigenvalues, order 0 once and orders 1..m twice, descending."""
    if method == "exact":
        orders = lambda_exact_all(spec)
    elif method == "bessel":
        orders = np.asarray(lambda_bessel(spec, np.arange(spec.m + 1)))
    else:
        raise DomainError(f"unknown method {method!r}")
    return Spectrum(np.maximum(_pair(orders), LAMBDA_FLOOR))


def moment_sum_asymptotic(p: int, kappa: float) -> float:
    """Main term (2/(2 pi^2)^p) kappa^(1-p) int_0^1 (1-u^2)^(p/2) du."""
    if not 2 <= p <= 10:
        raise DomainError("p must lie in [2, 10]")
    integral = 0.5 * special.beta(0.5, 0.5 * p + 1)
    return 2.0 / (2 * math.pi**2) ** p * kappa ** (1 - p) * integral


def wave_scale_diagnostic(c: float, m_list) -> list[tuple[int, float]]:
    """Lyapunov ratio of the exact spectrum at fixed kappa = c for each m."""
    if not 0 < c <= 10:
        raise DomainError("c must lie in (0, 10]")
    return [(int(m), lyapunov_ratio(spectrum(SphereSpec.from_kappa(int(m), c)))) for m in m_list]


def semicircle_table(spec: SphereSpec) -> list[tuple[int, float, float, float]]:
    """Rows (k, lambda_exact, lambda_bessel, semicircle) for k = 0..m."""
    ks = np.arange(spec.m + 1)
    ex = lambda_exact_all(spec)
    bs = lambda_bessel(spec, ks)
    sc = semicircle_prediction(ks, spec.kappa)
    return [(int(k), float(a), float(b), float(c)) for k, a, b, c in zip(ks, ex, bs, sc)]
