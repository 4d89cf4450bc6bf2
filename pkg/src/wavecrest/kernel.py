"""Euclidean two-point-function model and the variance integral.

Lengths are measured in units of the wavelength scale 1/T, so a ball of radius
r becomes a ball of radius R = rT and the covariance between two points at
scaled distance u is ``normalized_kernel(n, u)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import special
from scipy.optimize import brentq

from . import rng
from .errors import BudgetError, DomainError
from .quadrature import integrate
from .specfun import normalized_kernel

SECOND_MOMENT_MC_MIN = 1_000
SECOND_MOMENT_MC_RTOL = 0.05
CSV_HEADER = ("n", "T", "eta", "r", "rT", "method", "estimate", "std_error", "seed")


class Estimate(NamedTuple):
    """Monte Carlo mean with its standard error."""

    value: float
    std_error: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class WaveModel:
    """Dimension, frequency, window, ball radius and manifold volume."""

    n: int
    T: float
    eta: float
    r: float
    vol_m: float = 1.0

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("dimension n must be >= 2")
        if min(self.T, self.eta, self.r, self.vol_m) <= 0:
            raise DomainError("T, eta, r and vol_m must be positive")
        if self.eta > math.sqrt(self.T):
            raise DomainError("window eta must not exceed sqrt(T)")
        if self.rT <= 1:
            raise DomainError("need rT > 1")

    @property
    def rT(self) -> float:
        return self.r * self.T


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n: int) -> float:
    """Surface measure of S^(n-1) in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def weyl_count(model: WaveModel) -> float:
    """Main term vol(M) |B_n| / (2 pi)^n * n T^(n-1) eta of the window count."""
    n = model.n
    return model.vol_m * unit_ball_volume(n) / (2 * math.pi) ** n * n * model.T ** (n - 1) * model.eta


def kernel_value(model: WaveModel, d):
    """Bessel main term of the two-point function at distance d <= 2r."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0) or np.any(d > 2 * model.r * (1 + 1e-12)):
        raise DomainError("distance must lie in [0, 2r]")
    out = weyl_count(model) / model.vol_m * normalized_kernel(model.n, model.T * d)
    return float(out) if np.ndim(out) == 0 else out


def distance_density(n: int, R: float, u):
    """Density of |x - x'| for x, x' independent and uniform in a ball of radius R.

    Equals n u^(n-1) / R^n * I_{1 - u^2/(4R^2)}((n+1)/2, 1/2) on [0, 2R].
    """
    u = np.asarray(u, dtype=float)
    z = np.clip(1.0 - u * u / (4 * R * R), 0.0, 1.0)
    return n * u ** (n - 1) / R**n * special.betainc(0.5 * (n + 1), 0.5, z)


def second_moment_radial(n: int, rT: float, order: int = 16) -> float:
    """I_2 as a one-dimensional integral against the pair-distance density."""
    if rT <= 0:
        raise DomainError("rT must be positive")

    # u = 2 rT sin(psi) removes the (1 - u^2/4rT^2)^((n+1)/2) endpoint
    # singularity of the density, which is not smooth for even n
    def f(psi):
        u = 2 * rT * np.sin(psi)
        return normalized_kernel(n, u) ** 2 * distance_density(n, rT, u) * 2 * rT * np.cos(psi)

    # panels about pi/2 wide in u; a tiny ball needs a single panel
    width = min(math.pi / 2, math.pi / (4 * rT))
    return integrate(f, 0.0, math.pi / 2, width=width, order=order)


def uniform_ball(gen: np.random.Generator, size: int, n: int, radius: float = 1.0) -> np.ndarray:
    """Uniform points in a ball: Gaussian direction times radius U^(1/n)."""
    g = gen.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * gen.random((size, 1)) ** (1.0 / n))


def _moments(parts) -> Estimate:
    """Combine per-chunk (count, sum, sum of squares) into a mean and its error."""
    arr = np.array(parts, dtype=float)
    count, s1, s2 = arr.sum(axis=0)
    mean = s1 / count
    var = max(s2 / count - mean * mean, 0.0) * count / (count - 1)
    return Estimate(float(mean), math.sqrt(var / count))


def second_moment_mc(n: int, rT: float, budget: int, seed: int, threads: int | None = None) -> Estimate:
    """Monte Carlo I_2 from ``budget`` independent point pairs in the ball."""
    if budget < SECOND_MOMENT_MC_MIN:
        raise DomainError(f"budget must be >= {SECOND_MOMENT_MC_MIN}")

    def chunk(gen, size):
        x = uniform_ball(gen, size, n, rT)
        y = uniform_ball(gen, size, n, rT)
        f = normalized_kernel(n, np.linalg.norm(x - y, axis=1)) ** 2
        return size, f.sum(), np.dot(f, f)

    est = _moments(rng.map_chunks(chunk, budget, seed, threads))
    if est.std_error > SECOND_MOMENT_MC_RTOL * abs(est.value):
        raise BudgetError(f"relative standard error {est.std_error / abs(est.value):.3g} exceeds 5%")
    return est


def second_moment(model: WaveModel, method: str = "radial_quadrature", budget: int = 1_000_000,
                  seed: int = 0, threads: int | None = None) -> float:
    """Normalized variance integral I_2 = mean of normalized_kernel(n, T|x - x'|)^2 over B x B."""
    if method == "radial_quadrature":
        return second_moment_radial(model.n, model.rT)
    if method == "monte_carlo":
        return second_moment_mc(model.n, model.rT, budget, seed, threads).value
    raise DomainError(f"unknown method {method!r}")


def bessel_square_average(nu: float, S: float) -> float:
    """(1/S) int_0^S u J_nu(u)^2 du."""
    if nu < 0:
        raise DomainError("nu must be >= 0")
    if S < 10:
        raise DomainError("S must be >= 10")
    return integrate(lambda u: u * special.jv(nu, u) ** 2, 0.0, S) / S


def uniform_cap(gen: np.random.Generator, size: int, r: float) -> np.ndarray:
    """Uniform unit vectors in the polar cap of angular radius r."""
    z = 1.0 - gen.random(size) * 2.0 * math.sin(0.5 * r) ** 2
    phi = 2 * math.pi * gen.random(size)
    s = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def sphere_kernel(m: int, cosd):
    """Exact degree-m reproducing kernel of S^2: (2m+1)/(4 pi) P_m(cos d)."""
    return (2 * m + 1) / (4 * math.pi) * special.eval_legendre(m, np.clip(cosd, -1.0, 1.0))


def kernel_trace_integral(p: int, m: int, r: float, budget: int, seed: int,
                          threads: int | None = None) -> Estimate:
    """Monte Carlo value of the cyclic integral of K(x1,x2) ... K(xp,x1) over a cap of S^2."""
    if p not in (2, 3):
        raise DomainError("p must be 2 or 3")
    if not 1 <= m <= 64:
        raise DomainError("m must lie in [1, 64]")
    if not 0 < r <= math.pi:
        raise DomainError("r must lie in (0, pi]")
    if budget < SECOND_MOMENT_MC_MIN:
        raise DomainError(f"budget must be >= {SECOND_MOMENT_MC_MIN}")
    vol = 4 * math.pi * math.sin(0.5 * r) ** 2

    def chunk(gen, size):
        pts = [uniform_cap(gen, size, r) for _ in range(p)]
        f = np.ones(size)
        for i in range(p):
            f *= sphere_kernel(m, np.einsum("ij,ij->i", pts[i], pts[(i + 1) % p]))
        return size, f.sum(), np.dot(f, f)

    est = _moments(rng.map_chunks(chunk, budget, seed, threads))
    est = Estimate(est.value * vol**p, est.std_error * vol**p)
    if est.std_error > SECOND_MOMENT_MC_RTOL * abs(est.value):
        raise BudgetError(f"relative standard error {est.std_error / abs(est.value):.3g} exceeds 5%")
    return est


def first_kernel_zero(n: int, T: float) -> float:
    """Smallest d > 0 where the Bessel main term vanishes, by bracketing on a grid."""
    u = np.linspace(0.5, 20.0, 4000)
    f = normalized_kernel(n, u)
    i = int(np.nonzero(np.sign(f[1:]) != np.sign(f[:-1]))[0][0])
    return brentq(lambda x: normalized_kernel(n, x), u[i], u[i + 1], xtol=1e-14) / T


def csv_row(model: WaveModel, method: str, estimate: float, std_error: float, seed: int) -> tuple:
    return (model.n, model.T, model.eta, model.r, model.rT, method, estimate, std_error, seed)

