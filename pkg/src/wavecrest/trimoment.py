"""Third-moment machinery for balls in R^n.

Fix x1 in the ball at scaled distance w rT from the centre and write
x2 = x1 + s alpha, x3 = x1 + rho beta with unit vectors alpha, beta. The point
x2 stays in the ball iff alpha lies in a spherical cap around -x1/|x1| whose
cosine threshold depends on (w, s/rT). Gegenbauer's addition formula splits the
middle kernel J(T|x2 - x3|) into products J_{nu+k}(Ts) J_{nu+k}(T rho) times
C_k^nu(alpha . beta), and the double cap integral of C_k^nu decays in k.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import calibration, rng
from .errors import BudgetError, DomainError, TruncationWarning
from .kernel import Estimate, _moments, uniform_ball, unit_ball_volume, unit_sphere_area
from .quadrature import gauss_legendre, panel_rule
from .specfun import cap_moment, gegenbauer_at_one, gegenbauer_table, normalized_kernel

TAIL_RTOL = 1e-12
THIRD_MOMENT_MC_MIN = 10_000
THIRD_MOMENT_MC_RTOL = 0.10
THIRD_MOMENT_MC_FLOOR = 1e-8
CSV_HEADER = ("n", "rT", "k_max", "bound", "mc_estimate", "mc_std_error", "seed")


def cap_threshold(w: float, u_over_rT: float) -> float:
    """Cosine threshold of the cap of directions alpha that keep x1 + s alpha in the ball."""
    if not 0 <= w <= 1:
        raise DomainError("w must lie in [0, 1]")
    if u_over_rT <= 0:
        raise DomainError("u/rT must be positive")
    if w == 0:
        return -1.0 if u_over_rT <= 1 else 1.0
    if u_over_rT > 1 + w + 1e-12:
        raise DomainError("u/rT must not exceed 1 + w")
    t = (u_over_rT**2 + w * w - 1.0) / (2 * w * u_over_rT)
    return min(1.0, max(-1.0, t))


@dataclass(frozen=True)
class CapPair:
    """Scaled centre offset w, scaled distances u = Ts and v = T rho, and rT."""

    w: float
    u: float
    v: float
    rT: float

    def __post_init__(self):
        if not 0 <= self.w <= 1:
            raise DomainError("w must lie in [0, 1]")
        if min(self.u, self.v, self.rT) <= 0:
            raise DomainError("u, v and rT must be positive")
        top = (1 + self.w) * self.rT * (1 + 1e-12)
        if self.u > top or self.v > top:
            raise DomainError("u and v must not exceed (1 + w) rT")

    @property
    def thresholds(self) -> tuple[float, float]:
        return cap_threshold(self.w, self.u / self.rT), cap_threshold(self.w, self.v / self.rT)


def _angle_rule(theta_max: float, k: int, order: int = 16):
    # C_k(cos phi) oscillates on the scale pi/k in phi
    return panel_rule(0.0, theta_max, width=min(math.pi / 4, math.pi / (k + 1)), order=order)


def _outer_integral(n: int, k: int, t_a: float, t_b: float) -> float:
    """Funk-Hecke inner integral, outer integral over the alpha-cap by quadrature in angle."""
    nu = n / 2 - 1
    if t_a >= 1 or t_b >= 1:
        return 0.0
    s = unit_sphere_area(n - 1)
    inner = s * cap_moment(k, nu, t_b) / gegenbauer_at_one(k, nu)
    phi, wts = _angle_rule(math.acos(t_a), k)
    ck = gegenbauer_table(k, nu, np.cos(phi))[k]
    return float(inner * s * np.dot(wts, ck * np.sin(phi) ** (n - 2)))


def _chi_nodes(phi: np.ndarray, t_b: float, panels: int, order: int):
    """Per-row quadrature in chi on [0, pi] split where |t_b| meets cos(phi, chi).

    Both outer segments are graded towards the split point chi*: near it the
    integrand has a square-root kink, and when chi* = pi/2 the geodesic angle
    swings through pi over a chi-window of width about |cos phi|.
    """
    c2 = np.cos(phi) ** 2
    s2 = np.sin(phi) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.sqrt(np.clip((t_b * t_b - c2) / s2, 0.0, 1.0))
    q = np.nan_to_num(q)
    star = np.arccos(q)
    # width of the fastest feature next to chi*
    eps = np.clip(np.sqrt(c2 + t_b * t_b) / np.maximum(np.sqrt(s2), 1e-300), 1e-12, None)[:, None]
    length = star[:, None]
    beta = np.log1p(length / eps)
    u = np.linspace(0.0, 1.0, panels + 1)
    t, w = gauss_legendre(0.0, 1.0, order)
    sig = (u[:-1, None] + (u[1:] - u[:-1])[:, None] * t[None, :]).ravel()[None, :]
    sw = ((u[1:] - u[:-1])[:, None] * w[None, :]).ravel()[None, :]
    # distance from chi*: x = eps (exp(beta sig^2) - 1), smooth in sig at both ends
    e = np.exp(beta * sig * sig)
    x = eps * (e - 1.0)
    dx = eps * e * 2 * beta * sig * sw
    mid_t, mid_w = gauss_legendre(0.0, 1.0, order)
    mid = star[:, None] + (np.pi - 2 * star)[:, None] * mid_t[None, :]
    mid_wt = (np.pi - 2 * star)[:, None] * mid_w[None, :]
    nodes = np.concatenate([star[:, None] - x, mid, np.pi - star[:, None] + x], axis=1)
    weights = np.concatenate([dx, mid_wt, dx], axis=1)
    return nodes, weights


def _polar_integral(n: int, k: int, t_a: float, t_b: float, order: int = 24, panels: int = 4) -> float:
    """Cap integral with the inner integral in polar coordinates around alpha.

    For alpha at angle phi from the cap axis and a direction chi on the
    S^(n-2) of directions at alpha, the beta-cap meets the geodesic from alpha
    in an arc of distances theta; the antiderivative is evaluated at its ends.
    """
    nu = n / 2 - 1
    if t_a >= 1 or t_b >= 1:
        return 0.0
    full = cap_moment(k, nu, -1.0)
    # alpha crossing the boundary of the beta-cap, or its antipode crossing it
    breaks = [math.acos(t_b), math.acos(-t_b)]
    phi, wp = panel_rule(0.0, math.acos(t_a), width=min(math.pi / 4, math.pi / (k + 1)),
                         order=order, breaks=breaks)
    X, wc = _chi_nodes(phi, t_b, panels, order)
    c = np.cos(phi)[:, None]
    s = np.sin(phi)[:, None] * np.cos(X)
    amp = np.hypot(c, s)
    delta = np.arctan2(s, c)
    ratio = np.divide(t_b, amp, out=np.full_like(amp, np.inf), where=amp > 0)
    half = np.arccos(np.clip(ratio, -1.0, 1.0))

    def g(theta):
        # weighted integral of C_k over geodesic distances [0, theta] from alpha
        return np.where(theta >= math.pi, full, np.where(theta <= 0.0, 0.0,
                        cap_moment(k, nu, np.cos(np.clip(theta, 0.0, math.pi)))))

    # admissible distances satisfy |theta - delta| <= half modulo 2 pi
    inner = np.zeros_like(amp)
    for shift in (-2 * math.pi, 0.0, 2 * math.pi):
        lo = np.clip(delta - half + shift, 0.0, math.pi)
        hi = np.clip(delta + half + shift, 0.0, math.pi)
        inner += g(hi) - g(lo)
    inner = np.where(ratio > 1.0, 0.0, inner)
    if n == 3:
        dir_weight = 2.0 * np.ones_like(X)
    else:
        dir_weight = unit_sphere_area(n - 2) * np.sin(X) ** (n - 3)
    inner_avg = np.sum(inner * wc * dir_weight, axis=1)
    outer = unit_sphere_area(n - 1) * np.sin(phi) ** (n - 2)
    return float(np.dot(wp * outer, inner_avg))


def cap_integral_thresholds(n: int, k: int, t_a: float, t_b: float, method: str = "antiderivative") -> float:
    """Double integral of C_k^nu(alpha . beta) over the caps {alpha . z >= t_a} and {beta . z >= t_b}."""
    if n < 3:
        raise DomainError("n must be >= 3")
    if k < 1:
        raise DomainError("k must be >= 1")
    if method == "antiderivative":
        # the formula is symmetric; integrate over the smaller cap in the outer variable
        lo, hi = sorted((t_a, t_b))
        return _outer_integral(n, k, hi, lo)
    if method == "polar":
        return _polar_integral(n, k, t_a, t_b)
    raise DomainError(f"unknown method {method!r}")


def cap_gegenbauer_integral(n: int, k: int, caps: CapPair, method: str = "antiderivative") -> float:
    """Double cap integral of C_k^nu(alpha . beta), nu = n/2 - 1, for the caps of ``caps``."""
    t_a, t_b = caps.thresholds
    return cap_integral_thresholds(n, k, t_a, t_b, method)


def _cap_points(gen: np.random.Generator, size: int, n: int, t: float) -> np.ndarray:
    """Uniform points in the cap {x . e_1 >= t} of S^(n-1)."""
    a = 0.5 * (n - 1)
    lo = special.betainc(a, a, 0.5 * (1.0 + t))
    first = 2.0 * special.betaincinv(a, a, lo + (1.0 - lo) * gen.random(size)) - 1.0
    rest = gen.standard_normal((size, n - 1))
    rest /= np.linalg.norm(rest, axis=1, keepdims=True)
    rest *= np.sqrt(np.clip(1.0 - first * first, 0.0, None))[:, None]
    return np.column_stack([first, rest])


def cap_area(n: int, t: float) -> float:
    """Measure of {x in S^(n-1): x . e_1 >= t}."""
    a = 0.5 * (n - 1)
    return unit_sphere_area(n) * (1.0 - special.betainc(a, a, 0.5 * (1.0 + t)))


def cap_integral_mc(n: int, k: int, t_a: float, t_b: float, budget: int, seed: int,
                    threads: int | None = None) -> Estimate:
    """Monte Carlo cap integral from points sampled uniformly inside each cap."""
    nu = n / 2 - 1
    scale = cap_area(n, t_a) * cap_area(n, t_b)

    def chunk(gen, size):
        a = _cap_points(gen, size, n, t_a)
        b = _cap_points(gen, size, n, t_b)
        f = gegenbauer_table(k, nu, np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0))[k]
        return size, f.sum(), np.dot(f, f)

    est = _moments(rng.map_chunks(chunk, budget, seed, threads))
    return Estimate(est.value * scale, est.std_error * scale)


def cap_decay_constant(n: int) -> float:
    """Calibrated C with |cap integral| <= C k^(n/2 - 3) for all caps and k >= 1."""
    return calibration.get(f"cap_C_n{n}")


def bessel_cross_integral(nu: float, m: float, X: float, order: int = 16) -> float:
    """Signed integral of u J_nu(u) J_m(u) over [0, X], panels no wider than pi."""
    if nu < 0 or m < nu:
        raise DomainError("need 0 <= nu <= m")
    if not 0 < X <= 1e5:
        raise DomainError("X must lie in (0, 1e5]")
    u, w = panel_rule(0.0, X, width=min(math.pi, X), order=order)
    return float(np.dot(w, u * special.jv(nu, u) * special.jv(m, u)))


def default_k_max(rT: float) -> int:
    """Gegenbauer truncation past the turning point of J_{nu+k} at u = 2rT."""
    x = 2.0 * rT
    return math.ceil(x + 12.0 * x ** (1 / 3)) + 20


def third_moment_prefactor(n: int, rT: float) -> float:
    """Geometric constant in front of the Gegenbauer sum, including the w-integral 1/n."""
    nu = n / 2 - 1
    c = math.gamma(nu + 1) * 2.0**nu
    return (unit_sphere_area(n) * c**3 * 2.0**nu * math.gamma(nu)
            / (n * unit_ball_volume(n) ** 3) * rT ** (-2 * n))


def third_moment_terms(n: int, rT: float, k_max: int, order: int = 16) -> np.ndarray:
    """Summands (nu+k) C k^(n/2-3) (int_0^{2rT} u J_nu J_{nu+k})^2 for k = 1..k_max."""
    nu = n / 2 - 1
    u, w = panel_rule(0.0, 2.0 * rT, width=math.pi / 2, order=order)
    ks = np.arange(1, k_max + 1)
    cross = _cross_integrals(nu, k_max, u, w * u * special.jv(nu, u))
    return (nu + ks) * cap_decay_constant(n) * ks ** (n / 2 - 3) * cross**2


def _cross_integrals(nu: float, k_max: int, u: np.ndarray, base: np.ndarray) -> np.ndarray:
    """dot(base, J_{nu+k}(u)) for k = 1..k_max.

    Forward recurrence is used where u > nu + k, where it is stable. Below the
    turning point J_{nu+k} is evaluated directly inside a window of width
    12 k^(1/3) + 10 and set to zero further out, where it is below 1e-30.
    """
    prev = special.jv(nu, u)
    cur = special.jv(nu + 1, u)
    out = np.empty(k_max)
    for k in range(1, k_max + 1):
        if k > 1:
            prev, cur = cur, 2 * (nu + k - 1) / u * cur - prev
        order = nu + k
        below = u <= order
        cur[below] = 0.0
        near = below & (u > order - 12.0 * order ** (1 / 3) - 10.0)
        cur[near] = special.jv(order, u[near])
        out[k - 1] = np.dot(base, cur)
    return out


def third_moment_bound(n: int, rT: float, k_max: int | None = None) -> float:
    """Upper bound for the normalized third moment of the Bessel kernel on a ball.

    Evaluates the Gegenbauer expansion over k >= 1 with each cap integral
    replaced by its calibrated bound C k^(n/2-3) and the offset integral taken
    at its worst case w = 1.
    """
    if n < 3:
        raise DomainError("the Gegenbauer route needs n >= 3")
    if rT <= 0:
        raise DomainError("rT must be positive")
    if k_max is None:
        k_max = default_k_max(rT)
    if k_max < math.ceil(2 * rT) + 20:
        raise DomainError("k_max must be >= ceil(2 rT) + 20")
    terms = third_moment_terms(n, rT, k_max)
    total = terms.sum()
    if terms[-1] > TAIL_RTOL * total:
        warnings.warn(f"k_max={k_max} leaves a tail term {terms[-1] / total:.2e} of the total",
                      TruncationWarning, stacklevel=2)
    return float(third_moment_prefactor(n, rT) * total)


def third_moment_mc(n: int, rT: float, budget: int, seed: int, threads: int | None = None) -> Estimate:
    """Monte Carlo mean of the kernel triangle product over three points in the ball."""
    if n < 2:
        raise DomainError("n must be >= 2")
    if budget < THIRD_MOMENT_MC_MIN:
        raise DomainError(f"budget must be >= {THIRD_MOMENT_MC_MIN}")

    def chunk(gen, size):
        x1, x2, x3 = (uniform_ball(gen, size, n, rT) for _ in range(3))
        f = normalized_kernel(n, np.linalg.norm(x1 - x2, axis=1))
        f *= normalized_kernel(n, np.linalg.norm(x2 - x3, axis=1))
        f *= normalized_kernel(n, np.linalg.norm(x3 - x1, axis=1))
        return size, f.sum(), np.dot(f, f)

    est = _moments(rng.map_chunks(chunk, budget, seed, threads))
    if est.std_error > THIRD_MOMENT_MC_RTOL * abs(est.value) and abs(est.value) > THIRD_MOMENT_MC_FLOOR:
        raise BudgetError(f"relative standard error {est.std_error / abs(est.value):.3g} exceeds 10%")
    return est

