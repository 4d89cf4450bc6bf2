"""Quadratic forms z^T A z in independent standard Gaussians.

Everything here depends on A only through its eigenvalues, so a form is
represented by its :class:`Spectrum`; the diagonalised form is
``sum_j lambda_j g_j**2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .errors import DomainError

# tolerance on the discarded tail of the standardized log-characteristic series
CHARFN_TAIL_TOL = 1e-14
CHARFN_MAX_TERMS = 200_000
# sub-block size (rows x eigenvalues) for sampling, bounds peak memory
_BLOCK_ELEMS = 1 << 22
# floor for tail bounds that underflow; still an upper bound and keeps bound > 0
_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class Spectrum:
    """Positive eigenvalues of a quadratic form, stored in descending order."""

    lambdas: np.ndarray = field(repr=False)

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=float).ravel()
        if lam.size == 0:
            raise DomainError("a spectrum needs at least one eigenvalue")
        if not np.all(np.isfinite(lam)) or np.any(lam <= 0):
            raise DomainError("eigenvalues must be finite and strictly positive")
        lam = np.sort(lam)[::-1].copy()
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    def __len__(self):
        return self.lambdas.size

    def __repr__(self):
        return f"Spectrum(n={len(self)}, max={self.lambda_max:.6g}, sum={self.power_sum(1):.6g})"

    @property
    def lambda_max(self) -> float:
        return float(self.lambdas[0])

    def power_sum(self, p: float) -> float:
        """tr(A^p), computed relative to lambda_max to avoid underflow."""
        lm = self.lambda_max
        return float(lm**p * np.sum((self.lambdas / lm) ** p))

    def to_csv(self, path) -> None:
        Path(path).write_text("".join(f"{x:.17g}\n" for x in self.lambdas))

    @classmethod
    def from_csv(cls, path) -> "Spectrum":
        rows = [r.strip() for r in Path(path).read_text().splitlines()]
        return cls(np.array([float(r) for r in rows if r]))

    @classmethod
    def uniform(cls, count: int, total: float = 1.0) -> "Spectrum":
        """``count`` equal eigenvalues summing to ``total``."""
        return cls(np.full(count, total / count))


@dataclass(frozen=True)
class ChernoffReport:
    epsilon: float
    s_used: float
    valid_primary_s: bool
    bound: float


def qf_mean(spec: Spectrum) -> float:
    return spec.power_sum(1)


def qf_variance(spec: Spectrum) -> float:
    return 2.0 * spec.power_sum(2)


def qf_sigma(spec: Spectrum) -> float:
    return math.sqrt(qf_variance(spec))


def log_qf_mgf(spec: Spectrum, s: float) -> float:
    if 1.0 - 2.0 * s * spec.lambda_max <= 0:
        raise DomainError(f"s={s!r} is beyond the MGF abscissa 1/(2 lambda_max)")
    return float(-0.5 * np.sum(np.log1p(-2.0 * s * spec.lambdas)))


def qf_mgf(spec: Spectrum, s: float) -> float:
    """E[exp(s X)] = prod_j (1 - 2 s lambda_j)^(-1/2)."""
    return math.exp(log_qf_mgf(spec, s))


def qf_charfn(spec: Spectrum, t: float) -> complex:
    """Characteristic function of the raw form, by the product formula."""
    return complex(np.exp(-0.5 * np.sum(np.log(1.0 - 2j * t * spec.lambdas))))


def qf_charfn_standardized(spec: Spectrum, t: complex) -> complex:
    """E[exp(i t Z)] for Z = (X - E X)/sd(X), summed as the cumulant series.

    The series sum_{p>=2} tr(A^p) (2 i t / sigma)^p / (2p) converges when
    rho = 2 |t| lambda_max / sigma < 1; terms are added until the bound
    t^2 rho^(P-1) / ((P+1)(1-rho)) on the remainder drops below 1e-14.
    """
    sigma = qf_sigma(spec)
    rho = 2.0 * abs(t) * spec.lambda_max / sigma
    if rho >= 1.0:
        raise DomainError(f"|t|={abs(t):.4g} outside the convergence disk (2|t| lambda_max >= sigma)")
    if t == 0:
        return 1.0 + 0j
    # powers of the normalised spectrum, a_j = lambda_j / lambda_max in (0, 1]
    a = spec.lambdas / spec.lambda_max
    z = 2j * t * spec.lambda_max / sigma
    total = 0j
    ap = a.copy()
    zp = z
    at2 = abs(t) ** 2
    for p in range(2, CHARFN_MAX_TERMS):
        ap = ap * a
        zp = zp * z
        total += zp * float(ap.sum()) / (2 * p)
        if rho == 0 or at2 * rho ** (p - 1) / ((p + 1) * (1 - rho)) < CHARFN_TAIL_TOL:
            break
    else:
        raise DomainError("characteristic series did not reach its tolerance")
    return cmath.exp(total)


def lyapunov_ratio(spec: Spectrum) -> float:
    """tr(A^3) / tr(A^2)^(3/2)."""
    return spec.power_sum(3) / spec.power_sum(2) ** 1.5


def clt_ratio(spec: Spectrum, t: float) -> float:
    """q = 2|t| tr(A^3)^(1/3) / sqrt(2 tr(A^2))."""
    return 2.0 * abs(t) * spec.power_sum(3) ** (1 / 3) / math.sqrt(2.0 * spec.power_sum(2))


def clt_error_bound(spec: Spectrum, t: float) -> float:
    """Geometric-series bound q^3/(1-q) on |log E[e^{itZ}] + t^2/2|."""
    q = clt_ratio(spec, t)
    if q >= 1.0:
        raise DomainError(f"geometric ratio q={q:.4g} >= 1")
    return q**3 / (1.0 - q)


def chernoff_tail(spec: Spectrum, epsilon: float) -> ChernoffReport:
    """Chernoff bound on P(X - E X > epsilon).

    The primary parameter is s = epsilon / (2 tr A^2). When that leaves
    1 - 2 s lambda_max <= 1/2 the fallback s = (tr A^2)^(-1/2) / 4 is used,
    capped at 1/(4 lambda_max).
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    p2 = spec.power_sum(2)
    lmax = spec.lambda_max
    s = epsilon / (2.0 * p2)
    primary = 1.0 - 2.0 * s * lmax > 0.5
    if not primary:
        s = min(0.25 / math.sqrt(p2), 0.25 / lmax)
    log_bound = -s * epsilon - s * qf_mean(spec) + log_qf_mgf(spec, s)
    return ChernoffReport(epsilon, s, primary, _clip_bound(log_bound))


def chernoff_lower_tail(spec: Spectrum, epsilon: float) -> float:
    """Chernoff bound on P(X - E X < -epsilon), from the MGF of -X.

    E[exp(-s X)] = prod (1 + 2 s lambda)^(-1/2) exists for all s >= 0, so the
    quadratic-truncation choice s = epsilon / (2 tr A^2) is always admissible.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    s = epsilon / (2.0 * spec.power_sum(2))
    log_bound = -s * epsilon + s * qf_mean(spec) - 0.5 * float(np.sum(np.log1p(2.0 * s * spec.lambdas)))
    return _clip_bound(log_bound)


def _clip_bound(log_bound: float) -> float:
    return min(1.0, max(_TINY, math.exp(log_bound)))


def _qf_block(lam: np.ndarray):
    block = max(1, _BLOCK_ELEMS // lam.size)

    def draw(gen: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty(size)
        for start in range(0, size, block):
            stop = min(size, start + block)
            g = gen.standard_normal((stop - start, lam.size))
            np.square(g, out=g)
            out[start:stop] = g @ lam
        return out

    return draw


def sample_qf(spec: Spectrum, seed: int, count: int, threads: int | None = None) -> np.ndarray:
    """``count`` draws of sum_j lambda_j g_j^2, deterministic in (seed, count)."""
    if count < 1:
        raise DomainError("count must be >= 1")
    parts = rng.map_chunks(_qf_block(spec.lambdas), count, seed, threads)
    return np.concatenate(parts)
