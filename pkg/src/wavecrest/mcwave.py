"""Monte Carlo experiments on standardized local energies.

Samples are drawn from the diagonalised quadratic form and compared with the
standard normal law (Kolmogorov-Smirnov distance, characteristic function) and
with Chernoff tail bounds. :func:`direct_cap_energy` instead synthesises the
random spherical harmonic on a grid and integrates it over the cap, which
checks the diagonalisation itself.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import rng
from .errors import DomainError, QuadratureError
from .quadform import (Spectrum, chernoff_lower_tail, chernoff_tail, qf_charfn_standardized,
                       qf_mean, qf_sigma, sample_qf)
from .quadrature import gauss_legendre
from .sphere2 import legendre_orders

MIN_SAMPLES = 1_000
DIRECT_MAX_DEGREE = 32
DIRECT_MIN_SAMPLES = 100
PARSEVAL_TOL = 1e-6


@dataclass(frozen=True)
class CharfnRow:
    t: float
    empirical: complex
    exact: complex
    gaussian: float


@dataclass(frozen=True)
class TailRow:
    y: float
    frequency: float
    chernoff: float
    # one-sided 95% Clopper-Pearson upper limit on the exceedance probability
    upper_95: float
    count: int


@dataclass
class MCResult:
    n_samples: int
    seed: int
    ks_distance: float = math.nan
    charfn_grid: list[CharfnRow] = field(default_factory=list)
    tail_rows: list[TailRow] = field(default_factory=list)
    generator: str = rng.GENERATOR

    def to_dict(self) -> dict:
        d = asdict(self)
        for row in d["charfn_grid"]:
            row["empirical"] = [row["empirical"].real, row["empirical"].imag]
            row["exact"] = [row["exact"].real, row["exact"].imag]
        return d

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    def charfn_csv(self, path, version: str = "") -> None:
        rows = [(r.t, r.empirical.real, r.empirical.imag, r.exact.real, r.exact.imag, r.gaussian)
                for r in self.charfn_grid]
        _write_csv(path, ("t", "empirical_re", "empirical_im", "exact_re", "exact_im", "gaussian"),
                   rows, self.seed, version)

    def tail_csv(self, path, version: str = "") -> None:
        rows = [(r.y, r.frequency, r.chernoff, r.upper_95, r.count) for r in self.tail_rows]
        _write_csv(path, ("y", "frequency", "chernoff", "upper_95", "count"), rows, self.seed, version)


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _write_csv(path, header, rows, seed: int, version: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header) + ["seed", "version"])
        for row in rows:
            w.writerow([_fmt(x) for x in row] + [seed, version])


def sample_standardized(spec: Spectrum, n_samples: int, seed: int, threads: int | None = None) -> np.ndarray:
    """(X - E X) / sd(X) for ``n_samples`` draws of the quadratic form."""
    if n_samples < MIN_SAMPLES:
        raise DomainError(f"n_samples must be >= {MIN_SAMPLES}")
    x = sample_qf(spec, seed, n_samples, threads)
    return (x - qf_mean(spec)) / qf_sigma(spec)


def ks_distance(z: np.ndarray) -> float:
    """Sup distance between the empirical CDF of ``z`` and the standard normal CDF."""
    return float(stats.kstest(z, "norm").statistic)


def empirical_charfn(z: np.ndarray, t: float) -> complex:
    return complex(np.mean(np.exp(1j * t * z)))


def clt_experiment(spec: Spectrum, n_samples: int, seed: int, t_grid=(0.5, 1.0, 2.0),
                   threads: int | None = None) -> MCResult:
    """KS distance to N(0, 1) and the characteristic function on ``t_grid``."""
    # exact values first, so an out-of-range t fails before sampling
    exact = [qf_charfn_standardized(spec, float(t)) for t in t_grid]
    z = sample_standardized(spec, n_samples, seed, threads)
    rows = [CharfnRow(float(t), empirical_charfn(z, float(t)), e, math.exp(-0.5 * float(t) ** 2))
            for t, e in zip(t_grid, exact)]
    return MCResult(n_samples, seed, ks_distance(z), charfn_grid=rows)


def clopper_pearson_upper(count: int, n: int, level: float = 0.95) -> float:
    if count >= n:
        return 1.0
    return float(stats.beta.ppf(level, count + 1, n - count))


def two_sided_chernoff(spec: Spectrum, epsilon: float) -> float:
    """Chernoff bound on P(|X - E X| >= epsilon), upper and lower tails summed."""
    return min(1.0, chernoff_tail(spec, epsilon).bound + chernoff_lower_tail(spec, epsilon))


def tail_experiment(spec: Spectrum, n_samples: int, seed: int, y_grid=(1.0, 2.0, 3.0),
                    threads: int | None = None) -> MCResult:
    """Two-sided exceedance frequencies of |Z| >= y against Chernoff bounds."""
    if any(y <= 0 for y in y_grid):
        raise DomainError("y_grid must be positive")
    z = np.abs(sample_standardized(spec, n_samples, seed, threads))
    sigma = qf_sigma(spec)
    rows = []
    for y in y_grid:
        count = int(np.count_nonzero(z >= y))
        rows.append(TailRow(float(y), count / n_samples, two_sided_chernoff(spec, y * sigma),
                            clopper_pearson_upper(count, n_samples), count))
    return MCResult(n_samples, seed, tail_rows=rows)


def tail_slope(rows) -> float:
    """Least-squares slope of log frequency against y^2 over rows with exceedances."""
    pts = [(r.y**2, math.log(r.frequency)) for r in rows if r.frequency > 0]
    if len(pts) < 2:
        raise DomainError("need at least two rows with exceedances")
    a = np.array(pts)
    return float(np.polyfit(a[:, 0], a[:, 1], 1)[0])


def harmonic_basis(m: int, x: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Real orthonormal degree-m harmonics on the product grid x (cos theta) by phi.

    Rows are ordered as order 0, then cosine and sine for orders 1..m; columns
    run over the grid in x-major order.
    """
    P = legendre_orders(m, x)
    out = [np.outer(P[0], np.full(phi.size, 1.0 / math.sqrt(2 * math.pi)))]
    for k in range(1, m + 1):
        out.append(np.outer(P[k], np.cos(k * phi)) / math.sqrt(math.pi))
        out.append(np.outer(P[k], np.sin(k * phi)) / math.sqrt(math.pi))
    return np.array([o.ravel() for o in out])


def _cap_grid(m: int, r: float):
    # 4m Gauss-Legendre nodes in cos(theta) over the cap, 4m equispaced azimuths
    x, wx = gauss_legendre(math.cos(r), 1.0, 4 * m)
    phi = 2 * math.pi * np.arange(4 * m) / (4 * m)
    w = np.outer(wx, np.full(phi.size, 2 * math.pi / phi.size)).ravel()
    return harmonic_basis(m, x, phi), w


def cap_energy(m: int, r: float, coeffs: np.ndarray) -> np.ndarray:
    """(1/vol B) times the integral of phi^2 over the cap, one value per coefficient row."""
    coeffs = np.atleast_2d(coeffs)
    Y, w = _cap_grid(m, r)
    vol = 4 * math.pi * math.sin(0.5 * r) ** 2
    return (coeffs @ Y) ** 2 @ w / vol


def _parseval_check(m: int, coeffs: np.ndarray) -> None:
    Y, w = _cap_grid(m, math.pi)
    full = (coeffs @ Y) ** 2 @ w
    target = np.sum(coeffs**2, axis=1)
    err = float(np.max(np.abs(full - target) / target))
    if not err <= PARSEVAL_TOL:
        raise QuadratureError(f"full-sphere integral misses Parseval by {err:.3g}")


def direct_cap_energy(m: int, r: float, seed: int, n_samples: int, threads: int | None = None) -> np.ndarray:
    """Cap energies of random degree-m harmonics synthesised and integrated on a grid.

    Coefficients are independent N(0, 1/(2m+1)), so the full-sphere energy has
    mean 1.
    """
    if not 1 <= m <= DIRECT_MAX_DEGREE:
        raise DomainError(f"m must lie in [1, {DIRECT_MAX_DEGREE}]")
    if not 0 < r <= math.pi:
        raise DomainError("r must lie in (0, pi]")
    if n_samples < DIRECT_MIN_SAMPLES:
        raise DomainError(f"n_samples must be >= {DIRECT_MIN_SAMPLES}")
    dim = 2 * m + 1

    def chunk(gen, size):
        return gen.standard_normal((size, dim)) / math.sqrt(dim)

    coeffs = np.concatenate(rng.map_chunks(chunk, n_samples, seed, threads))
    _parseval_check(m, coeffs)
    return cap_energy(m, r, coeffs)
