"""Named, reproducible experiments with built-in assertions.

Each experiment takes a flat parameter dict and returns an :class:`Outcome`
holding CSV rows, a JSON-ready summary and a list of :class:`Check` results.
The command line front end in :mod:`wavecrest.cli` only parses parameters and
writes files.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import __version__, rng
from .errors import DomainError, TruncationWarning
from .kernel import kernel_trace_integral, second_moment_mc, second_moment_radial
from .mcwave import clt_experiment, tail_experiment, tail_slope
from .quadform import lyapunov_ratio, qf_mean, qf_sigma
from .specfun import addition_formula_sum, bessel_ratio
from .sphere2 import SphereSpec, semicircle_table, spectrum, wave_scale_diagnostic
from .trimoment import default_k_max, third_moment_bound, third_moment_mc

VERSION = f"v{__version__}"


@dataclass(frozen=True)
class Param:
    kind: str  # int, float, str, ints, floats
    default: object
    help: str = ""

    def parse(self, text):
        if not isinstance(text, str):
            return text
        text = text.strip()
        if self.kind == "str":
            return text
        if self.kind == "int":
            return int(text)
        if self.kind == "float":
            return float(text)
        parts = [p for p in text.replace(" ", "").split(",") if p]
        if not parts:
            raise ValueError("empty list")
        conv = int if self.kind == "ints" else float
        return tuple(conv(p) for p in parts)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


@dataclass
class Outcome:
    header: tuple
    rows: list
    summary: dict
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _sphere(p) -> SphereSpec:
    if p.get("r") is not None and not math.isnan(p["r"]):
        return SphereSpec(p["m"], p["r"])
    return SphereSpec.from_kappa(p["m"], p["kappa"])


def run_semicircle(p) -> Outcome:
    spec = _sphere(p)
    table = semicircle_table(spec)
    kap = spec.kappa
    ks = np.array([row[0] for row in table])
    ex = np.array([row[1] for row in table])
    sc = np.array([row[3] for row in table])
    bulk = ks <= 0.8 * kap
    rel = float(np.max(np.abs(ex[bulk] - sc[bulk]) / sc[bulk]))
    edge = ks > kap + 3 * kap ** (1 / 3)
    edge_ratio = float(np.max(ex[edge] / ex[0])) if edge.any() else 0.0
    total = float(ex[0] + 2 * ex[1:].sum())
    checks = [
        Check("semicircle bulk", rel < 0.15, f"max relative error {rel:.4g} for k <= 0.8 kappa (< 0.15)"),
        Check("semicircle edge", edge_ratio < 1e-6,
              f"max lambda_k/lambda_0 {edge_ratio:.3g} for k > kappa + 3 kappa^(1/3) (< 1e-6)"),
        Check("sum rule", abs(total - 1 / (4 * math.pi)) < 1e-8,
              f"|sum - 1/(4 pi)| = {abs(total - 1 / (4 * math.pi)):.3g} (< 1e-8)"),
    ]
    summary = {"m": spec.m, "r": spec.r, "kappa": kap, "bulk_rel_error": rel, "edge_ratio": edge_ratio}
    return Outcome(("k", "lambda_exact", "lambda_bessel", "semicircle"), table, summary, checks)


def admissible_t(spec, t_grid):
    """Points of ``t_grid`` inside the convergence disk of the standardized series."""
    limit = qf_sigma(spec) / (2 * spec.lambda_max)
    return tuple(t for t in t_grid if abs(t) < limit)


def run_clt(p) -> Outcome:
    spec = spectrum(_sphere(p))
    t_grid = admissible_t(spec, p["t"])
    res = clt_experiment(spec, p["samples"], p["seed"], t_grid, p["threads"])
    band = 3 / math.sqrt(p["samples"])
    worst = max((abs(r.empirical - r.exact) for r in res.charfn_grid), default=0.0)
    checks = [
        Check("gaussian fit", res.ks_distance < p["ks_max"],
              f"KS distance {res.ks_distance:.4g} (< {p['ks_max']:g})"),
        Check("charfn sampler", worst <= band,
              f"max |empirical - exact| {worst:.3g} on t = {list(t_grid)} (<= {band:.3g})"),
    ]
    rows = [(r.t, r.empirical.real, r.empirical.imag, r.exact.real, r.exact.imag, r.gaussian)
            for r in res.charfn_grid]
    summary = res.to_dict()
    summary["lyapunov_ratio"] = lyapunov_ratio(spec)
    summary["dropped_t"] = [t for t in p["t"] if t not in t_grid]
    return Outcome(("t", "empirical_re", "empirical_im", "exact_re", "exact_im", "gaussian"),
                   rows, summary, checks)


def run_scaling2(p) -> Outcome:
    n = p["n"]
    grid = p["rT"]
    vals = [second_moment_radial(n, x) for x in grid]
    rows = [(n, x, "radial_quadrature", v, 0.0) for x, v in zip(grid, vals)]
    slope = _slope(grid, vals)
    checks = [Check("second-moment slope", abs(slope + (n - 1)) <= 0.15,
                    f"slope {slope:.4f} vs {-(n - 1)} (+-0.15)")]
    for x in p["mc_rT"]:
        est = second_moment_mc(n, x, p["samples"], p["seed"], p["threads"])
        quad = second_moment_radial(n, x)
        rows.append((n, x, "monte_carlo", est.value, est.std_error))
        z = abs(est.value - quad) / est.std_error
        checks.append(Check(f"second-moment cross-method rT={x:g}", z <= 3, f"{z:.2f} standard errors (<= 3)"))
    return Outcome(("n", "rT", "method", "estimate", "std_error"), rows, {"n": n, "slope": slope}, checks)


def run_scaling3(p) -> Outcome:
    n = p["n"]
    grid = p["rT"]
    rows, bounds = [], []
    checks = []
    for x in grid:
        k_max = p["k_max"] or default_k_max(x)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            b = third_moment_bound(n, x, k_max)
        bounds.append(b)
        est = third_moment_mc(n, x, p["samples"], p["seed"], p["threads"])
        rows.append((n, x, k_max, b, est.value, est.std_error))
        checks.append(Check(f"third-moment dominance rT={x:g}", abs(est.value) <= b,
                            f"|mc| {abs(est.value):.4g} <= bound {b:.4g}"))
    slope = _slope(grid, bounds)
    target = -1.5 * n + 1
    checks.insert(0, Check("third-moment slope", abs(slope - target) <= 0.3,
                           f"slope {slope:.4f} vs {target:g} (+-0.3)"))
    mc_slope = _slope(grid, [abs(r[4]) for r in rows])
    return Outcome(("n", "rT", "k_max", "bound", "mc_estimate", "mc_std_error"), rows,
                   {"n": n, "bound_slope": slope, "mc_slope": mc_slope}, checks)


def run_tail(p) -> Outcome:
    spec = spectrum(_sphere(p))
    res = tail_experiment(spec, p["samples"], p["seed"], p["y"], p["threads"])
    n = p["samples"]
    checks = []
    for r in res.tail_rows:
        slack = 3 * math.sqrt(max(r.frequency, 1 / n) * (1 - r.frequency) / n)
        checks.append(Check(f"tail y={r.y:g}", r.frequency <= 2 * r.chernoff + slack,
                            f"frequency {r.frequency:.4g} <= 2 x {r.chernoff:.4g} + {slack:.2g}"))
    slope = tail_slope(res.tail_rows)
    checks.append(Check("tail decay", slope <= -0.3, f"slope of log frequency vs y^2 {slope:.4f} (<= -0.3)"))
    rows = [(r.y, r.frequency, r.chernoff, r.upper_95, r.count) for r in res.tail_rows]
    summary = res.to_dict()
    summary["slope"] = slope
    summary["mean"] = qf_mean(spec)
    return Outcome(("y", "frequency", "chernoff", "upper_95", "count"), rows, summary, checks)


def run_gegencheck(p) -> Outcome:
    gen = rng.stream(p["seed"], 0)
    count = p["samples"]
    nu = gen.uniform(0.1, 5.0, count)
    u = gen.uniform(0.1, 50.0, count)
    v = gen.uniform(0.1, 50.0, count)
    th = gen.uniform(0.0, math.pi, count)
    rows = []
    for a, b, c, d in zip(nu, u, v, th):
        w = math.sqrt(max(b * b + c * c - 2 * b * c * math.cos(d), 0.0))
        series = addition_formula_sum(a, b, c, d)
        rows.append((a, b, c, d, series, bessel_ratio(a, w), abs(series - bessel_ratio(a, w))))
    worst = max(r[-1] for r in rows)
    checks = [Check("addition formula", worst < 1e-9, f"max residual {worst:.3g} over {count} triples (< 1e-9)")]
    return Outcome(("nu", "u", "v", "theta", "series", "direct", "residual"), rows,
                   {"max_residual": worst}, checks)


def run_kernelcheck(p) -> Outcome:
    n = p["n"]
    rows, checks = [], []
    for x in p["rT"]:
        quad = second_moment_radial(n, x)
        est = second_moment_mc(n, x, p["samples"], p["seed"], p["threads"])
        z = abs(est.value - quad) / est.std_error
        rows.append(("second_moment", n, x, quad, est.value, est.std_error))
        checks.append(Check(f"I2 radial vs MC n={n} rT={x:g}", z <= 3, f"{z:.2f} standard errors (<= 3)"))
    sphere = SphereSpec(p["m"], p["r"])
    spec = spectrum(sphere)
    for power in (2, 3):
        exact = ((2 * sphere.m + 1) * sphere.cap_volume) ** power * spec.power_sum(power)
        est = kernel_trace_integral(power, sphere.m, sphere.r, p["samples"], p["seed"], p["threads"])
        z = abs(est.value - exact) / est.std_error
        rows.append((f"trace_p{power}", 2, sphere.kappa, exact, est.value, est.std_error))
        checks.append(Check(f"trace identity p={power}", z <= 3, f"{z:.2f} standard errors (<= 3)"))
    return Outcome(("quantity", "n", "scale", "reference", "mc_estimate", "mc_std_error"), rows, {}, checks)


def run_wavescale(p) -> Outcome:
    c = p["kappa"]
    diag = wave_scale_diagnostic(c, p["m"])
    rows, checks = [], []
    for m, ratio in diag:
        spec = spectrum(SphereSpec.from_kappa(m, c))
        share = spec.lambda_max / qf_mean(spec)
        rows.append((m, c, ratio, share))
        checks.append(Check(f"wave scale m={m}", ratio > 0.1 and share > 0.3,
                            f"lyapunov ratio {ratio:.4f} (> 0.1), lambda_0 share {share:.4f} (> 0.3)"))
    return Outcome(("m", "kappa", "lyapunov_ratio", "lambda0_share"), rows, {"kappa": c}, checks)


_COMMON = {
    "seed": Param("int", 0, "64-bit seed"),
    "threads": Param("int", 0, "worker threads, 0 for all cores"),
    "out_path": Param("str", "", "CSV path, default <out>/<experiment>.csv"),
}

EXPERIMENTS = {
    "semicircle": (run_semicircle, {
        "m": Param("int", 128), "kappa": Param("float", 51.857), "r": Param("float", math.nan)}),
    "clt": (run_clt, {
        "m": Param("int", 256), "kappa": Param("float", 60.0), "r": Param("float", math.nan),
        "samples": Param("int", 10_000), "t": Param("floats", (0.5, 1.0, 2.0)),
        "ks_max": Param("float", 0.02)}),
    "scaling2": (run_scaling2, {
        "n": Param("int", 3), "rT": Param("floats", (20.0, 40.0, 80.0, 160.0, 320.0)),
        "mc_rT": Param("floats", (20.0, 80.0)), "samples": Param("int", 1_000_000)}),
    "scaling3": (run_scaling3, {
        "n": Param("int", 3), "rT": Param("floats", (20.0, 40.0, 80.0, 160.0)),
        "samples": Param("int", 20_000_000), "k_max": Param("int", 0)}),
    "tail": (run_tail, {
        "m": Param("int", 256), "kappa": Param("float", 60.0), "r": Param("float", math.nan),
        "samples": Param("int", 1_000_000), "y": Param("floats", (1.0, 2.0, 3.0))}),
    "gegencheck": (run_gegencheck, {"samples": Param("int", 1_000)}),
    "kernelcheck": (run_kernelcheck, {
        "n": Param("int", 3), "rT": Param("floats", (20.0, 80.0)), "samples": Param("int", 1_000_000),
        "m": Param("int", 8), "r": Param("float", 0.5)}),
    "wavescale": (run_wavescale, {
        "kappa": Param("float", 2.0), "m": Param("ints", (32, 64, 128, 256))}),
}


def schema(name: str) -> dict[str, Param]:
    if name not in EXPERIMENTS:
        raise DomainError(f"unknown experiment {name!r}")
    return {**EXPERIMENTS[name][1], **_COMMON}


def resolve(name: str, overrides: dict) -> dict:
    """Defaults of ``name`` updated with ``overrides``; unknown keys raise KeyError."""
    sch = schema(name)
    unknown = sorted(set(overrides) - set(sch))
    if unknown:
        raise KeyError(f"unknown parameter(s) for {name}: {', '.join(unknown)}")
    params = {k: prm.default for k, prm in sch.items()}
    for k, v in overrides.items():
        params[k] = sch[k].parse(v)
    params["threads"] = params["threads"] or None
    return params


def run(name: str, params: dict) -> Outcome:
    return EXPERIMENTS[name][0](params)
