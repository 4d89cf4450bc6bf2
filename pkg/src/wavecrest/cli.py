"""Command line runner for the named experiments.

    wavecrest semicircle --m 128 --kappa 51.857
    wavecrest run --config experiments.ini [--experiment clt]

Exit status is 0 when every built-in check passes, 1 when a check fails and 2
for configuration errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .experiments import EXPERIMENTS, VERSION
from .errors import BudgetError, DomainError

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
DEFAULT_OUT = "wavecrest_out"


class ConfigError(Exception):
    pass


def output_dir(flag: str | None) -> Path:
    if flag:
        return Path(flag)
    return Path(os.environ.get("WAVECREST_OUT", DEFAULT_OUT))


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def write_outputs(name: str, params: dict, outcome, out: Path) -> tuple[Path, Path]:
    out.mkdir(parents=True, exist_ok=True)
    csv_path = Path(params["out_path"]) if params["out_path"] else out / f"{name}.csv"
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(outcome.header) + ["seed", "version"])
        for row in outcome.rows:
            w.writerow([_fmt(x) for x in row] + [params["seed"], VERSION])
    json_path = csv_path.with_suffix(".json")
    shown = {k: v for k, v in params.items() if k not in ("threads", "out_path")}
    summary = {
        "experiment": name,
        "version": VERSION,
        "seed": params["seed"],
        "params": shown,
        "passed": outcome.passed,
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in outcome.checks],
        "summary": outcome.summary,
    }
    json_path.write_text(json.dumps(_jsonable(summary), sort_keys=True, indent=2, allow_nan=True) + "\n")
    return csv_path, json_path


def execute(name: str, overrides: dict, out_flag: str | None) -> int:
    try:
        params = experiments.resolve(name, overrides)
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc).strip("'\"")) from None
    outcome = experiments.run(name, params)
    csv_path, _ = write_outputs(name, params, outcome, output_dir(out_flag))
    for check in outcome.checks:
        print(f"[{name}] {check.line()}")
    print(f"[{name}] wrote {csv_path}")
    return EXIT_OK if outcome.passed else EXIT_FAIL


def read_config(path: str) -> dict[str, dict[str, str]]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} not found")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(p.read_text())
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    sections = {s: dict(parser[s]) for s in parser.sections()}
    for s in sections:
        if s not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment section [{s}] in {path}")
    return sections


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavecrest", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=str, help="64-bit seed recorded in every output row")
        p.add_argument("--threads", type=str, help="worker threads (1 forces serial)")
        p.add_argument("--out", help="output directory (default $WAVECREST_OUT or ./wavecrest_out)")

    run = sub.add_parser("run", help="run experiments from a config file or by name")
    run.add_argument("--config", help="INI file with one [section] per experiment")
    run.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    common(run)
    for name, (_, params) in EXPERIMENTS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        common(p)
        for key, prm in params.items():
            p.add_argument(f"--{key}", type=str, help=f"{prm.kind}, default {prm.default}")
        p.add_argument("--out_path", type=str, help="CSV path")
    return parser


def _flag_overrides(ns, keys) -> dict:
    return {k: getattr(ns, k) for k in keys if getattr(ns, k, None) is not None}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    common = _flag_overrides(ns, ("seed", "threads"))
    try:
        if ns.command == "run":
            if ns.config:
                sections = read_config(ns.config)
                if ns.experiment:
                    if ns.experiment not in sections:
                        raise ConfigError(f"no [{ns.experiment}] section in {ns.config}")
                    sections = {ns.experiment: sections[ns.experiment]}
                if not sections:
                    raise ConfigError(f"{ns.config} defines no experiments")
            elif ns.experiment:
                sections = {ns.experiment: {}}
            else:
                raise ConfigError("run needs --config or --experiment")
            status = EXIT_OK
            for name, values in sections.items():
                status = max(status, execute(name, {**values, **common}, ns.out))
            return status
        keys = list(EXPERIMENTS[ns.command][1]) + ["out_path"]
        return execute(ns.command, {**_flag_overrides(ns, keys), **common}, ns.out)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, BudgetError) as exc:
        # parameters the numerics cannot honour are configuration problems too
        print(f"parameter error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
