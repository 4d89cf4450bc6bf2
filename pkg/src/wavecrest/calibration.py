"""Calibrated constants for the inequalities that only hold up to a constant.

The constants live in ``data/calibration.txt`` as ``name value`` pairs, one per
line. ``scripts/calibrate.py`` regenerates the file.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

FILENAME = "calibration.txt"


def parse(text: str) -> dict[str, float]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{FILENAME}:{lineno}: expected 'name value', got {raw!r}")
        out[parts[0]] = float(parts[1])
    return out


@lru_cache(maxsize=1)
def constants() -> dict[str, float]:
    text = resources.files("wavecrest").joinpath("data").joinpath(FILENAME).read_text()
    return parse(text)


def get(name: str) -> float:
    try:
        return constants()[name]
    except KeyError:
        raise KeyError(f"calibration constant {name!r} missing from {FILENAME}; "
                       "run scripts/calibrate.py") from None


def format_constants(values: dict[str, float], header: str = "") -> str:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"{k} {v:.17g}" for k, v in values.items()]
    return "\n".join(lines) + "\n"
