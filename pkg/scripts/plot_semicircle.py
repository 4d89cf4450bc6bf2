"""Render the semicircle comparison from a semicircle.csv written by the CLI.

    wavecrest semicircle --m 128 --kappa 51.857 --out out/
    python scripts/plot_semicircle.py out/semicircle.csv semicircle.png

Needs matplotlib (``pip install -e .[plot]``); the package itself does not.
"""

from __future__ import annotations

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("png")
    ns = ap.parse_args(argv)
    data = np.genfromtxt(ns.csv, delimiter=",", names=True, dtype=None, encoding="utf-8")
    k = data["k"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(k, data["lambda_exact"], ".", ms=4, label="exact")
    ax.plot(k, data["lambda_bessel"], "-", lw=1, label="Bessel")
    ax.plot(k, data["semicircle"], "--", lw=1, label="semicircle")
    ax.set_xlabel("order k")
    ax.set_ylabel(r"$\lambda_k$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(ns.png, dpi=150)


if __name__ == "__main__":
    main()
