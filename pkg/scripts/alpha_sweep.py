"""Maxima over time against alpha, and the two-charger minus one-charger deltas.

    QB_WORKERS=4 python scripts/alpha_sweep.py --alphas 0.1 3.0 0.1 --out sweep
"""

import argparse
import os
from pathlib import Path

import numpy as np

from qbattery.cli import write_csv
from qbattery.experiments import alpha_sweep
from qbattery.svgplot import line_plot


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alphas", type=float, nargs=3, default=(0.1, 3.0, 0.1), metavar=("START", "STOP", "STEP"))
    ap.add_argument("--n-qubits", type=int, default=4)
    ap.add_argument("--kinds", nargs="+", default=["single", "product_pair", "semi_bell_plus"])
    ap.add_argument("--out", type=Path, default=Path("sweep"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    start, stop, step = args.alphas
    alphas = np.round(np.arange(start, stop + step / 2, step), 10)
    res = alpha_sweep(args.n_qubits, alphas, args.kinds, workers=int(os.environ.get("QB_WORKERS", "1")))
    write_csv(args.out / "sweep.csv", res.header(), res.rows())

    a = np.array(res.alphas)
    for field in ("p_max", "ergotropy_max", "energy_max"):
        line_plot(
            {k.value: (a, np.array([getattr(res.get(x, k), field) for x in res.alphas])) for k in res.kinds},
            args.out / f"{field}.svg",
            title=f"{field} vs alpha",
            xlabel="alpha",
            ylabel=field,
        )
    if res.has_deltas:
        line_plot(
            {
                "delta_ergotropy": (a, np.array([res.delta_ergotropy(x) for x in res.alphas])),
                "delta_power": (a, np.array([res.delta_power(x) for x in res.alphas])),
            },
            args.out / "deltas.svg",
            title="two uncorrelated chargers minus one",
            xlabel="alpha",
            ylabel="delta",
        )
        for x in res.alphas:
            print(f"alpha={x:4.2f}  dE={res.delta_ergotropy(x):+.4f}  dP={res.delta_power(x):+.4f}")


if __name__ == "__main__":
    main()
