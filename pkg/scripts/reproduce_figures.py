"""Time series of every charger kind at one amplitude, overlaid per metric.

    python scripts/reproduce_figures.py --alpha 2.5 --n-qubits 4 --out figures
"""

import argparse
from pathlib import Path

from qbattery.cli import write_csv
from qbattery.dynamics import TimeGrid
from qbattery.experiments import make_scenario, paired_charger, run_time_series
from qbattery.states import ChargerKind
from qbattery.svgplot import line_plot

PANELS = ("energy", "ergotropy", "power", "gamma", "purity", "entropy", "mutual_info", "consonance")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=2.5)
    ap.add_argument("--n-qubits", type=int, default=4)
    ap.add_argument("--t-max", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=1001)
    ap.add_argument("--kinds", nargs="+", default=[k.value for k in ChargerKind])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    grid = TimeGrid.uniform(args.t_max, args.points)
    series = {}
    for kind in args.kinds:
        charger = paired_charger(kind, args.alpha)
        sc = make_scenario(args.n_qubits, charger, grid=grid, normalize=True)
        series[charger.label()] = s = run_time_series(sc)
        write_csv(args.out / f"series_{kind}.csv", s.header(), s.rows())
        print(f"{charger.label():40s} max ergotropy/cell {s.column('ergotropy').max():.4f}")

    for metric in PANELS:
        line_plot(
            {label: (s.t, s.column(metric)) for label, s in series.items()},
            args.out / f"compare_{metric}.svg",
            title=f"{metric}, alpha={args.alpha}, {args.n_qubits} cells",
            xlabel="omega0 t",
            ylabel=metric,
        )


if __name__ == "__main__":
    main()
