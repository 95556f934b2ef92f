"""``qb series|sweep|scaling --config <path> [--out <dir>] [--no-plots]``.

Configuration is a small YAML document::

    experiment: series          # optional when given on the command line
    model:   {n_qubits: 4, omega0: 1.0, g: 2.0}
    charger: {kind: semi_bell_plus, alpha: 2.5}
    grid:    {t_max: 10.0, points: 1001}
    cutoff: 34                  # optional, per-mode Fock cutoff
    sweep:   {alphas: [0.5, 1.5, 2.5], kinds: [single, product_pair]}
    scaling: {n_qubits: [1, 2, 3, 4], alpha: 2.5}
    output:  {dir: out, normalize: true, plots: true}

Exit codes: 0 ok, 2 configuration error, 3 numerical invariant violated,
4 resource guard (cutoff or dimension).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from . import __version__
from .dynamics import TimeGrid
from .errors import (
    ConfigError,
    DegenerateStateError,
    InvariantViolation,
    ResourceGuardError,
    TruncationError,
)
from .experiments import (
    DEFAULT_ALPHAS,
    DEFAULT_SWEEP_KINDS,
    PER_CELL,
    alpha_sweep,
    make_scenario,
    run_time_series,
    size_scaling,
)
from .states import ChargerKind, ChargerSpec, default_cutoff
from .svgplot import line_plot

EXPERIMENTS = ("series", "sweep", "scaling")
WORKERS_ENV = "QB_WORKERS"

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_RESOURCE = 0, 2, 3, 4

_SCHEMA: dict[str, dict[str, str] | str] = {
    "experiment": "str",
    "cutoff": "int",
    "model": {"n_qubits": "int", "omega0": "float", "g": "float"},
    "charger": {"kind": "str", "alpha": "alpha"},
    "grid": {"t_max": "float", "points": "int"},
    "sweep": {"alphas": "floats", "kinds": "strs"},
    "scaling": {"n_qubits": "ints", "alpha": "float", "kinds": "strs"},
    "output": {"dir": "str", "normalize": "bool", "plots": "bool"},
}


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    n_qubits: int = 4
    omega0: float = 1.0
    g: float = 2.0
    charger_kind: ChargerKind | None = None
    alpha: tuple[complex, ...] = ()
    t_max: float = 10.0
    points: int = 1001
    cutoff: int | None = None
    sweep_alphas: tuple[float, ...] = DEFAULT_ALPHAS
    kinds: tuple[ChargerKind, ...] = DEFAULT_SWEEP_KINDS
    scaling_sizes: tuple[int, ...] = (1, 2, 3, 4)
    scaling_alpha: float = 2.5
    out_dir: str = "out"
    normalize: bool = False
    plots: bool = True

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid.uniform(self.t_max, self.points)

    def charger(self) -> ChargerSpec:
        kind = self.charger_kind
        if len(self.alpha) == 2:
            return ChargerSpec(kind, self.alpha)
        return ChargerSpec.from_kind(kind, self.alpha[0])

    def to_json(self) -> dict:
        d = asdict(self)
        d["charger_kind"] = self.charger_kind.value if self.charger_kind else None
        d["alpha"] = [[a.real, a.imag] for a in self.alpha]
        d["kinds"] = [k.value for k in self.kinds]
        return d


def _lines(text: str) -> dict[tuple[str, ...], int]:
    """1-based line number of every mapping key, keyed by its path."""
    out: dict[tuple[str, ...], int] = {}

    def walk(node, path):
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = (*path, str(k.value))
                out[key] = k.start_mark.line + 1
                walk(v, key)

    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark else ""
        raise ConfigError(f"{where}malformed configuration: {exc}") from exc
    if root is not None:
        walk(root, ())
    return out


def _coerce(value: Any, kind: str, where: str):
    def fail(expected):
        raise ConfigError(f"{where}: expected {expected}, got {value!r}")

    def num(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            fail("a number")
        return float(v)

    if kind == "str":
        return value if isinstance(value, str) else fail("a string")
    if kind == "int":
        return value if isinstance(value, int) and not isinstance(value, bool) else fail("an integer")
    if kind == "float":
        return num(value)
    if kind == "bool":
        return value if isinstance(value, bool) else fail("true/false")
    if kind == "floats":
        return tuple(num(v) for v in value) if isinstance(value, list) and value else fail("a non-empty list of numbers")
    if kind == "ints":
        if not isinstance(value, list) or not value or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
            fail("a non-empty list of integers")
        return tuple(value)
    if kind == "strs":
        if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
            fail("a non-empty list of strings")
        return tuple(value)
    if kind == "alpha":
        items = value if isinstance(value, list) else [value]
        if not 1 <= len(items) <= 2:
            fail("one or two amplitudes")
        out = []
        for v in items:
            if isinstance(v, str):
                try:
                    out.append(complex(v.replace(" ", "")))
                except ValueError:
                    fail("a complex amplitude such as '1.5+0.5j'")
            else:
                out.append(complex(num(v)))
        return tuple(out)
    raise AssertionError(kind)


def _kind(name: str, where: str) -> ChargerKind:
    try:
        return ChargerKind(name)
    except ValueError:
        options = ", ".join(k.value for k in ChargerKind)
        raise ConfigError(f"{where}: unknown charger kind {name!r} (choose from {options})") from None


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Validate a YAML run configuration and fill in defaults.

    ``experiment`` (from the command line) overrides or supplies the
    document's ``experiment`` key.
    """
    lines = _lines(text)
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("line 1: configuration must be a mapping of sections")

    def at(*path):
        line = lines.get(tuple(path))
        return f"line {line}: {'.'.join(path)}" if line else ".".join(path)

    values: dict[tuple[str, ...], Any] = {}
    for key, val in data.items():
        key = str(key)
        if key not in _SCHEMA:
            raise ConfigError(f"{at(key)}: unknown key {key!r}")
        spec = _SCHEMA[key]
        if isinstance(spec, str):
            values[(key,)] = None if val is None else _coerce(val, spec, at(key))
            continue
        if val is None:
            val = {}
        if not isinstance(val, dict):
            raise ConfigError(f"{at(key)}: expected a section of key/value pairs")
        for sub, v in val.items():
            sub = str(sub)
            if sub not in spec:
                raise ConfigError(f"{at(key, sub)}: unknown key {sub!r} in section {key!r}")
            values[(key, sub)] = None if v is None else _coerce(v, spec[sub], at(key, sub))

    doc_exp = values.get(("experiment",))
    exp = experiment or doc_exp
    if exp is None:
        raise ConfigError("experiment required (series, sweep or scaling)")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"{at('experiment')}: unknown experiment {exp!r}")
    if experiment and doc_exp and doc_exp != experiment:
        raise ConfigError(f"{at('experiment')}: file says {doc_exp!r} but command is {experiment!r}")

    def get(*path, default=None):
        v = values.get(path)
        return default if v is None else v

    omega0 = get("model", "omega0", default=1.0)
    if omega0 <= 0:
        raise ConfigError(f"{at('model', 'omega0')}: must be positive")
    kw: dict[str, Any] = dict(
        experiment=exp,
        n_qubits=get("model", "n_qubits", default=4),
        omega0=omega0,
        g=get("model", "g", default=2.0 * omega0),
        t_max=get("grid", "t_max", default=10.0),
        points=get("grid", "points", default=1001),
        cutoff=get("cutoff"),
        out_dir=get("output", "dir", default="out"),
        normalize=get("output", "normalize", default=False),
        plots=get("output", "plots", default=True),
    )
    if kw["t_max"] <= 0 or kw["points"] < 2:
        raise ConfigError(f"{at('grid')}: need t_max > 0 and points >= 2")
    if kw["n_qubits"] < 1:
        raise ConfigError(f"{at('model', 'n_qubits')}: must be >= 1")
    if kw["cutoff"] is not None and kw["cutoff"] < 0:
        raise ConfigError(f"{at('cutoff')}: must be >= 0")

    if exp == "series":
        kind_name = get("charger", "kind")
        if kind_name is None:
            raise ConfigError(f"{at('charger')}: charger.kind required")
        kind = _kind(kind_name, at("charger", "kind"))
        alpha = get("charger", "alpha")
        if alpha is None:
            raise ConfigError(f"{at('charger')}: charger.alpha required")
        if len(alpha) == 2 and kind not in (ChargerKind.PRODUCT_PAIR, ChargerKind.SEMI_BELL_PLUS):
            raise ConfigError(f"{at('charger', 'alpha')}: {kind.value} takes a single amplitude")
        kw.update(charger_kind=kind, alpha=alpha)
        if kw["cutoff"] is None:
            kw["cutoff"] = default_cutoff(max(abs(a) for a in alpha))
    elif exp == "sweep":
        alphas = get("sweep", "alphas", default=DEFAULT_ALPHAS)
        if any(a < 0 for a in alphas):
            raise ConfigError(f"{at('sweep', 'alphas')}: amplitudes must be non-negative")
        kinds = get("sweep", "kinds")
        kw.update(sweep_alphas=alphas)
        if kinds is not None:
            kw["kinds"] = tuple(_kind(k, at("sweep", "kinds")) for k in kinds)
    else:
        sizes = get("scaling", "n_qubits", default=(1, 2, 3, 4))
        kinds = get("scaling", "kinds")
        kw.update(scaling_sizes=sizes, scaling_alpha=get("scaling", "alpha", default=2.5))
        if kinds is not None:
            kw["kinds"] = tuple(_kind(k, at("scaling", "kinds")) for k in kinds)
    return RunConfig(**kw)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def write_csv(path, header: list[str], rows: list[list[float]]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(x) for x in row] for row in r]
    return header, np.array(data, dtype=float).reshape(-1, len(header))


def _metadata(config: RunConfig, extra: dict) -> dict:
    return {
        "tool": "qbattery",
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "config": config.to_json(),
        "grid": {"t_min": 0.0, "t_max": config.t_max, "points": config.points, "units": "1/omega0"},
        "notes": [
            "time window and resolution are a reproduction choice, not taken from published figures",
            "per-cell normalisation divides "
            + ", ".join(sorted(PER_CELL))
            + " by n_qubits (energies also by omega0) when normalize is true",
        ],
        **extra,
    }


def _series_plots(out: Path, series, label: str) -> None:
    t = series.t
    groups = {
        "energy": ("energy", "ergotropy"),
        "power": ("power",),
        "gamma": ("gamma",),
        "purity": ("purity",),
        "correlations": ("entropy", "mutual_info", "charger_entropy"),
        "consonance": ("consonance",),
    }
    for name, cols in groups.items():
        line_plot(
            {c: (t, series.column(c)) for c in cols},
            out / f"series_{name}.svg",
            title=f"{label}: {name}",
            xlabel="omega0 t",
            ylabel=name,
        )


def _maxima_plots(out: Path, prefix: str, xname: str, header: list[str], rows: list[list[float]], kinds) -> None:
    table = np.array(rows, dtype=float).reshape(-1, len(header))
    x = table[:, 0]
    for metric in ("p_max", "ergotropy_max"):
        curves = {k.value: (x, table[:, header.index(f"{k.value}_{metric}")]) for k in kinds}
        line_plot(curves, out / f"{prefix}_{metric}.svg", title=f"{metric} vs {xname}", xlabel=xname, ylabel=metric)
    if "delta_power" in header:
        curves = {c: (x, table[:, header.index(c)]) for c in ("delta_ergotropy", "delta_power")}
        line_plot(curves, out / f"{prefix}_deltas.svg", title="two chargers minus one", xlabel=xname, ylabel="delta")


def _cells(scenarios: dict, xname: str) -> list[dict]:
    return [{xname: x, **sc.describe()} for (x, _), sc in scenarios.items()]


def _workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def run(config: RunConfig) -> int:
    """Run one experiment family and write CSV, SVG and ``metadata.json`` into ``out_dir``."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = config.grid
    if config.experiment == "series":
        sc = make_scenario(
            config.n_qubits,
            config.charger(),
            omega0=config.omega0,
            g=config.g,
            grid=grid,
            cutoff=config.cutoff,
            normalize=config.normalize,
        )
        series = run_time_series(sc)
        write_csv(out / "series.csv", series.header(), series.rows())
        meta = _metadata(config, {"scenario": sc.describe()})
        if config.plots:
            _series_plots(out, series, sc.charger.label())
    elif config.experiment == "sweep":
        res = alpha_sweep(
            config.n_qubits,
            config.sweep_alphas,
            config.kinds,
            omega0=config.omega0,
            g=config.g,
            grid=grid,
            cutoff=config.cutoff,
            workers=_workers(),
        )
        header, rows = res.header(), res.rows()
        write_csv(out / "sweep.csv", header, rows)
        meta = _metadata(
            config,
            {
                "pairing": "single charger alpha = sqrt(|a1|^2 + |a2|^2) of product_pair(a, -a)",
                "scenarios": _cells(res.scenarios, "alpha"),
            },
        )
        if config.plots:
            _maxima_plots(out, "sweep", "alpha", header, rows, res.kinds)
    else:
        res = size_scaling(
            config.scaling_sizes,
            config.scaling_alpha,
            config.kinds,
            omega0=config.omega0,
            g=config.g,
            grid=grid,
            cutoff=config.cutoff,
            workers=_workers(),
        )
        header, rows = res.header(), res.rows()
        write_csv(out / "scaling.csv", header, rows)
        meta = _metadata(config, {"scenarios": _cells(res.scenarios, "n_qubits")})
        if config.plots:
            _maxima_plots(out, "scaling", "n_qubits", header, rows, res.kinds)
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, default=str) + "\n")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qb", description=__doc__.splitlines()[0])
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    parser.add_argument("--no-plots", action="store_true")
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config.read_text(), args.experiment)
        if args.out is not None:
            config = replace(config, out_dir=str(args.out))
        if args.no_plots:
            config = replace(config, plots=False)
        return run(config)
    except (ConfigError, TruncationError, DegenerateStateError, OSError) as exc:
        print(f"qb: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"qb: numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ResourceGuardError as exc:
        print(f"qb: resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
