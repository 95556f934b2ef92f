"""Charging scenarios: time series, maxima over time, alpha sweeps and size scaling."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .dynamics import TimeGrid, evolve, evolve_series, prepare_propagator, Propagator
from .errors import DegenerateStateError, InvariantViolation, ResourceGuardError
from .hamiltonian import ModelConfig, build_battery_hamiltonian, build_total_hamiltonian
from .hilbert import build_sectors
from .metrics import (
    charging_power,
    entropy_of_spectrum,
    ergotropy,
    extractable_ratio,
    mutual_information,
    purity,
    quantum_consonance,
    stored_energy,
)
from .states import (
    ChargerKind,
    ChargerSpec,
    PureState,
    build_initial_state,
    default_cutoff,
    mean_photon_number,
    truncation_deficit,
)

MAX_CUTOFF = 200
QUBIT_RANGE = (1, 6)
INVARIANT_TOL = 1e-10
BUDGET_TOL = 1e-8
REFINE_RTOL = 1e-6
# series whose maximum stays below this are round-off and count as flat
ZERO_TOL = 1e-12

METRICS = (
    "energy",
    "ergotropy",
    "power",
    "gamma",
    "purity",
    "entropy",
    "mutual_info",
    "consonance",
    "charger_entropy",
)
# metrics divided by N_B (energies additionally by omega0) when normalising per cell
PER_CELL = {"energy", "ergotropy", "power", "entropy", "mutual_info", "charger_entropy"}


@dataclass(frozen=True)
class MetricsRecord:
    t: float
    energy: float
    ergotropy: float
    power: float
    gamma: float
    purity: float
    entropy: float
    mutual_info: float
    consonance: float
    charger_entropy: float

    def as_row(self) -> list[float]:
        return [getattr(self, f.name) for f in fields(self)]


@dataclass(frozen=True)
class Scenario:
    model: ModelConfig
    charger: ChargerSpec
    grid: TimeGrid = field(default_factory=TimeGrid.uniform)
    normalize: bool = False

    def __post_init__(self):
        if self.charger.n_modes != len(self.model.mode_cutoffs):
            raise ValueError(
                f"{self.charger.kind.value} needs {self.charger.n_modes} mode(s), "
                f"model has {len(self.model.mode_cutoffs)}"
            )

    def initial_state(self) -> PureState:
        return build_initial_state(self.model.layout, self.charger)

    def describe(self) -> dict:
        m = self.model
        return {
            "n_qubits": m.n_qubits,
            "mode_cutoffs": list(m.mode_cutoffs),
            "omega0": m.omega0,
            "g": m.g,
            "omega_mode": list(m.omega_mode),
            "charger": self.charger.kind.value,
            "alphas": [[a.real, a.imag] for a in self.charger.alphas],
            "truncation_deficits": [
                truncation_deficit(a, c) for a, c in zip(_amplitudes_per_mode(self.charger), m.mode_cutoffs)
            ],
            "grid": {"t_min": self.grid.span[0], "t_max": self.grid.span[1], "points": len(self.grid)},
            "normalize": self.normalize,
        }


def _amplitudes_per_mode(spec: ChargerSpec) -> list[complex]:
    """Largest coherent amplitude that has to fit in each mode."""
    a = spec.max_abs_alpha
    return [a] * spec.n_modes


def check_resources(n_qubits: int, cutoffs: Sequence[int]) -> None:
    lo, hi = QUBIT_RANGE
    if not lo <= n_qubits <= hi:
        raise ResourceGuardError(f"n_qubits={n_qubits} outside [{lo}, {hi}]")
    if max(cutoffs) > MAX_CUTOFF:
        raise ResourceGuardError(f"mode cutoff {max(cutoffs)} exceeds guard {MAX_CUTOFF}")


def make_scenario(
    n_qubits: int,
    charger: ChargerSpec,
    *,
    omega0: float = 1.0,
    g: float | None = None,
    grid: TimeGrid | None = None,
    cutoff: int | None = None,
    normalize: bool = False,
) -> Scenario:
    """Scenario with the default Fock cutoff rule unless ``cutoff`` is given."""
    cut = default_cutoff(charger.max_abs_alpha) if cutoff is None else int(cutoff)
    cutoffs = (cut,) * charger.n_modes
    check_resources(n_qubits, cutoffs)
    model = ModelConfig(n_qubits, cutoffs, omega0=omega0, g=g)
    return Scenario(model, charger, grid or TimeGrid.uniform(), normalize)


def single_alpha_for_budget(pair: ChargerSpec) -> float:
    """Real positive single-charger amplitude carrying the pair's mean photon number."""
    return math.sqrt(sum(abs(a) ** 2 for a in pair.alphas))


@lru_cache(maxsize=3)
def get_propagator(model: ModelConfig) -> Propagator:
    layout = model.layout
    return prepare_propagator(build_total_hamiltonian(model, layout), build_sectors(layout))


@lru_cache(maxsize=8)
def _battery_hamiltonian(n_qubits: int, omega0: float):
    return build_battery_hamiltonian(n_qubits, omega0)


def record_from_state(psi: PureState, t: float, model: ModelConfig, normalize: bool = False) -> MetricsRecord:
    """Full set of metrics at one time; raw values are invariant-checked first."""
    nb, w0 = model.n_qubits, model.omega0
    H_B = _battery_hamiltonian(nb, w0)
    m = psi.battery_charger_matrix()
    rho_b = m @ m.conj().T
    de = stored_energy(rho_b, H_B)
    erg = ergotropy(rho_b, H_B)
    s_b = entropy_of_spectrum(np.linalg.eigvalsh(rho_b))
    # nonzero charger spectrum from the Schmidt values; rho_C itself is too large to diagonalise per step
    s_c = entropy_of_spectrum(np.linalg.svd(m, compute_uv=False) ** 2)
    s_bc = entropy_of_spectrum([np.vdot(psi.amplitudes, psi.amplitudes).real])
    raw = MetricsRecord(
        t=float(t),
        energy=de,
        ergotropy=erg,
        power=charging_power(de, t),
        gamma=extractable_ratio(erg, de, floor=1e-9 * nb * w0),
        purity=purity(rho_b),
        entropy=s_b,
        mutual_info=mutual_information(s_b, s_c, s_bc),
        consonance=quantum_consonance(rho_b),
        charger_entropy=s_c,
    )
    check_record(raw, nb)
    if not normalize:
        return raw
    scale = {"energy": nb * w0, "ergotropy": nb * w0, "power": nb * w0}
    return MetricsRecord(
        **{
            k: (v / scale.get(k, nb) if k in PER_CELL else v)
            for k, v in asdict(raw).items()
        }
    )


def check_record(r: MetricsRecord, n_qubits: int, tol: float = INVARIANT_TOL) -> None:
    problems = []
    if r.ergotropy < -tol or r.ergotropy > r.energy + tol:
        problems.append(f"ergotropy {r.ergotropy} outside [0, energy={r.energy}]")
    if not math.isnan(r.gamma) and not 0 <= r.gamma <= 1:
        problems.append(f"gamma {r.gamma} outside [0, 1]")
    if not 2.0**-n_qubits - tol <= r.purity <= 1 + tol:
        problems.append(f"purity {r.purity} outside [2^-N, 1]")
    if r.entropy < 0:
        problems.append(f"entropy {r.entropy} < 0")
    if abs(r.mutual_info - 2 * r.entropy) > tol:
        problems.append(f"mutual information {r.mutual_info} != 2 S = {2 * r.entropy}")
    if problems:
        raise InvariantViolation(f"t={r.t}: " + "; ".join(problems))


@dataclass
class MetricsSeries:
    scenario: Scenario
    records: list[MetricsRecord]

    @property
    def t(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        if name not in METRICS and name != "t":
            raise KeyError(f"unknown metric {name!r}")
        return np.array([getattr(r, name) for r in self.records])

    def header(self) -> list[str]:
        return [f.name for f in fields(MetricsRecord)]

    def rows(self) -> list[list[float]]:
        return [r.as_row() for r in self.records]


def run_time_series(scenario: Scenario, propagator: Propagator | None = None) -> MetricsSeries:
    prop = propagator or get_propagator(scenario.model)
    psi0 = scenario.initial_state()
    records = [
        record_from_state(psi, t, scenario.model, scenario.normalize)
        for t, psi in zip(scenario.grid.t_values, evolve_series(prop, psi0, scenario.grid))
    ]
    return MetricsSeries(scenario, records)


@dataclass(frozen=True)
class MaxResult:
    t: float
    value: float
    grid_value: float
    at_boundary: bool = False


_INVPHI = (math.sqrt(5) - 1) / 2


def _golden_max(f, a: float, b: float, rtol: float) -> tuple[float, float]:
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(abs(a), abs(b), 1e-300):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def max_over_time(series: MetricsSeries, metric: str, refine: bool = True, rtol: float = REFINE_RTOL) -> MaxResult:
    """Grid argmax of ``metric``, refined by golden-section search on the exact propagator.

    A maximum on the last grid point is flagged (and warned about) rather
    than refined, since the true peak may lie beyond the window.
    """
    values = series.column(metric)
    t = series.t
    if np.all(np.isnan(values)) or np.nanmax(values) <= ZERO_TOL:
        return MaxResult(0.0, 0.0, 0.0)
    k = int(np.nanargmax(values))
    best = MaxResult(float(t[k]), float(values[k]), float(values[k]))
    if k == len(t) - 1:
        warnings.warn(f"{metric} maximum at the right end of the grid (t={t[k]}); widen the window")
        return MaxResult(best.t, best.value, best.grid_value, at_boundary=True)
    if not refine:
        return best

    sc = series.scenario
    prop = get_propagator(sc.model)
    psi0 = sc.initial_state()

    def f(tt: float) -> float:
        val = getattr(record_from_state(evolve(prop, psi0, tt), tt, sc.model, sc.normalize), metric)
        return -math.inf if math.isnan(val) else val

    lo, hi = float(t[max(k - 1, 0)]), float(t[k + 1])
    t_ref, v_ref = _golden_max(f, lo, hi, rtol)
    if v_ref > best.value:
        return MaxResult(t_ref, v_ref, best.grid_value)
    return best


@dataclass(frozen=True)
class KindMaxima:
    p_max: float
    t_p: float
    ergotropy_max: float
    t_ergotropy: float
    energy_max: float
    t_energy: float
    at_boundary: bool = False

    @classmethod
    def undefined(cls) -> "KindMaxima":
        nan = float("nan")
        return cls(nan, nan, nan, nan, nan, nan)


def maxima_for(scenario: Scenario, refine: bool = True) -> KindMaxima:
    try:
        series = run_time_series(scenario)
    except DegenerateStateError:
        return KindMaxima.undefined()
    p = max_over_time(series, "power", refine)
    e = max_over_time(series, "ergotropy", refine)
    en = max_over_time(series, "energy", refine)
    return KindMaxima(p.value, p.t, e.value, e.t, en.value, en.t, p.at_boundary or e.at_boundary)


DEFAULT_SWEEP_KINDS = (ChargerKind.SINGLE, ChargerKind.PRODUCT_PAIR, ChargerKind.SEMI_BELL_PLUS)
DEFAULT_ALPHAS = tuple(round(0.1 * k, 1) for k in range(1, 31))


def paired_charger(kind: ChargerKind | str, alpha: float) -> ChargerSpec:
    """Charger for one sweep cell; the single charger carries the pair's photon budget."""
    kind = ChargerKind(kind)
    if kind is ChargerKind.SINGLE:
        return ChargerSpec.single(single_alpha_for_budget(ChargerSpec.product_pair(alpha)))
    return ChargerSpec.from_kind(kind, alpha)


def check_budget(single: Scenario, pair: Scenario, tol: float = BUDGET_TOL) -> None:
    n1 = mean_photon_number(single.initial_state(), single.model.layout)
    n2 = mean_photon_number(pair.initial_state(), pair.model.layout)
    if abs(n1 - n2) > tol:
        raise InvariantViolation(f"photon budgets differ: single {n1} vs pair {n2}")


@dataclass
class SweepResult:
    alphas: list[float]
    kinds: list[ChargerKind]
    maxima: dict[tuple[float, ChargerKind], KindMaxima]
    scenarios: dict[tuple[float, ChargerKind], Scenario] = field(default_factory=dict)

    def get(self, alpha: float, kind: ChargerKind | str) -> KindMaxima:
        return self.maxima[(alpha, ChargerKind(kind))]

    def delta_ergotropy(self, alpha: float) -> float:
        """Two uncorrelated chargers minus one charger with the same photon budget."""
        return self.get(alpha, "product_pair").ergotropy_max - self.get(alpha, "single").ergotropy_max

    def delta_power(self, alpha: float) -> float:
        return self.get(alpha, "product_pair").p_max - self.get(alpha, "single").p_max

    def power_gain(self, alpha: float) -> float:
        single = self.get(alpha, "single").p_max
        return (self.get(alpha, "product_pair").p_max - single) / single

    @property
    def has_deltas(self) -> bool:
        return ChargerKind.SINGLE in self.kinds and ChargerKind.PRODUCT_PAIR in self.kinds

    def header(self) -> list[str]:
        cols = ["alpha"]
        for kind in self.kinds:
            cols += [f"{kind.value}_{f.name}" for f in fields(KindMaxima) if f.name != "at_boundary"]
        if self.has_deltas:
            cols += ["delta_ergotropy", "delta_power"]
        return cols

    def rows(self) -> list[list[float]]:
        out = []
        for a in self.alphas:
            row = [a]
            for kind in self.kinds:
                m = self.get(a, kind)
                row += [getattr(m, f.name) for f in fields(KindMaxima) if f.name != "at_boundary"]
            if self.has_deltas:
                row += [self.delta_ergotropy(a), self.delta_power(a)]
            out.append(row)
        return out


def _run_jobs(jobs: list[Scenario], workers: int, refine: bool) -> list[KindMaxima]:
    if workers <= 1:
        return [maxima_for(s, refine) for s in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(maxima_for, jobs, [refine] * len(jobs)))


def _sweep_cutoff(kind: ChargerKind, alphas: Iterable[float]) -> int:
    return max(default_cutoff(paired_charger(kind, a).max_abs_alpha) for a in alphas)


def alpha_sweep(
    n_qubits: int = 4,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    kinds: Sequence[ChargerKind | str] = DEFAULT_SWEEP_KINDS,
    *,
    omega0: float = 1.0,
    g: float | None = None,
    grid: TimeGrid | None = None,
    cutoff: int | None = None,
    workers: int = 1,
    refine: bool = True,
) -> SweepResult:
    """Maxima over time of power, ergotropy and energy for every ``(alpha, kind)``.

    One cutoff per charger kind (the largest the alpha list needs) lets a
    single propagator serve the whole sweep.
    """
    alphas = sorted(float(a) for a in alphas)
    if any(a < 0 for a in alphas):
        raise ValueError("alphas must be non-negative")
    kinds = [ChargerKind(k) for k in kinds]
    grid = grid or TimeGrid.uniform()
    scenarios: dict[tuple[float, ChargerKind], Scenario] = {}
    for kind in kinds:
        cut = cutoff if cutoff is not None else _sweep_cutoff(kind, alphas)
        for a in alphas:
            scenarios[(a, kind)] = make_scenario(
                n_qubits, paired_charger(kind, a), omega0=omega0, g=g, grid=grid, cutoff=cut
            )
    if ChargerKind.SINGLE in kinds and ChargerKind.PRODUCT_PAIR in kinds:
        for a in alphas:
            check_budget(scenarios[(a, ChargerKind.SINGLE)], scenarios[(a, ChargerKind.PRODUCT_PAIR)])
    keys = sorted(scenarios, key=lambda k: (kinds.index(k[1]), k[0]))
    results = _run_jobs([scenarios[k] for k in keys], workers, refine)
    return SweepResult(alphas, kinds, dict(zip(keys, results)), scenarios)


@dataclass
class ScalingResult:
    n_qubits: list[int]
    alpha: float
    kinds: list[ChargerKind]
    maxima: dict[tuple[int, ChargerKind], KindMaxima]
    scenarios: dict[tuple[int, ChargerKind], Scenario] = field(default_factory=dict)

    def get(self, n_qubits: int, kind: ChargerKind | str) -> KindMaxima:
        return self.maxima[(n_qubits, ChargerKind(kind))]

    def header(self) -> list[str]:
        cols = ["n_qubits"]
        for kind in self.kinds:
            cols += [f"{kind.value}_{f.name}" for f in fields(KindMaxima) if f.name != "at_boundary"]
        return cols

    def rows(self) -> list[list[float]]:
        out = []
        for n in self.n_qubits:
            row = [n]
            for kind in self.kinds:
                m = self.get(n, kind)
                row += [getattr(m, f.name) for f in fields(KindMaxima) if f.name != "at_boundary"]
            out.append(row)
        return out


def size_scaling(
    n_qubits_list: Sequence[int] = (1, 2, 3, 4),
    alpha: float = 2.5,
    kinds: Sequence[ChargerKind | str] = DEFAULT_SWEEP_KINDS,
    *,
    omega0: float = 1.0,
    g: float | None = None,
    grid: TimeGrid | None = None,
    cutoff: int | None = None,
    workers: int = 1,
    refine: bool = True,
) -> ScalingResult:
    kinds = [ChargerKind(k) for k in kinds]
    sizes = sorted(int(n) for n in n_qubits_list)
    for n in sizes:
        if not QUBIT_RANGE[0] <= n <= QUBIT_RANGE[1]:
            raise ResourceGuardError(f"n_qubits={n} outside {QUBIT_RANGE}")
    grid = grid or TimeGrid.uniform()
    scenarios = {
        (n, kind): make_scenario(n, paired_charger(kind, alpha), omega0=omega0, g=g, grid=grid, cutoff=cutoff)
        for n in sizes
        for kind in kinds
    }
    keys = sorted(scenarios, key=lambda k: (k[0], kinds.index(k[1])))
    results = _run_jobs([scenarios[k] for k in keys], workers, refine)
    return ScalingResult(sizes, alpha, kinds, dict(zip(keys, results)), scenarios)
