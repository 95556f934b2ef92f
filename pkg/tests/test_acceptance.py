"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (see ``conftest.record_criterion``); the
summary is printed at the end of the pytest run. Expensive runs are shared
through session fixtures.
"""

import time
import warnings
from functools import reduce

import numpy as np
import pytest

from conftest import random_density, random_state, record_criterion
from qbattery.dynamics import TimeGrid, dense_oracle_evolve, evolve_series, prepare_propagator
from qbattery.experiments import (
    DEFAULT_ALPHAS,
    MetricsSeries,
    alpha_sweep,
    get_propagator,
    make_scenario,
    maxima_for,
    max_over_time,
    paired_charger,
    record_from_state,
)
from qbattery.hamiltonian import ModelConfig, build_battery_hamiltonian, build_total_hamiltonian, excitation_operator
from qbattery.hilbert import BasisState, basis_index, build_sectors
from qbattery.metrics import (
    energy_levels,
    ergotropy,
    ergotropy_from_passive,
    quantum_consonance,
)
from qbattery.states import ChargerKind, PureState

ALL_KINDS = tuple(ChargerKind)
SCENARIO_ALPHAS = (0.5, 1.5, 2.5)
N_CELLS = 4


class Run:
    """Series, maxima and conservation drift of one scenario."""

    def __init__(self, n_qubits, kind, alpha):
        self.scenario = make_scenario(n_qubits, paired_charger(kind, alpha))
        model = self.scenario.model
        prop = get_propagator(model)
        H = build_total_hamiltonian(model).to_csr()
        N = excitation_operator(model.layout).to_csr()
        psi0 = self.scenario.initial_state()
        v0 = psi0.amplitudes
        e0, n0 = np.vdot(v0, H @ v0).real, np.vdot(v0, N @ v0).real
        drift = {"norm": 0.0, "energy": 0.0, "excitation": 0.0}
        records = []
        for t, psi in zip(self.scenario.grid.t_values, evolve_series(prop, psi0, self.scenario.grid)):
            v = psi.amplitudes
            drift["norm"] = max(drift["norm"], abs(np.vdot(v, v).real - 1))
            drift["energy"] = max(drift["energy"], abs(np.vdot(v, H @ v).real - e0) / max(abs(e0), 1.0))
            drift["excitation"] = max(drift["excitation"], abs(np.vdot(v, N @ v).real - n0) / max(abs(n0), 1.0))
            records.append(record_from_state(psi, t, model))
        self.series = MetricsSeries(self.scenario, records)
        self.drift = drift
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            self.power = max_over_time(self.series, "power")
            self.ergotropy = max_over_time(self.series, "ergotropy")
            self.energy = max_over_time(self.series, "energy")
        self.min_purity = float(np.min(self.series.column("purity")))


@pytest.fixture(scope="session")
def runs():
    """All five charger kinds at the three reference amplitudes, four cells."""
    out = {}
    for a in SCENARIO_ALPHAS:
        for kind in ALL_KINDS:
            out[(a, kind)] = Run(N_CELLS, kind, a)
    return out


# --- 1 ---------------------------------------------------------------------------------------


def test_criterion_01_sector_propagator_matches_dense_oracle():
    start = time.perf_counter()
    worst = 0.0
    rng = np.random.default_rng(2024)
    for cutoffs in ((15,), (7, 7)):
        model = ModelConfig(2, cutoffs)
        layout = model.layout
        H = build_total_hamiltonian(model)
        prop = prepare_propagator(H, build_sectors(layout))
        psi0 = PureState(layout, random_state(layout, seed=len(cutoffs)))
        times = np.sort(rng.uniform(0, 20, size=20))
        states = list(evolve_series(prop, psi0, np.concatenate([[0.0], times])))[1:]
        for t, psi in zip(times, states):
            worst = max(worst, np.max(np.abs(psi.amplitudes - dense_oracle_evolve(H, psi0, t))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 30
    record_criterion("criterion 1", ok, f"max amplitude error {worst:.2e} (< 1e-8), {elapsed:.1f} s (< 30 s)")
    assert ok


# --- 2 ---------------------------------------------------------------------------------------


def test_criterion_02_single_photon_rabi_oscillation():
    model = ModelConfig(1, (4,))
    layout = model.layout
    amp = np.zeros(layout.total_dim, complex)
    amp[basis_index(layout, BasisState((0,), (1,)))] = 1
    grid = TimeGrid.uniform()
    excited = np.array(
        [np.sum(np.abs(p.battery_charger_matrix()[1]) ** 2) for p in evolve_series(get_propagator(model), PureState(layout, amp), grid)]
    )
    err = float(np.max(np.abs(excited - np.sin(model.g * grid.t_values) ** 2)))
    ok = err < 1e-8
    record_criterion("criterion 2", ok, f"max |P_e - sin^2(gt)| = {err:.2e} over {len(grid)} points (< 1e-8)")
    assert ok


# --- 3, 4 ------------------------------------------------------------------------------------


def test_criterion_03_conservation(runs):
    worst = {k: max(r.drift[k] for r in runs.values()) for k in ("norm", "energy", "excitation")}
    ok = all(v < 1e-8 for v in worst.values())
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    record_criterion("criterion 3", ok, f"max relative drift over {len(runs)} scenarios: {detail} (< 1e-8)")
    assert ok


def test_criterion_04_mutual_information_is_twice_entropy(runs):
    worst = max(
        float(np.max(np.abs(r.series.column("mutual_info") - 2 * r.series.column("entropy")))) for r in runs.values()
    )
    ok = worst < 1e-10
    record_criterion("criterion 4", ok, f"max |I - 2S| = {worst:.1e} over all grid points (< 1e-10)")
    assert ok


# --- 5 ---------------------------------------------------------------------------------------


def test_criterion_05_power_gain_of_two_chargers():
    get_propagator.cache_clear()
    start = time.perf_counter()
    single = maxima_for(make_scenario(N_CELLS, paired_charger("single", 2.5)))
    pair = maxima_for(make_scenario(N_CELLS, paired_charger("product_pair", 2.5)))
    elapsed = time.perf_counter() - start
    gain = (pair.p_max - single.p_max) / single.p_max
    ok = 0.60 <= gain <= 0.90 and elapsed < 300
    record_criterion(
        "criterion 5",
        ok,
        f"alpha=2.5 power gain {gain:+.3f} (target [0.60, 0.90]); P_max single {single.p_max:.4g}, "
        f"pair {pair.p_max:.3g}; {elapsed:.0f} s",
    )
    assert ok


# --- 6, 7 ------------------------------------------------------------------------------------


def test_criterion_06_ergotropy_ordering(runs):
    hi_bell = runs[(2.5, ChargerKind.SEMI_BELL_PLUS)].ergotropy.value
    hi_prod = runs[(2.5, ChargerKind.PRODUCT_PAIR)].ergotropy.value
    lo_bell = runs[(0.5, ChargerKind.SEMI_BELL_PLUS)].ergotropy.value
    lo_prod = runs[(0.5, ChargerKind.PRODUCT_PAIR)].ergotropy.value
    rel = abs(lo_bell - lo_prod) / max(abs(lo_bell), abs(lo_prod))
    ok = hi_bell > hi_prod and rel <= 0.10
    record_criterion(
        "criterion 6",
        ok,
        f"alpha=2.5 E_max bell+ {hi_bell:.4g} vs product {hi_prod:.3g}; "
        f"alpha=0.5 bell+ {lo_bell:.4g} vs product {lo_prod:.3g}, relative difference {rel:.2f} (<= 0.10)",
    )
    assert ok


def test_criterion_07_purity_and_energy_ordering(runs):
    bell, prod = runs[(2.5, ChargerKind.SEMI_BELL_PLUS)], runs[(2.5, ChargerKind.PRODUCT_PAIR)]
    ok = bell.min_purity < prod.min_purity and bell.energy.value > prod.energy.value
    record_criterion(
        "criterion 7",
        ok,
        f"min purity bell+ {bell.min_purity:.4f} < product {prod.min_purity:.4f}; "
        f"max energy bell+ {bell.energy.value:.4f} > product {prod.energy.value:.3g}",
    )
    assert ok


# --- 8 ---------------------------------------------------------------------------------------


@pytest.mark.filterwarnings("ignore:.*right end")
def test_criterion_08_delta_sign_structure():
    res = alpha_sweep(N_CELLS, DEFAULT_ALPHAS, ("single", "product_pair"))
    d_erg = np.array([res.delta_ergotropy(a) for a in res.alphas])
    d_pow = np.array([res.delta_power(a) for a in res.alphas])
    ok = bool(np.any(d_erg < 0) and np.all(d_pow > 0))
    record_criterion(
        "criterion 8",
        ok,
        f"{int(np.sum(d_erg < 0))}/{len(d_erg)} alphas with delta_E < 0; "
        f"{int(np.sum(d_pow > 0))}/{len(d_pow)} with delta_P > 0 (need all); "
        f"delta_P range [{d_pow.min():.3g}, {d_pow.max():.3g}]",
    )
    assert ok


# --- 9, 10 -----------------------------------------------------------------------------------


@pytest.mark.filterwarnings("ignore:.*right end")
def test_criterion_09_single_cell_separable_charger():
    prod = maxima_for(make_scenario(1, paired_charger("product_pair", 2.5)))
    bell = maxima_for(make_scenario(1, paired_charger("semi_bell_plus", 2.5)))
    ok = prod.ergotropy_max < 0.05 and bell.ergotropy_max >= 5 * max(prod.ergotropy_max, 0.05)
    record_criterion(
        "criterion 9",
        ok,
        f"one cell, alpha=2.5: E_max product {prod.ergotropy_max:.3g} (< 0.05), bell+ {bell.ergotropy_max:.4g}",
    )
    assert ok


def test_criterion_10_entangled_charger_ordering(runs):
    minus = runs[(2.5, ChargerKind.SEMI_BELL_MINUS)].ergotropy.value
    zeta = runs[(2.5, ChargerKind.ZETA)].ergotropy.value
    prod = runs[(2.5, ChargerKind.PRODUCT_PAIR)].ergotropy.value
    ok = minus >= zeta > prod
    record_criterion("criterion 10", ok, f"E_max bell- {minus:.4g} >= zeta {zeta:.4g} > product {prod:.3g}")
    assert ok


# --- 11 --------------------------------------------------------------------------------------


def _random_properties(seeds=range(40)):
    """Worst violations over random battery states; each entry should be ~0."""
    X = np.array([[0, 1], [1, 0]])
    worst = {"two_path": 0.0, "tie_break": 0.0, "consonance": 0.0, "bounds": 0.0}
    H = build_battery_hamiltonian(N_CELLS)
    eps, ev = energy_levels(H)
    for seed in seeds:
        rng = np.random.default_rng(seed)
        rho = random_density(2**N_CELLS, seed, rank=1 + seed % 4)
        erg = ergotropy(rho, H)
        worst["two_path"] = max(worst["two_path"], abs(erg - ergotropy_from_passive(rho, H)))
        order = np.arange(len(eps))
        for level in np.unique(eps):
            block = np.flatnonzero(eps == level)
            order[block] = rng.permutation(block)
        worst["tie_break"] = max(worst["tie_break"], abs(ergotropy(rho, H, levels=(eps[order], ev[:, order])) - erg))
        local = [
            (X if rng.random() < 0.5 else np.eye(2)) @ np.diag([1, np.exp(1j * rng.uniform(0, 2 * np.pi))])
            for _ in range(N_CELLS)
        ]
        u = reduce(np.kron, local)
        worst["consonance"] = max(
            worst["consonance"], abs(quantum_consonance(u @ rho @ u.conj().T) - quantum_consonance(rho))
        )
    return worst


def test_criterion_11_property_suite(runs):
    worst = _random_properties()
    H = build_battery_hamiltonian(N_CELLS)
    bound_violation = 0.0
    for r in runs.values():
        e, erg, gamma = (r.series.column(c) for c in ("energy", "ergotropy", "gamma"))
        bound_violation = max(bound_violation, float(np.max(-erg)), float(np.max(erg - e)))
        g = gamma[~np.isnan(gamma)]
        if g.size:
            bound_violation = max(bound_violation, float(np.max(-g)), float(np.max(g - 1)))
    # two-path equality on states the dynamics actually produces
    run = runs[(2.5, ChargerKind.SEMI_BELL_PLUS)]
    prop = get_propagator(run.scenario.model)
    for psi in evolve_series(prop, run.scenario.initial_state(), np.linspace(0, 3, 7)):
        m = psi.battery_charger_matrix()
        rho = m @ m.conj().T
        worst["two_path"] = max(worst["two_path"], abs(ergotropy(rho, H) - ergotropy_from_passive(rho, H)))
    worst["bounds"] = max(bound_violation, 0.0)
    ok = all(v <= 1e-10 for v in worst.values())
    record_criterion("criterion 11", ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (all <= 1e-10)")
    assert ok
