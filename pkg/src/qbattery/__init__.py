"""Exact simulation of quantum batteries charged by one or two bosonic cavities."""

from .dynamics import TimeGrid, evolve, evolve_series, prepare_propagator
from .experiments import (
    MetricsSeries,
    Scenario,
    alpha_sweep,
    make_scenario,
    max_over_time,
    run_time_series,
    size_scaling,
)
from .hamiltonian import ModelConfig, build_battery_hamiltonian, build_total_hamiltonian
from .hilbert import BasisState, SpaceLayout, basis_index, basis_state, build_sectors, partial_trace
from .states import ChargerKind, ChargerSpec, PureState, build_initial_state, coherent_amplitudes

__version__ = "0.1.0"
