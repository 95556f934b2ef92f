import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbattery.dynamics import (
    Propagator,
    TimeGrid,
    conservation_drift,
    dense_oracle_evolve,
    evolve,
    evolve_series,
    prepare_propagator,
)
from qbattery.errors import LayoutMismatchError, ResourceGuardError
from qbattery.hamiltonian import ModelConfig, build_total_hamiltonian, excitation_operator
from qbattery.hilbert import BasisState, SpaceLayout, basis_index, build_sectors
from qbattery.states import PureState

from conftest import random_state


def _setup(cfg):
    H = build_total_hamiltonian(cfg)
    return H, prepare_propagator(H, build_sectors(cfg.layout))


def test_time_grid_validation():
    g = TimeGrid.uniform()
    assert len(g) == 1001 and g.span == (0.0, 10.0)
    with pytest.raises(ValueError):
        TimeGrid([0.1, 0.2])
    with pytest.raises(ValueError):
        TimeGrid([0.0, 0.2, 0.2])
    with pytest.raises(ValueError):
        TimeGrid.uniform(1.0, 1)


def test_diagonal_h_gives_identity_eigenvectors():
    cfg = ModelConfig(2, (2,), g=0.0)
    H, prop = _setup(cfg)
    diag = H.diagonal()
    for sec in prop.sectors:
        np.testing.assert_allclose(sec.eigenvalues, np.sort(diag[sec.indices]))
        v = np.abs(sec.eigenvectors)
        np.testing.assert_allclose(v @ v.T, np.eye(len(sec.indices)), atol=1e-14)
        assert set(np.unique(v)) <= {0.0, 1.0}


def test_jc_sector_eigenvalues():
    cfg = ModelConfig(1, (1,), omega0=1.0, g=2.0)
    _, prop = _setup(cfg)
    sec = next(s for s in prop.sectors if s.excitation == 1)
    np.testing.assert_allclose(sec.eigenvalues, [0.5 - 2.0, 0.5 + 2.0])


@pytest.mark.parametrize("cfg", [ModelConfig(2, (3,), g=1.3), ModelConfig(1, (2, 2), g=-0.7), ModelConfig(3, (2,))])
def test_sector_reconstruction_and_phase_convention(cfg):
    H, prop = _setup(cfg)
    dense = H.to_dense()
    scale = np.abs(dense).max()
    for sec in prop.sectors:
        V, w = sec.eigenvectors, sec.eigenvalues
        block = dense[np.ix_(sec.indices, sec.indices)]
        assert np.abs(V @ np.diag(w) @ V.conj().T - block).max() < 1e-10 * scale
        assert np.abs(V.conj().T @ V - np.eye(len(w))).max() < 1e-10
        pivot = V[np.argmax(np.abs(V), axis=0), np.arange(len(w))]
        assert np.all(pivot.real > 0) and np.allclose(pivot.imag, 0)


def test_evolve_at_zero_is_exact():
    cfg = ModelConfig(2, (2,))
    _, prop = _setup(cfg)
    psi = PureState(cfg.layout, random_state(cfg.layout, 0))
    np.testing.assert_array_equal(evolve(prop, psi, 0.0).amplitudes, psi.amplitudes)


def test_rabi_oscillation_single_photon():
    cfg = ModelConfig(1, (3,), omega0=1.0, g=2.0)
    _, prop = _setup(cfg)
    lay = cfg.layout
    amps = np.zeros(lay.total_dim, complex)
    amps[basis_index(lay, BasisState((0,), (1,)))] = 1
    psi0 = PureState(lay, amps)
    grid = TimeGrid.uniform(5.0, 201)
    # row 1 of the battery x charger matrix is the excited-qubit block
    excited = np.array([np.sum(np.abs(p.battery_charger_matrix()[1]) ** 2) for p in evolve_series(prop, psi0, grid)])
    np.testing.assert_allclose(excited, np.sin(2.0 * grid.t_values) ** 2, atol=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_matches_dense_oracle(seed):
    cfg = ModelConfig(2, (4,))
    H, prop = _setup(cfg)
    rng = np.random.default_rng(seed)
    psi = PureState(cfg.layout, random_state(cfg.layout, seed))
    for t in rng.uniform(0, 10, size=10):
        got = evolve(prop, psi, t).amplitudes
        assert np.abs(got - dense_oracle_evolve(H, psi, t)).max() < 1e-8


def test_series_equals_pointwise_evolve():
    cfg = ModelConfig(2, (2, 1))
    _, prop = _setup(cfg)
    psi = PureState(cfg.layout, random_state(cfg.layout, 4))
    grid = TimeGrid(np.concatenate([[0.0], np.sort(np.random.default_rng(1).uniform(0, 3, 150))]))
    for t, state in zip(grid.t_values, evolve_series(prop, psi, grid)):
        np.testing.assert_allclose(state.amplitudes, evolve(prop, psi, t).amplitudes, atol=1e-12)


def test_zero_coupling_preserves_populations():
    cfg = ModelConfig(2, (3,), g=0.0)
    H, prop = _setup(cfg)
    psi = PureState(cfg.layout, random_state(cfg.layout, 2))
    for t in (0.3, 1.7, 9.0):
        np.testing.assert_allclose(np.abs(evolve(prop, psi, t).amplitudes), np.abs(psi.amplitudes), atol=1e-12)
        np.testing.assert_allclose(np.abs(dense_oracle_evolve(H, psi, t)), np.abs(psi.amplitudes), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.floats(0, 5), st.floats(0, 5))
def test_time_composition_and_norm(seed, t1, t2):
    cfg = ModelConfig(2, (2,))
    _, prop = _setup(cfg)
    psi = PureState(cfg.layout, random_state(cfg.layout, seed))
    a = evolve(prop, evolve(prop, psi, t1), t2).amplitudes
    b = evolve(prop, psi, t1 + t2).amplitudes
    assert np.abs(a - b).max() < 1e-9
    assert abs(np.linalg.norm(b) - 1) < 1e-10


def test_conservation_drift_small():
    cfg = ModelConfig(2, (3, 3))
    H, prop = _setup(cfg)
    psi = PureState(cfg.layout, random_state(cfg.layout, 9))
    d = conservation_drift(prop, H, excitation_operator(cfg.layout), psi, TimeGrid.uniform(10, 101))
    assert d["norm"] < 1e-10
    assert d["energy"] < 1e-8 * H.norm_bound()
    assert d["excitation"] < 1e-10


def test_layout_mismatch_and_oracle_guard():
    _, prop = _setup(ModelConfig(1, (2,)))
    other = SpaceLayout(1, (3,))
    with pytest.raises(LayoutMismatchError):
        evolve(prop, PureState(other, random_state(other, 0)), 1.0)
    big = build_total_hamiltonian(ModelConfig(4, (20, 20)))
    with pytest.raises(ResourceGuardError):
        dense_oracle_evolve(big, np.zeros(big.dim), 1.0)
