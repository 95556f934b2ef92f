"""Figures of merit for the battery reduced state.

Energies are in units of ``omega0`` and entropies in bits. None of the
functions here normalise per cell; that is a reporting choice made in
:mod:`qbattery.experiments`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.stats import unitary_group

from .errors import InvariantViolation
from .hamiltonian import SparseHermitian
from .hilbert import single_qubit_reduced

HERMITIAN_TOL = 1e-10
NEGATIVE_CLAMP = 1e-10
ENTROPY_FLOOR = 1e-14
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class Spectrum:
    """Eigen-decomposition with eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class PassiveState:
    energies: np.ndarray
    populations: np.ndarray
    energy_basis: np.ndarray

    def matrix(self) -> np.ndarray:
        v = self.energy_basis
        return (v * self.populations) @ v.conj().T

    @property
    def energy(self) -> float:
        return float(self.populations @ self.energies)


def _dense(H) -> np.ndarray:
    return H.dense if isinstance(H, SparseHermitian) else np.asarray(H)


def _check_hermitian(rho: np.ndarray, what="rho") -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{what} must be a square matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > HERMITIAN_TOL:
        raise ValueError(f"{what} is not Hermitian")
    return rho


def _check_dims(rho, H):
    if rho.shape[0] != H.shape[0]:
        raise ValueError(f"state dim {rho.shape[0]} != Hamiltonian dim {H.shape[0]}")


def spectrum(rho: np.ndarray) -> Spectrum:
    w, v = np.linalg.eigh(_check_hermitian(rho))
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def energy_levels(H) -> tuple[np.ndarray, np.ndarray]:
    """Ascending energies and eigenvectors.

    A diagonal ``H`` keeps computational basis vectors, degenerate levels in
    ascending index order.
    """
    if isinstance(H, SparseHermitian) and H.is_diagonal:
        d = H.diagonal()
        order = np.argsort(d, kind="stable")
        return d[order], np.eye(H.dim, dtype=complex)[:, order]
    Hd = _dense(H)
    if np.count_nonzero(Hd - np.diag(np.diag(Hd))) == 0:
        d = np.diag(Hd).real
        order = np.argsort(d, kind="stable")
        return d[order], np.eye(len(d), dtype=complex)[:, order]
    return np.linalg.eigh(_check_hermitian(Hd, "H"))


def ground_energy(H) -> float:
    return float(energy_levels(H)[0][0])


def stored_energy(rho_B: np.ndarray, H_B) -> float:
    """``Tr(rho H_B)`` measured from the ground energy of ``H_B``."""
    rho = _check_hermitian(rho_B)
    Hd = _dense(H_B)
    _check_dims(rho, Hd)
    return float(np.einsum("ij,ji->", rho, Hd).real) - ground_energy(H_B)


def _clamp(value: float, what: str) -> float:
    if value < 0:
        if value < -NEGATIVE_CLAMP:
            raise InvariantViolation(f"{what} = {value:.3e} is negative beyond tolerance")
        return 0.0
    return value


def ergotropy(rho_B: np.ndarray, H_B, levels: tuple[np.ndarray, np.ndarray] | None = None) -> float:
    """``sum_ij p_i e_j (|<p_i|e_j>|^2 - delta_ij)``, ``p`` descending and ``e`` ascending.

    ``levels`` overrides the ``(energies, eigenvectors)`` pair taken from
    ``H_B``, e.g. to reorder a degenerate level.
    """
    rho = _check_hermitian(rho_B)
    spec = spectrum(rho)
    eps, ev = energy_levels(H_B) if levels is None else levels
    _check_dims(rho, ev)
    overlaps = np.abs(spec.eigenvectors.conj().T @ ev) ** 2
    value = spec.eigenvalues @ (overlaps - np.eye(len(eps))) @ eps
    return _clamp(float(value), "ergotropy")


def passive_state(rho_B: np.ndarray, H_B) -> PassiveState:
    p = np.linalg.eigvalsh(_check_hermitian(rho_B))[::-1]
    eps, ev = energy_levels(H_B)
    _check_dims(np.asarray(rho_B), ev)
    return PassiveState(eps, p, ev)


def ergotropy_from_passive(rho_B: np.ndarray, H_B) -> float:
    """``E(rho) - E(eta)`` with ``eta`` built explicitly as a matrix."""
    eta = passive_state(rho_B, H_B).matrix()
    Hd = _dense(H_B)
    value = np.einsum("ij,ji->", rho_B, Hd).real - np.einsum("ij,ji->", eta, Hd).real
    return _clamp(float(value), "ergotropy")


def charging_power(delta_e: float, t: float) -> float:
    if t < 0:
        raise ValueError(f"charging time must be non-negative, got {t}")
    if t == 0:
        return 0.0
    return delta_e / t


def purity(rho: np.ndarray) -> float:
    rho = np.asarray(rho)
    return float(np.einsum("ij,ji->", rho, rho).real)


def entropy_of_spectrum(p, floor: float = ENTROPY_FLOOR) -> float:
    p = np.asarray(p, dtype=float)
    if np.any(p < -NEGATIVE_CLAMP):
        raise InvariantViolation(f"eigenvalue {p.min():.3e} below -{NEGATIVE_CLAMP}")
    p = p[p > floor]
    return float(abs(-(p * np.log2(p)).sum()))


def von_neumann_entropy(rho: np.ndarray, floor: float = ENTROPY_FLOOR) -> float:
    return entropy_of_spectrum(np.linalg.eigvalsh(_check_hermitian(rho)), floor)


def mutual_information(s_b: float, s_c: float, s_bc: float) -> float:
    if min(s_b, s_c, s_bc) < 0:
        raise ValueError("entropies must be non-negative")
    return s_b + s_c - s_bc


def extractable_ratio(ergo: float, delta_e: float, floor: float = 1e-9) -> float:
    """``ergotropy / energy``; NaN when the stored energy is below ``floor``."""
    if delta_e <= floor:
        return float("nan")
    ratio = ergo / delta_e
    if ratio < -NEGATIVE_CLAMP or ratio > 1 + 1e-8:
        raise InvariantViolation(f"extractable ratio {ratio} outside [0, 1]")
    return min(max(ratio, 0.0), 1.0)


def _n_qubits(rho: np.ndarray) -> int:
    n = int(round(np.log2(rho.shape[0])))
    if rho.shape[0] != 2**n or n < 1:
        raise ValueError(f"dimension {rho.shape[0]} is not a power of two")
    return n


def _basis_closest_eigvecs(rho_m: np.ndarray) -> np.ndarray:
    _, v = np.linalg.eigh(rho_m)
    if abs(v[0, 0]) < abs(v[0, 1]):
        v = v[:, ::-1]
    pivot = np.argmax(np.abs(v), axis=0)
    ph = v[pivot, [0, 1]]
    return v * (np.abs(ph) / ph)


def local_decohering_unitaries(
    rho_B: np.ndarray, degeneracy_tol: float = DEGENERACY_TOL, rng: np.random.Generator | None = None
) -> list[np.ndarray]:
    """Per-qubit ``U_m`` with ``U_m rho_m U_m^dagger`` diagonal.

    Degenerate ``rho_m`` gets the identity, or a Haar-random unitary when
    ``rng`` is given.
    """
    rho = np.asarray(rho_B)
    n = _n_qubits(rho)
    out = []
    for m in range(n):
        rho_m = single_qubit_reduced(rho, n, m)
        w = np.linalg.eigvalsh(rho_m)
        if w[1] - w[0] < degeneracy_tol:
            u = np.eye(2, dtype=complex) if rng is None else unitary_group.rvs(2, random_state=rng)
        else:
            u = _basis_closest_eigvecs(rho_m).conj().T
        out.append(u)
    return out


def quantum_consonance(
    rho_B: np.ndarray, degeneracy_tol: float = DEGENERACY_TOL, rng: np.random.Generator | None = None
) -> float:
    """Sum of ``|rho^c_{k,l}|`` over index pairs differing on every qubit.

    ``rho^c`` is ``rho_B`` after the local unitaries that diagonalise each
    single-qubit marginal. A single qubit has no such non-local content and
    returns 0.
    """
    rho = _check_hermitian(rho_B)
    n = _n_qubits(rho)
    if n == 1:
        return 0.0
    u = reduce(np.kron, local_decohering_unitaries(rho, degeneracy_tol, rng))
    rho_c = u @ rho @ u.conj().T
    k = np.arange(2**n)
    return float(np.abs(rho_c[k, k ^ (2**n - 1)]).sum())


def consonance_sensitivity(rho_B: np.ndarray, samples: int = 32, seed: int = 0) -> tuple[float, float]:
    """Range of consonance over random unitaries on degenerate marginals."""
    rng = np.random.default_rng(seed)
    vals = [quantum_consonance(rho_B)]
    vals += [quantum_consonance(rho_B, rng=rng) for _ in range(samples)]
    return min(vals), max(vals)
