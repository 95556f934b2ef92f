"""Basis bookkeeping for ``N_B`` qubits coupled to one or two truncated modes.

Basis states are ordered row-major with the qubits as the most significant
digits, so the battery block is the leading axis of the amplitude tensor::

    psi.reshape(2**n_qubits, charger_dim)

Each qubit digit is 0 for ``|g>`` and 1 for ``|e>``; each mode digit is its
photon number ``n_j`` in ``[0, cutoff_j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import LayoutMismatchError

Block = Literal["battery", "charger"]


@dataclass(frozen=True)
class SpaceLayout:
    """Qubit count and per-mode Fock cutoffs of the composite space."""

    n_qubits: int
    mode_cutoffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mode_cutoffs", tuple(int(c) for c in self.mode_cutoffs))
        if int(self.n_qubits) < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        object.__setattr__(self, "n_qubits", int(self.n_qubits))
        if len(self.mode_cutoffs) not in (1, 2):
            raise ValueError(f"expected 1 or 2 modes, got {len(self.mode_cutoffs)}")
        if any(c < 0 for c in self.mode_cutoffs):
            raise ValueError(f"mode cutoffs must be >= 0, got {self.mode_cutoffs}")

    @property
    def n_modes(self) -> int:
        return len(self.mode_cutoffs)

    @property
    def dims(self) -> tuple[int, ...]:
        """Local dimension of every digit, qubits first."""
        return (2,) * self.n_qubits + tuple(c + 1 for c in self.mode_cutoffs)

    @property
    def battery_dim(self) -> int:
        return 2**self.n_qubits

    @property
    def charger_dim(self) -> int:
        return int(np.prod([c + 1 for c in self.mode_cutoffs]))

    @property
    def total_dim(self) -> int:
        return self.battery_dim * self.charger_dim

    @property
    def strides(self) -> tuple[int, ...]:
        dims = self.dims
        out = []
        acc = 1
        for d in reversed(dims):
            out.append(acc)
            acc *= d
        return tuple(reversed(out))

    @property
    def max_excitation(self) -> int:
        return self.n_qubits + sum(self.mode_cutoffs)


@dataclass(frozen=True)
class BasisState:
    qubit_bits: tuple[int, ...]
    occupations: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubit_bits", tuple(int(b) for b in self.qubit_bits))
        object.__setattr__(self, "occupations", tuple(int(n) for n in self.occupations))

    @property
    def total_excitation(self) -> int:
        return sum(self.qubit_bits) + sum(self.occupations)


def basis_index(layout: SpaceLayout, state: BasisState) -> int:
    """Mixed-radix index of ``state``; raises ``IndexError`` when out of bounds."""
    if len(state.qubit_bits) != layout.n_qubits or len(state.occupations) != layout.n_modes:
        raise IndexError(
            f"state has {len(state.qubit_bits)} qubits/{len(state.occupations)} modes, "
            f"layout expects {layout.n_qubits}/{layout.n_modes}"
        )
    digits = state.qubit_bits + state.occupations
    index = 0
    for digit, dim in zip(digits, layout.dims):
        if not 0 <= digit < dim:
            raise IndexError(f"digit {digit} outside [0, {dim - 1}] in {state}")
        index = index * dim + digit
    return index


def basis_state(layout: SpaceLayout, index: int) -> BasisState:
    if not 0 <= index < layout.total_dim:
        raise IndexError(f"index {index} outside [0, {layout.total_dim})")
    digits = []
    for dim in reversed(layout.dims):
        index, digit = divmod(index, dim)
        digits.append(digit)
    digits.reverse()
    return BasisState(tuple(digits[: layout.n_qubits]), tuple(digits[layout.n_qubits :]))


def basis_digits(layout: SpaceLayout) -> np.ndarray:
    """All basis states as a ``(total_dim, n_qubits + n_modes)`` integer table."""
    return np.indices(layout.dims).reshape(len(layout.dims), -1).T


def excitation_numbers(layout: SpaceLayout) -> np.ndarray:
    """Total excitation ``sum(bits) + sum(occupations)`` of every basis index."""
    return basis_digits(layout).sum(axis=1)


@dataclass(frozen=True)
class SectorDecomposition:
    """Partition of the basis into fixed total-excitation blocks."""

    layout: SpaceLayout
    sectors: tuple[tuple[int, np.ndarray], ...] = field(repr=False)

    def __iter__(self):
        return iter(self.sectors)

    def __len__(self):
        return len(self.sectors)

    @property
    def sizes(self) -> list[int]:
        return [len(idx) for _, idx in self.sectors]

    def sector_of(self) -> np.ndarray:
        """Excitation number of every basis index."""
        out = np.empty(self.layout.total_dim, dtype=int)
        for n, idx in self.sectors:
            out[idx] = n
        return out


def build_sectors(layout: SpaceLayout) -> SectorDecomposition:
    exc = excitation_numbers(layout)
    order = np.argsort(exc, kind="stable")
    bounds = np.searchsorted(exc[order], np.arange(layout.max_excitation + 2))
    sectors = []
    for n in range(layout.max_excitation + 1):
        idx = order[bounds[n] : bounds[n + 1]]
        if len(idx):
            idx = np.sort(idx)
            idx.setflags(write=False)
            sectors.append((n, idx))
    return SectorDecomposition(layout, tuple(sectors))


def _as_amplitudes(state) -> np.ndarray:
    amps = getattr(state, "amplitudes", state)
    return np.asarray(amps, dtype=complex)


def partial_trace(state, layout: SpaceLayout, keep: Block) -> np.ndarray:
    """Reduced density matrix of the battery (all qubits) or charger (all modes).

    ``state`` may be a :class:`~qbattery.states.PureState`, an amplitude
    vector or a full density matrix on ``layout``.
    """
    if keep not in ("battery", "charger"):
        raise ValueError(f"keep must be 'battery' or 'charger', got {keep!r}")
    layout_of_state = getattr(state, "layout", None)
    if layout_of_state is not None and layout_of_state != layout:
        raise LayoutMismatchError(f"state layout {layout_of_state} != {layout}")
    arr = _as_amplitudes(state)
    db, dc = layout.battery_dim, layout.charger_dim
    if arr.ndim == 1:
        if arr.shape[0] != layout.total_dim:
            raise LayoutMismatchError(f"vector length {arr.shape[0]} != total_dim {layout.total_dim}")
        m = arr.reshape(db, dc)
        if keep == "battery":
            return m @ m.conj().T
        return m.T @ m.conj()
    if arr.shape != (layout.total_dim, layout.total_dim):
        raise LayoutMismatchError(f"density matrix shape {arr.shape} does not match {layout}")
    t = arr.reshape(db, dc, db, dc)
    if keep == "battery":
        return np.einsum("icjc->ij", t)
    return np.einsum("aiaj->ij", t)


def single_qubit_reduced(rho: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    """2x2 reduced state of ``qubit`` from an ``n_qubits`` density matrix."""
    t = np.asarray(rho).reshape((2,) * (2 * n_qubits))
    letters = "abcdefghijklmnopqrstuvwxyz"
    row = list(letters[:n_qubits])
    col = list(letters[:n_qubits])
    row[qubit] = "X"
    col[qubit] = "Y"
    return np.einsum("".join(row) + "".join(col) + "->XY", t)


def check_density_matrix(rho: np.ndarray, herm_tol=1e-12, trace_tol=1e-10, eig_tol=1e-10) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    scale = max(1.0, np.abs(rho).max())
    if np.abs(rho - rho.conj().T).max() > herm_tol * scale:
        raise ValueError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise ValueError(f"density matrix trace {tr} != 1")
    if np.linalg.eigvalsh(rho).min() < -eig_tol:
        raise ValueError("density matrix has negative eigenvalues")
