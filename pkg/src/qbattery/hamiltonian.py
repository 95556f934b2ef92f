"""Tavis-Cummings Hamiltonian for ``N_B`` qubits and one or two resonant modes.

    H = w0/2 sum_i sz_i + sum_j w_j a_j^+ a_j + g sum_ij (s+_i a_j + s-_i a_j^+)

The ladder is closed at each cutoff: ``a_j^+`` acting on ``|n_max>`` is dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import LayoutMismatchError
from .hilbert import SpaceLayout, basis_digits


@dataclass(frozen=True)
class ModelConfig:
    """Physical parameters; ``g`` defaults to ``2*omega0`` and modes to resonance."""

    n_qubits: int
    mode_cutoffs: tuple[int, ...]
    omega0: float = 1.0
    g: float | None = None
    omega_mode: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")
        object.__setattr__(self, "mode_cutoffs", tuple(int(c) for c in self.mode_cutoffs))
        if self.g is None:
            object.__setattr__(self, "g", 2.0 * self.omega0)
        if self.omega_mode is None:
            object.__setattr__(self, "omega_mode", (float(self.omega0),) * len(self.mode_cutoffs))
        else:
            object.__setattr__(self, "omega_mode", tuple(float(w) for w in self.omega_mode))
        if len(self.omega_mode) != len(self.mode_cutoffs):
            raise ValueError("omega_mode and mode_cutoffs must have the same length")

    @property
    def layout(self) -> SpaceLayout:
        return SpaceLayout(self.n_qubits, self.mode_cutoffs)


@dataclass(frozen=True)
class SparseHermitian:
    """Hermitian matrix stored as its upper triangle plus diagonal (COO)."""

    dim: int
    rows: np.ndarray = field(repr=False)
    cols: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        cols = np.asarray(self.cols, dtype=np.int64)
        if np.any(rows > cols):
            raise ValueError("only upper-triangle entries may be stored")
        values = np.asarray(self.values, dtype=complex)
        diag = rows == cols
        if np.any(np.abs(values[diag].imag) > 0):
            raise ValueError("diagonal entries must be real")
        for name, arr in (("rows", rows), ("cols", cols), ("values", values)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_csr(self) -> sp.csr_matrix:
        return self._csr

    @cached_property
    def _csr(self) -> sp.csr_matrix:
        off = self.rows != self.cols
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        v = np.concatenate([self.values, self.values[off].conj()])
        return sp.csr_matrix((v, (r, c)), shape=(self.dim, self.dim))

    def to_dense(self) -> np.ndarray:
        return self.dense.copy()

    @cached_property
    def dense(self) -> np.ndarray:
        """Cached dense matrix; treat as read-only."""
        return self._csr.toarray()

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.dim)
        diag = self.rows == self.cols
        np.add.at(d, self.rows[diag], self.values[diag].real)
        return d

    @property
    def is_diagonal(self) -> bool:
        return bool(np.all((self.rows == self.cols) | (self.values == 0)))

    def block(self, indices: np.ndarray) -> np.ndarray:
        """Dense sub-block on sorted ``indices``."""
        idx = np.asarray(indices)
        return self.to_csr()[idx][:, idx].toarray()

    def expectation(self, vec: np.ndarray) -> float:
        vec = np.asarray(vec)
        return float(np.vdot(vec, self.to_csr() @ vec).real)

    def norm_bound(self) -> float:
        """Max absolute row sum of the full matrix (an upper bound on the spectral norm)."""
        return float(np.abs(self.to_csr()).sum(axis=1).max())


def _diag(values: np.ndarray) -> SparseHermitian:
    idx = np.arange(len(values))
    return SparseHermitian(len(values), idx, idx, values)


def build_battery_hamiltonian(n_qubits: int, omega0: float = 1.0) -> SparseHermitian:
    """``w0/2 sum_i sz_i`` on the qubit block, bit 1 meaning excited."""
    if n_qubits < 1:
        raise ValueError(f"n_qubits must be >= 1, got {n_qubits}")
    bits = np.indices((2,) * n_qubits).reshape(n_qubits, -1)
    excited = bits.sum(axis=0)
    return _diag(omega0 * (excited - n_qubits / 2))


def build_total_hamiltonian(config: ModelConfig, layout: SpaceLayout | None = None) -> SparseHermitian:
    layout = config.layout if layout is None else layout
    if layout.n_qubits != config.n_qubits or layout.mode_cutoffs != config.mode_cutoffs:
        raise LayoutMismatchError(f"layout {layout} does not match model {config}")
    nb = layout.n_qubits
    digits = basis_digits(layout)
    bits, occ = digits[:, :nb], digits[:, nb:]
    diag = config.omega0 / 2 * (2 * bits.sum(axis=1) - nb) + occ @ np.asarray(config.omega_mode)

    strides = layout.strides
    rows = [np.arange(layout.total_dim)]
    cols = [np.arange(layout.total_dim)]
    vals = [diag.astype(complex)]
    for i in range(nb):
        for j, cutoff in enumerate(layout.mode_cutoffs):
            # s+_i a_j links (g_i, n_j + 1) -> (e_i, n_j); the ground partner has the lower index
            excited = np.flatnonzero((bits[:, i] == 1) & (occ[:, j] < cutoff))
            partner = excited - strides[i] + strides[nb + j]
            rows.append(partner)
            cols.append(excited)
            vals.append(config.g * np.sqrt(occ[excited, j] + 1.0) + 0j)
    return SparseHermitian(
        layout.total_dim, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    )


def excitation_operator(layout: SpaceLayout) -> SparseHermitian:
    """Diagonal total excitation number ``sum_i s+_i s-_i + sum_j a_j^+ a_j``."""
    return _diag(basis_digits(layout).sum(axis=1).astype(float))
