"""Exact propagation ``psi(t) = exp(-iHt) psi(0)`` via per-sector diagonalisation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
import scipy.linalg

from .errors import LayoutMismatchError, PropagatorError, ResourceGuardError
from .hamiltonian import SparseHermitian
from .hilbert import SectorDecomposition, SpaceLayout
from .states import PureState

ORACLE_DIM_LIMIT = 4096
CHUNK = 64


@dataclass(frozen=True)
class TimeGrid:
    t_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_values, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("time grid must be a non-empty 1-d array")
        if t[0] != 0:
            raise ValueError(f"time grid must start at 0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        t.setflags(write=False)
        object.__setattr__(self, "t_values", t)

    @classmethod
    def uniform(cls, t_max: float = 10.0, points: int = 1001) -> "TimeGrid":
        if points < 2 or t_max <= 0:
            raise ValueError(f"need t_max > 0 and points >= 2, got {t_max}, {points}")
        return cls(np.linspace(0.0, t_max, points))

    def __len__(self):
        return len(self.t_values)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.t_values[0]), float(self.t_values[-1])


@dataclass(frozen=True)
class SectorEigensystem:
    excitation: int
    indices: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Propagator:
    layout: SpaceLayout
    sectors: tuple[SectorEigensystem, ...] = field(repr=False)

    def coefficients(self, psi0: PureState) -> list[tuple[SectorEigensystem, np.ndarray]]:
        """Eigenbasis coefficients of ``psi0`` in every sector it occupies."""
        if psi0.layout != self.layout:
            raise LayoutMismatchError(f"state layout {psi0.layout} != propagator layout {self.layout}")
        out = []
        for sec in self.sectors:
            a = psi0.amplitudes[sec.indices]
            if np.any(a):
                out.append((sec, sec.eigenvectors.conj().T @ a))
        return out


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of each column real and positive."""
    pivot = np.argmax(np.abs(vecs), axis=0)
    ph = vecs[pivot, np.arange(vecs.shape[1])]
    return vecs * (np.abs(ph) / ph)


def prepare_propagator(H: SparseHermitian, sectors: SectorDecomposition) -> Propagator:
    if H.dim != sectors.layout.total_dim:
        raise LayoutMismatchError(f"H has dim {H.dim}, sectors cover {sectors.layout.total_dim}")
    csr = H.to_csr()
    sector_of = sectors.sector_of()
    coo = csr.tocoo()
    leak = sector_of[coo.row] != sector_of[coo.col]
    if np.any(leak & (coo.data != 0)):
        raise PropagatorError("Hamiltonian couples different excitation sectors")

    out = []
    for n, idx in sectors:
        block = csr[idx][:, idx].toarray()
        try:
            w, v = np.linalg.eigh(block)
        except np.linalg.LinAlgError as exc:
            raise PropagatorError(f"eigensolver failed in excitation sector N={n}: {exc}") from exc
        v = _fix_phases(v.astype(complex))
        for arr in (w, v):
            arr.setflags(write=False)
        out.append(SectorEigensystem(n, idx, w, v))
    return Propagator(sectors.layout, tuple(out))


def evolve(prop: Propagator, psi0: PureState, t: float) -> PureState:
    if t == 0:
        if psi0.layout != prop.layout:
            raise LayoutMismatchError(f"state layout {psi0.layout} != propagator layout {prop.layout}")
        return psi0
    amps = np.zeros(prop.layout.total_dim, dtype=complex)
    for sec, c in prop.coefficients(psi0):
        amps[sec.indices] = sec.eigenvectors @ (np.exp(-1j * sec.eigenvalues * t) * c)
    return PureState(prop.layout, amps)


def evolve_series(prop: Propagator, psi0: PureState, grid: TimeGrid | Sequence[float]) -> Iterator[PureState]:
    """Yield ``psi(t)`` for each grid time, evaluated in blocks of time points."""
    times = grid.t_values if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)
    coeffs = prop.coefficients(psi0)
    for start in range(0, len(times), CHUNK):
        ts = times[start : start + CHUNK]
        block = np.zeros((len(ts), prop.layout.total_dim), dtype=complex)
        for sec, c in coeffs:
            phases = np.exp(-1j * np.outer(sec.eigenvalues, ts)) * c[:, None]
            block[:, sec.indices] = (sec.eigenvectors @ phases).T
        for k, t in enumerate(ts):
            yield psi0 if t == 0 else PureState(prop.layout, block[k])


def dense_oracle_evolve(H, psi0: PureState | np.ndarray, t: float, dim_limit: int = ORACLE_DIM_LIMIT) -> np.ndarray:
    """Apply ``scipy.linalg.expm(-iHt)`` with no use of the sector structure."""
    dim = H.dim if isinstance(H, SparseHermitian) else np.shape(H)[0]
    if dim > dim_limit:
        raise ResourceGuardError(f"dense oracle limited to dim {dim_limit}, got {dim}")
    Hd = H.to_dense() if isinstance(H, SparseHermitian) else np.asarray(H)
    vec = np.asarray(getattr(psi0, "amplitudes", psi0), dtype=complex)
    return scipy.linalg.expm(-1j * t * Hd) @ vec


def conservation_drift(
    prop: Propagator, H: SparseHermitian, N: SparseHermitian, psi0: PureState, grid: TimeGrid
) -> dict[str, float]:
    """Largest deviation of norm, <H> and <N_exc> from their t=0 values over ``grid``."""
    Hc, Nc = H.to_csr(), N.to_csr()
    v0 = psi0.amplitudes
    e0 = np.vdot(v0, Hc @ v0).real
    n0 = np.vdot(v0, Nc @ v0).real
    drift = {"norm": 0.0, "energy": 0.0, "excitation": 0.0, "energy0": e0, "excitation0": n0}
    for psi in evolve_series(prop, psi0, grid):
        v = psi.amplitudes
        drift["norm"] = max(drift["norm"], abs(np.linalg.norm(v) - 1))
        drift["energy"] = max(drift["energy"], abs(np.vdot(v, Hc @ v).real - e0))
        drift["excitation"] = max(drift["excitation"], abs(np.vdot(v, Nc @ v).real - n0))
    return drift
