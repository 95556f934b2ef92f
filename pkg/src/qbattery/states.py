"""Initial states: empty battery times a coherent, product or cat-like charger."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammainc

from .errors import DegenerateStateError, LayoutMismatchError, TruncationError
from .hilbert import SpaceLayout

DEFICIT_TOLERANCE = 1e-10


class ChargerKind(str, enum.Enum):
    SINGLE = "single"
    PRODUCT_PAIR = "product_pair"
    SEMI_BELL_PLUS = "semi_bell_plus"
    SEMI_BELL_MINUS = "semi_bell_minus"
    ZETA = "zeta"

    @property
    def n_modes(self) -> int:
        return 1 if self is ChargerKind.SINGLE else 2


@dataclass(frozen=True)
class ChargerSpec:
    """Charger preparation.

    ``alphas`` holds one amplitude for ``SINGLE`` and ``ZETA``/``SEMI_BELL_MINUS``
    (the state is built from ``alpha`` alone) and two amplitudes for
    ``PRODUCT_PAIR`` and ``SEMI_BELL_PLUS``.
    """

    kind: ChargerKind
    alphas: tuple[complex, ...]

    def __post_init__(self):
        kind = ChargerKind(self.kind)
        object.__setattr__(self, "kind", kind)
        alphas = tuple(complex(a) for a in self.alphas)
        expected = 2 if kind in (ChargerKind.PRODUCT_PAIR, ChargerKind.SEMI_BELL_PLUS) else 1
        if len(alphas) != expected:
            raise ValueError(f"{kind.value} takes {expected} amplitude(s), got {len(alphas)}")
        object.__setattr__(self, "alphas", alphas)

    @classmethod
    def single(cls, alpha: complex) -> "ChargerSpec":
        return cls(ChargerKind.SINGLE, (alpha,))

    @classmethod
    def product_pair(cls, alpha1: complex, alpha2: complex | None = None) -> "ChargerSpec":
        """``|alpha1>|alpha2>``; ``alpha2`` defaults to ``-alpha1``."""
        return cls(ChargerKind.PRODUCT_PAIR, (alpha1, -alpha1 if alpha2 is None else alpha2))

    @classmethod
    def semi_bell_plus(cls, alpha1: complex, alpha2: complex | None = None) -> "ChargerSpec":
        """``|a1>|a1> + |a2>|a2>``; ``alpha2`` defaults to ``-alpha1``."""
        return cls(ChargerKind.SEMI_BELL_PLUS, (alpha1, -alpha1 if alpha2 is None else alpha2))

    @classmethod
    def semi_bell_minus(cls, alpha: complex) -> "ChargerSpec":
        return cls(ChargerKind.SEMI_BELL_MINUS, (alpha,))

    @classmethod
    def zeta(cls, alpha: complex) -> "ChargerSpec":
        return cls(ChargerKind.ZETA, (alpha,))

    @classmethod
    def from_kind(cls, kind: ChargerKind | str, alpha: complex) -> "ChargerSpec":
        """Standard charger of each kind at amplitude ``alpha``; pairs use ``(alpha, -alpha)``."""
        kind = ChargerKind(kind)
        return {
            ChargerKind.SINGLE: cls.single,
            ChargerKind.PRODUCT_PAIR: cls.product_pair,
            ChargerKind.SEMI_BELL_PLUS: cls.semi_bell_plus,
            ChargerKind.SEMI_BELL_MINUS: cls.semi_bell_minus,
            ChargerKind.ZETA: cls.zeta,
        }[kind](alpha)

    @property
    def n_modes(self) -> int:
        return self.kind.n_modes

    @property
    def max_abs_alpha(self) -> float:
        return max(abs(a) for a in self.alphas)

    def label(self) -> str:
        vals = ",".join(_fmt_complex(a) for a in self.alphas)
        return f"{self.kind.value}({vals})"


def _fmt_complex(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:g}"
    return f"{z.real:g}{z.imag:+g}j"


@dataclass(frozen=True)
class PureState:
    layout: SpaceLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.layout.total_dim,):
            raise LayoutMismatchError(
                f"amplitude vector of shape {amps.shape} on layout with dim {self.layout.total_dim}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def battery_charger_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to ``(battery_dim, charger_dim)``."""
        return self.amplitudes.reshape(self.layout.battery_dim, self.layout.charger_dim)


def default_cutoff(alpha: complex) -> int:
    """Fock cutoff ``max(20, ceil(|a|^2 + 7|a| + 10))``."""
    a = abs(alpha)
    return max(20, math.ceil(a * a + 7 * a + 10))


def truncation_deficit(alpha: complex, cutoff: int) -> float:
    """Poisson weight of ``|alpha>`` above ``cutoff``."""
    lam = abs(alpha) ** 2
    if lam == 0:
        return 0.0
    # P(N > cutoff) = P(cutoff + 1, lam), the regularised lower incomplete gamma
    return float(gammainc(cutoff + 1, lam))


def required_cutoff(alpha: complex, tolerance: float = DEFICIT_TOLERANCE) -> int:
    n = 0
    while truncation_deficit(alpha, n) > tolerance:
        n += 1
    return n


class CoherentVector(NamedTuple):
    amplitudes: np.ndarray
    deficit: float


def coherent_amplitudes(
    alpha: complex, cutoff: int, deficit_tolerance: float = DEFICIT_TOLERANCE
) -> CoherentVector:
    """Truncated coherent state renormalised on ``0..cutoff``.

    Raises ``TruncationError`` when the discarded Poisson tail exceeds
    ``deficit_tolerance``.
    """
    if cutoff < 0:
        raise ValueError(f"cutoff must be >= 0, got {cutoff}")
    alpha = complex(alpha)
    deficit = truncation_deficit(alpha, cutoff)
    if deficit > deficit_tolerance:
        need = required_cutoff(alpha, deficit_tolerance)
        raise TruncationError(
            f"|alpha|={abs(alpha):g} loses {deficit:.3e} > {deficit_tolerance:g} of its weight "
            f"above cutoff {cutoff}; need cutoff >= {need}",
            required_cutoff=need,
        )
    c = np.empty(cutoff + 1, dtype=complex)
    c[0] = math.exp(-abs(alpha) ** 2 / 2)
    for n in range(1, cutoff + 1):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return CoherentVector(c / np.linalg.norm(c), deficit)


def _vacuum(cutoff: int) -> np.ndarray:
    v = np.zeros(cutoff + 1, dtype=complex)
    v[0] = 1.0
    return v


def coherent_overlap(beta: complex, gamma: complex) -> complex:
    """Untruncated ``<beta|gamma>``."""
    return complex(np.exp(-abs(beta) ** 2 / 2 - abs(gamma) ** 2 / 2 + np.conj(beta) * gamma))


def semi_bell_plus_norm(alpha1: complex, alpha2: complex) -> float:
    """Squared norm of ``|a1>|a1> + |a2>|a2>`` for untruncated modes.

    For ``alpha2 = -alpha1`` this is ``2(1 + exp(-2(|a1|^2 + |a2|^2)))``.
    """
    return float(2 + 2 * (coherent_overlap(alpha1, alpha2) ** 2).real)


def semi_bell_minus_norm(alpha: complex) -> float:
    return float(2 * (1 - math.exp(-4 * abs(alpha) ** 2)))


def zeta_norm(alpha: complex) -> float:
    return float(2 * (1 + math.exp(-abs(alpha) ** 2)))


def _normalise(vec: np.ndarray, what: str) -> np.ndarray:
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise DegenerateStateError(f"{what} has zero norm")
    return vec / norm


def charger_state_unnormalised(spec: ChargerSpec, cutoffs: Sequence[int]) -> np.ndarray:
    """Superposition of truncated coherent products before the final normalisation."""
    cutoffs = tuple(int(c) for c in cutoffs)
    if len(cutoffs) != spec.n_modes:
        raise LayoutMismatchError(f"{spec.kind.value} needs {spec.n_modes} mode(s), got {len(cutoffs)}")

    def coh(a, c):
        return coherent_amplitudes(a, c).amplitudes

    kind = spec.kind
    if kind is ChargerKind.SINGLE:
        return coh(spec.alphas[0], cutoffs[0])
    c1, c2 = cutoffs
    if kind is ChargerKind.PRODUCT_PAIR:
        a1, a2 = spec.alphas
        return np.kron(coh(a1, c1), coh(a2, c2))
    if kind is ChargerKind.SEMI_BELL_PLUS:
        a1, a2 = spec.alphas
        return np.kron(coh(a1, c1), coh(a1, c2)) + np.kron(coh(a2, c1), coh(a2, c2))
    if kind is ChargerKind.SEMI_BELL_MINUS:
        (a,) = spec.alphas
        if a == 0:
            raise DegenerateStateError("semi_bell_minus with alpha=0 is the zero vector")
        return np.kron(coh(a, c1), coh(a, c2)) - np.kron(coh(-a, c1), coh(-a, c2))
    (a,) = spec.alphas
    return np.kron(coh(a, c1), _vacuum(c2)) + np.kron(_vacuum(c1), coh(a, c2))


def build_charger_state(spec: ChargerSpec, cutoffs: Sequence[int]) -> np.ndarray:
    """Normalised charger-block amplitudes, mode 0 as the major axis."""
    return _normalise(charger_state_unnormalised(spec, cutoffs), spec.label())


def build_initial_state(layout: SpaceLayout, spec: ChargerSpec) -> PureState:
    """``|g>^{N_B}`` tensored with the charger state of ``spec``."""
    charger = build_charger_state(spec, layout.mode_cutoffs)
    amps = np.zeros(layout.total_dim, dtype=complex)
    # all-ground battery is the leading block under qubit-major ordering
    amps[: layout.charger_dim] = charger
    return PureState(layout, amps)


def mode_occupation(state: PureState | np.ndarray, layout: SpaceLayout, mode: int) -> float:
    """``<a_j^dagger a_j>`` on a full state or on a charger-block vector."""
    amps = np.asarray(getattr(state, "amplitudes", state))
    cut = layout.mode_cutoffs
    shape = ((layout.battery_dim,) if amps.size == layout.total_dim else ()) + tuple(c + 1 for c in cut)
    probs = np.abs(amps.reshape(shape)) ** 2
    axis = len(shape) - len(cut) + mode
    n = np.arange(cut[mode] + 1).reshape([-1 if k == axis else 1 for k in range(len(shape))])
    return float((probs * n).sum())


def mean_photon_number(state: PureState | np.ndarray, layout: SpaceLayout) -> float:
    return sum(mode_occupation(state, layout, j) for j in range(layout.n_modes))
