"""Composite Hilbert space of one qubit and three truncated oscillator modes.

Tensor factors are always ordered ``(qubit, A, B, C)`` with the qubit the
slowest-varying index, so the global index of ``|q, nA, nB, nC>`` is
``((q * NA + nA) * NB + nB) * NC + nC``.  Qubit level 0 is ``|g>`` and
level 1 is ``|e>``.

Mixed states are kept as weighted ensembles of pure states; full density
matrices only ever appear on reduced subsystems.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import LayoutError, TruncationError

FACTORS = ("qubit", "A", "B", "C")
MODES = ("A", "B", "C")
QUBIT_LEVELS = {"g": 0, "e": 1, 0: 0, 1: 1}

TAIL_LEVELS = 2
TAIL_THRESHOLD = 1e-6


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ModeLayout:
    """Fock truncation of modes A, B, C (the qubit is always two-level)."""

    mode_dims: tuple[int, int, int] = (20, 20, 20)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.mode_dims)
        if len(dims) != 3:
            raise LayoutError(f"need three mode dimensions, got {len(dims)}")
        if any(d < 1 for d in dims):
            raise LayoutError(f"mode dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "mode_dims", dims)

    @classmethod
    def uniform(cls, n: int) -> "ModeLayout":
        return cls((n, n, n))

    @property
    def qubit_dim(self) -> int:
        return 2

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (2, *self.mode_dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.shape))

    def axis(self, factor: str) -> int:
        try:
            return FACTORS.index(factor)
        except ValueError:
            raise LayoutError(f"unknown tensor factor {factor!r}; expected one of {FACTORS}") from None

    def factor_dim(self, factor: str) -> int:
        return self.shape[self.axis(factor)]

    def encode(self, q: int, n_a: int, n_b: int, n_c: int) -> int:
        idx = (q, n_a, n_b, n_c)
        for name, n, d in zip(FACTORS, idx, self.shape):
            if not 0 <= n < d:
                raise TruncationError(f"level {n} of factor {name} outside 0..{d - 1}")
        return int(np.ravel_multi_index(idx, self.shape))

    def decode(self, index: int) -> tuple[int, int, int, int]:
        if not 0 <= index < self.dim:
            raise LayoutError(f"global index {index} outside 0..{self.dim - 1}")
        return tuple(int(i) for i in np.unravel_index(index, self.shape))


@dataclass(frozen=True, eq=False)
class PureState:
    layout: ModeLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != self.layout.dim:
            raise LayoutError(f"{amps.size} amplitudes for a layout of dimension {self.layout.dim}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @classmethod
    def from_tensor(cls, layout: ModeLayout, tensor: np.ndarray, normalize: bool = False) -> "PureState":
        amps = np.asarray(tensor, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0:
                raise ValueError("cannot normalize the zero vector")
            amps = amps / norm
        return cls(layout, amps)

    @classmethod
    def product(cls, layout: ModeLayout, qubit, mode_a, mode_b, mode_c) -> "PureState":
        """Product state from one vector per factor (each normalized here)."""
        vecs = []
        for name, v in zip(FACTORS, (qubit, mode_a, mode_b, mode_c)):
            v = np.asarray(v, dtype=complex).reshape(-1)
            if v.size != layout.factor_dim(name):
                raise LayoutError(f"factor {name}: vector of length {v.size}, layout wants {layout.factor_dim(name)}")
            vecs.append(v / np.linalg.norm(v))
        tensor = np.einsum("i,j,k,l->ijkl", *vecs)
        return cls(layout, tensor)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.shape)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __add__(self, other: "PureState") -> "PureState":
        _same_layout(self, other)
        return PureState(self.layout, self.amplitudes + other.amplitudes)

    def __mul__(self, c: complex) -> "PureState":
        return PureState(self.layout, c * self.amplitudes)

    __rmul__ = __mul__

    def normalized(self) -> "PureState":
        return PureState.from_tensor(self.layout, self.amplitudes, normalize=True)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weighted pure-state decomposition of a (rank-limited) mixed state."""

    branches: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        branches = tuple((float(w), s) for w, s in self.branches)
        if not branches:
            raise ValueError("an ensemble needs at least one branch")
        weights = np.array([w for w, _ in branches])
        if np.any(weights <= 0):
            raise ValueError(f"ensemble weights must be positive, got {weights}")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ValueError(f"ensemble weights sum to {weights.sum():.15g}, not 1")
        layout = branches[0][1].layout
        if any(s.layout != layout for _, s in branches):
            raise LayoutError("ensemble branches have different layouts")
        object.__setattr__(self, "branches", branches)

    @classmethod
    def pure(cls, state: PureState) -> "Ensemble":
        return cls(((1.0, state),))

    @classmethod
    def from_weighted(cls, pairs: Iterable[tuple[float, PureState]], prune: float = 0.0) -> "Ensemble":
        """Build from weights that need not sum to one; drops weights <= ``prune``."""
        kept = [(float(w), s) for w, s in pairs if w > prune]
        total = sum(w for w, _ in kept)
        return cls(tuple((w / total, s) for w, s in kept))

    @property
    def layout(self) -> ModeLayout:
        return self.branches[0][1].layout

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.branches])

    @property
    def states(self) -> list[PureState]:
        return [s for _, s in self.branches]

    def __len__(self) -> int:
        return len(self.branches)

    def map(self, fn) -> "Ensemble":
        return Ensemble(tuple((w, fn(s)) for w, s in self.branches))


@dataclass(frozen=True, eq=False)
class ReducedDensity:
    subsystem: tuple[str, ...]
    matrix: np.ndarray

    # eigenvalue positivity is only checked up to this size
    _EIG_CHECK_MAX = 1024

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise LayoutError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-12:
            raise ValueError(f"density matrix has trace {np.trace(m)}")
        if m.shape[0] <= self._EIG_CHECK_MAX and np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("density matrix has negative eigenvalues")
        object.__setattr__(self, "subsystem", tuple(self.subsystem))
        object.__setattr__(self, "matrix", _readonly(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return overlap_exact(self, self)


def _same_layout(x: PureState, y: PureState) -> None:
    if x.layout != y.layout:
        raise LayoutError(f"layout mismatch: {x.layout.mode_dims} vs {y.layout.mode_dims}")


def _as_ensemble(state) -> Ensemble:
    return Ensemble.pure(state) if isinstance(state, PureState) else state


def make_basis_state(layout: ModeLayout, q, n_a: int, n_b: int, n_c: int) -> PureState:
    amps = np.zeros(layout.dim, dtype=complex)
    amps[layout.encode(QUBIT_LEVELS[q], n_a, n_b, n_c)] = 1.0
    return PureState(layout, amps)


def vacuum(layout: ModeLayout, q="g") -> PureState:
    return make_basis_state(layout, q, 0, 0, 0)


def inner_product(x: PureState, y: PureState) -> complex:
    """<x|y>, antilinear in ``x``."""
    _same_layout(x, y)
    return complex(np.vdot(x.amplitudes, y.amplitudes))


def _ordered_keep(keep: Sequence[str]) -> tuple[str, ...]:
    keep = tuple(keep)
    if not keep:
        raise LayoutError("partial trace needs at least one factor to keep")
    for f in keep:
        if f not in FACTORS:
            raise LayoutError(f"unknown tensor factor {f!r}")
    if len(set(keep)) != len(keep):
        raise LayoutError(f"repeated factor in {keep}")
    return tuple(f for f in FACTORS if f in keep)


def partial_trace(rho_source, keep: Sequence[str]) -> ReducedDensity:
    """Reduced density operator on ``keep`` (factor order normalized to qubit, A, B, C)."""
    ens = _as_ensemble(rho_source)
    keep = _ordered_keep(keep)
    layout = ens.layout
    axes = [layout.axis(f) for f in keep]
    rest = [a for a in range(4) if a not in axes]
    dk = int(np.prod([layout.shape[a] for a in axes]))
    rho = np.zeros((dk, dk), dtype=complex)
    for w, s in ens.branches:
        m = np.transpose(s.tensor, axes + rest).reshape(dk, -1)
        rho += w * (m @ m.conj().T)
    # symmetrize away rounding so the Hermiticity check is about physics
    rho = 0.5 * (rho + rho.conj().T)
    return ReducedDensity(keep, rho)


def qubit_ground_probability(state) -> float:
    ens = _as_ensemble(state)
    p = sum(w * float(np.sum(np.abs(s.tensor[0]) ** 2)) for w, s in ens.branches)
    return float(min(max(p, 0.0), 1.0))


def overlap_exact(b_state: ReducedDensity, c_state: ReducedDensity) -> float:
    """Tr(rho1 rho2) for two density operators of equal dimension."""
    if b_state.dim != c_state.dim:
        raise LayoutError(f"dimension mismatch: {b_state.dim} vs {c_state.dim}")
    val = np.sum(b_state.matrix * c_state.matrix.T)
    if abs(val.imag) > 1e-12:
        raise ValueError(f"Tr(rho1 rho2) has imaginary part {val.imag}")
    return float(min(max(val.real, 0.0), 1.0))


def fock_distribution(state, mode: str) -> np.ndarray:
    """Occupation probabilities of one mode, averaged over the ensemble."""
    ens = _as_ensemble(state)
    ax = ens.layout.axis(mode)
    other = tuple(a for a in range(4) if a != ax)
    return sum(w * np.sum(np.abs(s.tensor) ** 2, axis=other) for w, s in ens.branches)


def tail_mass(state, mode: str, levels: int = TAIL_LEVELS) -> float:
    """Probability in the top ``levels`` Fock levels of ``mode``."""
    p = fock_distribution(state, mode)
    return float(p[-levels:].sum())


def check_tail(state, modes: Iterable[str] = MODES, threshold: float = TAIL_THRESHOLD) -> dict[str, float]:
    """Tail mass per mode; raises TruncationError when any exceeds ``threshold``.

    Modes of dimension <= ``TAIL_LEVELS`` are skipped: every level is a tail level.
    """
    ens = _as_ensemble(state)
    report = {}
    for m in modes:
        if ens.layout.factor_dim(m) <= TAIL_LEVELS:
            continue
        report[m] = tail_mass(ens, m)
        if report[m] > threshold:
            raise TruncationError(
                f"mode {m}: {report[m]:.3g} probability in the top {TAIL_LEVELS} Fock levels "
                f"(dimension {ens.layout.factor_dim(m)}, threshold {threshold:g})"
            )
    return report
