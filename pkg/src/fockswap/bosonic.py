"""Single-mode operators and standard states on a truncated Fock basis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from ._linalg import expi_hermitian
from .errors import TruncationError
from .hilbert import TAIL_LEVELS, TAIL_THRESHOLD

# extra Fock levels used when a state is built from an operator exponential,
# so truncation of the generator does not leak into the kept levels
_PAD = 2


@dataclass(frozen=True, eq=False)
class ModeOperator:
    mode: str | None
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def dag(self) -> "ModeOperator":
        return ModeOperator(self.mode, self.matrix.conj().T)

    def __matmul__(self, other):
        if isinstance(other, ModeOperator):
            return ModeOperator(self.mode, self.matrix @ other.matrix)
        return self.matrix @ other


def _check_dim(dim: int) -> int:
    dim = int(dim)
    if dim < 1:
        raise ValueError(f"Fock dimension must be >= 1, got {dim}")
    return dim


def annihilation(dim: int, mode: str | None = None) -> ModeOperator:
    dim = _check_dim(dim)
    return ModeOperator(mode, np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex))


def creation(dim: int, mode: str | None = None) -> ModeOperator:
    return annihilation(dim, mode).dag


def number(dim: int, mode: str | None = None) -> ModeOperator:
    return ModeOperator(mode, np.diag(np.arange(_check_dim(dim))).astype(complex))


def poisson_tail(mean: float, dim: int) -> float:
    """Poisson probability of landing in the top two levels of ``dim`` or above."""
    return float(poisson.sf(dim - TAIL_LEVELS - 1, mean)) if dim > TAIL_LEVELS else 1.0


def squeezed_tail(r: float, dim: int) -> float:
    """Probability of n >= dim - 2 for the squeezed vacuum with squeeze magnitude ``r``."""
    cut = dim - TAIL_LEVELS
    if r == 0:
        return 0.0 if cut > 0 else 1.0
    m = np.arange((cut + 1) // 2)
    logp = gammaln(2 * m + 1) - 2 * gammaln(m + 1) - 2 * m * np.log(2) + 2 * m * np.log(np.tanh(r)) - np.log(np.cosh(r))
    return float(max(1.0 - np.exp(logp).sum(), 0.0))


def _raise_tail(what: str, tail: float, dim: int) -> None:
    if tail > TAIL_THRESHOLD:
        raise TruncationError(
            f"{what}: {tail:.3g} of the probability lies at n >= {dim - TAIL_LEVELS} (dimension {dim})"
        )


def displacement(alpha: complex, dim: int, mode: str | None = None) -> ModeOperator:
    """D(alpha) = exp(alpha a^dag - alpha^* a) on the truncated space."""
    dim = _check_dim(dim)
    _raise_tail(f"displacement alpha={alpha}", poisson_tail(abs(alpha) ** 2, dim), dim)
    a = annihilation(dim).matrix
    # exp(G) with G anti-Hermitian equals exp(-i H) with H = i G
    h = 1j * (alpha * a.conj().T - np.conj(alpha) * a)
    return ModeOperator(mode, expi_hermitian(h))


def squeeze_parameter(r: float, phi_sqz: float) -> complex:
    """Generator parameter zeta for the squeezed-vacuum label |r e^{i phi_sqz / 2}>.

    The label's half-angle is carried by the generator phase, so zeta = r e^{i phi_sqz}
    and overlaps are 2 pi periodic in ``phi_sqz``.
    """
    return r * np.exp(1j * phi_sqz)


def squeeze(r: float, phi: float, dim: int, mode: str | None = None) -> ModeOperator:
    """S(zeta) = exp[(zeta^* a^2 - zeta a^dag^2) / 2] with zeta = r e^{i phi}."""
    dim = _check_dim(dim)
    if r < 0:
        raise ValueError("squeeze magnitude must be >= 0")
    _raise_tail(f"squeeze r={r}", squeezed_tail(r, dim), dim)
    return ModeOperator(mode, _squeeze_matrix(r, phi, dim))


def _squeeze_matrix(r: float, phi: float, dim: int) -> np.ndarray:
    zeta = r * np.exp(1j * phi)
    a = annihilation(dim).matrix
    ad = a.conj().T
    h = 0.5j * (np.conj(zeta) * a @ a - zeta * ad @ ad)
    return expi_hermitian(h)


def fock_state(n: int, dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise TruncationError(f"Fock level {n} outside 0..{dim - 1}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1
    return v


def coherent_amplitudes(alpha: complex, dim: int) -> np.ndarray:
    """Untruncated-normalization Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!)."""
    n = np.arange(dim)
    if alpha == 0:
        return fock_state(0, dim)
    log_mag = -abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    return np.exp(log_mag + 1j * n * np.angle(alpha))


def coherent_state(alpha: complex, dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    _raise_tail(f"coherent state alpha={alpha}", poisson_tail(abs(alpha) ** 2, dim), dim)
    v = coherent_amplitudes(alpha, dim)
    return v / np.linalg.norm(v)


def squeezed_vacuum(r: float, phi: float, dim: int) -> np.ndarray:
    """S(r e^{i phi})|0>, built with padding levels and truncated back to ``dim``."""
    dim = _check_dim(dim)
    _raise_tail(f"squeezed vacuum r={r}", squeezed_tail(r, dim), dim)
    big = 2 * dim + _PAD
    v = _squeeze_matrix(r, phi, big)[:dim, 0]
    return v / np.linalg.norm(v)


def cat_normalization(alpha: complex, phi_cat: float) -> float:
    """Squared norm of |alpha> + e^{i phi}|-alpha> for normalized coherent states."""
    return 2.0 * (1.0 + np.cos(phi_cat) * np.exp(-2 * abs(alpha) ** 2))


def cat_state(alpha: complex, phi_cat: float, dim: int) -> np.ndarray:
    """(|alpha> + e^{i phi_cat}|-alpha>) / sqrt(N) with the exact normalization N."""
    dim = _check_dim(dim)
    _raise_tail(f"cat state alpha={alpha}", poisson_tail(abs(alpha) ** 2, dim), dim)
    norm2 = cat_normalization(alpha, phi_cat)
    if norm2 < 1e-12:
        raise ValueError(f"cat state with alpha={alpha}, phi_cat={phi_cat} has vanishing norm {norm2:.3g}")
    v = (coherent_amplitudes(alpha, dim) + np.exp(1j * phi_cat) * coherent_amplitudes(-alpha, dim)) / np.sqrt(norm2)
    # exact normalization up to the (checked) truncation tail
    return v / np.linalg.norm(v)


def superposition01(phi01: float, dim: int) -> np.ndarray:
    """(|0> - e^{i phi01}|1>)/sqrt(2); phi01 = pi gives (|0> + |1>)/sqrt(2)."""
    if _check_dim(dim) < 2:
        raise TruncationError("a 0/1 superposition needs dimension >= 2")
    v = np.zeros(dim, dtype=complex)
    v[0] = 1
    v[1] = -np.exp(1j * phi01)
    return v / np.sqrt(2)


def mean_number(v: np.ndarray) -> float:
    p = np.abs(v) ** 2
    return float(np.dot(np.arange(len(v)), p) / p.sum())
