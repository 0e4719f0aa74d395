"""Reference overlaps and purities, independent of the circuit simulator.

Closed forms are paired with brute-force sums over Fock amplitudes that are
written down directly (never obtained from the simulator's operator
exponentials), so each can be used to check the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

DEFAULT_TRUNCATION = 60


@dataclass(frozen=True)
class OracleResult:
    value: float
    method: str  # "closed-form" or "fock-sum"
    truncation_used: int | None = None


def fock_overlap(m: int, n: int) -> float:
    if m < 0 or n < 0:
        raise ValueError("Fock levels must be non-negative")
    return 1.0 if m == n else 0.0


def superposition01_overlap(phi01: float) -> float:
    """|<Psi|Phi>|^2 for (|0>+|1>)/sqrt(2) against (|0> - e^{i phi}|1>)/sqrt(2)."""
    return float(abs((1 - np.exp(1j * phi01)) / 2) ** 2)


def coherent_overlap(alpha: complex, beta: complex) -> float:
    return float(np.exp(-abs(alpha - beta) ** 2))


def cat_overlap(alpha_sq: float, phi_cat: float, gamma: float = 1.0) -> float:
    """Overlap of the even cat with the cat of relative phase ``phi_cat``, scaled by ``gamma``."""
    if alpha_sq < 0:
        raise ValueError("alpha_sq must be >= 0")
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    x = np.exp(-2 * alpha_sq)
    c = np.cos(phi_cat)
    denom = 2 * (1 + c * x)
    if denom == 0:
        return 0.0
    return float(gamma * (1 + c) * (1 + x) / denom)


def purity_rho1(phi1: float, gamma00: float = 1.0, gamma11: float = 1.0) -> float:
    return float(gamma00 * np.cos(phi1 / 2) ** 4 + gamma11 * np.sin(phi1 / 2) ** 4)


def purity_rho2(phi2: float, alpha_sq: float | None = None, gamma_alpha: float = 1.0) -> float:
    """Purity of rho2 treating |alpha> and |-alpha> as orthogonal (``alpha_sq`` unused)."""
    u = phi2 / 2 + np.pi / 4
    return float(gamma_alpha * (np.sin(u) ** 4 + np.cos(u) ** 4))


def purity_rho2_exact(phi2: float, alpha_sq: float) -> float:
    """Purity of rho2 including the overlap <alpha|-alpha> = e^{-2|alpha|^2}."""
    u = phi2 / 2 + np.pi / 4
    s2, c2 = np.sin(u) ** 2, np.cos(u) ** 2
    return float(s2**2 + c2**2 + 2 * s2 * c2 * np.exp(-4 * alpha_sq))


# -- brute-force Fock sums ---------------------------------------------------


def coherent_fock(alpha: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max)
    if alpha == 0:
        return (n == 0).astype(complex)
    return np.exp(-abs(alpha) ** 2 / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1) + 1j * n * np.angle(alpha))


def squeezed_fock(r: float, phi: float, n_max: int) -> np.ndarray:
    """Fock amplitudes of exp[(zeta^* a^2 - zeta a^dag^2)/2]|0>, zeta = r e^{i phi}."""
    v = np.zeros(n_max, dtype=complex)
    m = np.arange((n_max + 1) // 2)
    if r == 0:
        v[0] = 1
        return v
    log_mag = 0.5 * gammaln(2 * m + 1) - gammaln(m + 1) - m * np.log(2) + m * np.log(np.tanh(r)) - 0.5 * np.log(np.cosh(r))
    v[2 * m] = np.exp(log_mag) * (-np.exp(1j * phi)) ** m
    return v


def cat_fock(alpha: complex, phi_cat: float, n_max: int) -> np.ndarray:
    v = coherent_fock(alpha, n_max) + np.exp(1j * phi_cat) * coherent_fock(-alpha, n_max)
    return v / np.linalg.norm(v)


def fock_sum_overlap(u: np.ndarray, v: np.ndarray) -> float:
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    return float(abs(np.vdot(u, v)) ** 2)


def coherent_overlap_bruteforce(alpha: complex, beta: complex, truncation: int = DEFAULT_TRUNCATION) -> OracleResult:
    val = fock_sum_overlap(coherent_fock(alpha, truncation), coherent_fock(beta, truncation))
    return OracleResult(val, "fock-sum", truncation)


def cat_overlap_bruteforce(alpha_sq: float, phi_cat: float, truncation: int = DEFAULT_TRUNCATION) -> OracleResult:
    a = np.sqrt(alpha_sq)
    val = fock_sum_overlap(cat_fock(a, 0.0, truncation), cat_fock(a, phi_cat, truncation))
    return OracleResult(val, "fock-sum", truncation)


def squeezed_overlap(r: float, dphi: float, truncation: int = 200) -> float:
    """Overlap of squeezed vacua whose generator phases differ by ``dphi`` (Fock sum)."""
    if r < 0:
        raise ValueError("r must be >= 0")
    u = squeezed_fock(r, 0.0, truncation)
    v = squeezed_fock(r, dphi, truncation)
    tail = 1 - np.sum(np.abs(u[: truncation - 2]) ** 2)
    if tail > 1e-12:
        raise ValueError(f"truncation {truncation} too small for r={r} (tail {tail:.2e})")
    return fock_sum_overlap(u, v)


def purity_rho2_bruteforce(phi2: float, alpha_sq: float, truncation: int = DEFAULT_TRUNCATION) -> OracleResult:
    u = phi2 / 2 + np.pi / 4
    a = np.sqrt(alpha_sq)
    plus, minus = coherent_fock(a, truncation), coherent_fock(-a, truncation)
    rho = np.sin(u) ** 2 * np.outer(plus, plus.conj()) + np.cos(u) ** 2 * np.outer(minus, minus.conj())
    return OracleResult(float(np.real(np.trace(rho @ rho))), "fock-sum", truncation)
