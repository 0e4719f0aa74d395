"""Qubit, sideband and beam-splitter unitaries, applied on their own support.

Phase convention for the beam splitters: the gate with mixing angle theta
and phase psi maps creation operators (as a map on states) like

    x^dag -> x^dag cos(theta/2) + i y^dag e^{-i(psi + phi_s)} sin(theta/2)
    y^dag -> y^dag cos(theta/2) + i x^dag e^{+i(psi + phi_s)} sin(theta/2)

with phi_s = 0 in the sigma_x = +1 sector and pi in the sigma_x = -1 sector
(phi_s = 0 throughout for the spin-independent splitter).  The unitary that
does this is exp[+i (theta/2) sigma_x (x^dag y e^{i psi} + x y^dag e^{-i psi})].

Beam splitters conserve the total phonon number of the two modes they
mix, so they are built block by block in that number and stored sparse.
A block with total number k is exact when both modes hold at least k + 1
levels; higher blocks see the truncated generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Sequence

import numpy as np
import scipy.sparse as sp

from ._linalg import expi_hermitian, unitarity_error
from .bosonic import annihilation, displacement
from .errors import LayoutError
from .hilbert import FACTORS, Ensemble, ModeLayout, PureState

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |e><g|
SIGMA_MINUS = SIGMA_PLUS.T.copy()  # |g><e|
# projectors on the sigma_x eigenstates |+-> = (|g> +- |e>)/sqrt(2)
P_PLUS = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
P_MINUS = 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex)

KINDS = ("rotation", "bsb", "rsb", "cbs", "bs", "spin-displacement")

_UNITARY_CHECK_MAX = 4096


@dataclass(frozen=True, eq=False)
class GateOp:
    kind: str
    support: tuple[str, ...]
    support_dims: tuple[int, ...]
    unitary: Any  # dense ndarray or scipy.sparse matrix over the support
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        support = tuple(self.support)
        if len(set(support)) != len(support) or any(f not in FACTORS for f in support):
            raise LayoutError(f"bad gate support {support}")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "support_dims", tuple(int(d) for d in self.support_dims))
        d = self.dim
        if self.unitary.shape != (d, d):
            raise LayoutError(f"unitary of shape {self.unitary.shape} on a support of dimension {d}")
        if d <= _UNITARY_CHECK_MAX:
            err = unitarity_error(self.unitary)
            if err > 1e-9:
                raise ValueError(f"{self.kind} gate is not unitary (error {err:.2e})")

    @property
    def dim(self) -> int:
        return int(np.prod(self.support_dims))

    def dense(self) -> np.ndarray:
        u = self.unitary
        return u.toarray() if sp.issparse(u) else np.asarray(u)


def rotation(theta: float) -> GateOp:
    """R(theta) = cos(theta/2) I - i sin(theta/2) sigma_y."""
    u = np.cos(theta / 2) * np.eye(2) - 1j * np.sin(theta / 2) * SIGMA_Y
    return GateOp("rotation", ("qubit",), (2,), u, {"theta": theta})


def _check_mode(mode: str) -> None:
    if mode not in FACTORS[1:]:
        raise LayoutError(f"{mode!r} is not a motional mode")


def sideband(kind: str, pulse_area: float, mode: str, dim: int) -> GateOp:
    """Blue or red sideband exp(-i H t) with H = (Omega/2)(sigma+ a^dag + h.c.) or its red twin."""
    _check_mode(mode)
    if pulse_area < 0:
        raise ValueError("pulse area must be >= 0")
    a = annihilation(dim).matrix
    ad = a.conj().T
    if kind in ("blue", "bsb"):
        h = 0.5 * (np.kron(SIGMA_PLUS, ad) + np.kron(SIGMA_MINUS, a))
        tag = "bsb"
    elif kind in ("red", "rsb"):
        h = 0.5 * (np.kron(SIGMA_MINUS, ad) + np.kron(SIGMA_PLUS, a))
        tag = "rsb"
    else:
        raise ValueError(f"sideband kind must be 'blue' or 'red', got {kind!r}")
    return GateOp(tag, ("qubit", mode), (2, dim), expi_hermitian(h, pulse_area), {"pulse_area": pulse_area})


@lru_cache(maxsize=128)
def _number_blocks(dx: int, dy: int):
    """Eigendecomposition of x^dag y + x y^dag in each fixed-total-number block."""
    blocks = []
    for k in range(dx + dy - 1):
        nx = np.arange(max(0, k - dy + 1), min(k, dx - 1) + 1)
        ny = k - nx
        # <nx+1, ny-1| x^dag y |nx, ny> = sqrt(nx+1) sqrt(ny)
        off = np.sqrt(nx[:-1] + 1.0) * np.sqrt(ny[:-1])
        h = np.diag(off, -1) + np.diag(off, 1)
        evals, evecs = np.linalg.eigh(h)
        blocks.append((nx * dy + ny, nx, evals, evecs))
    return tuple(blocks)


@lru_cache(maxsize=256)
def _beam_splitter_matrix(theta: float, psi: float, dx: int, dy: int) -> sp.csr_matrix:
    """exp[i (theta/2)(x^dag y e^{i psi} + x y^dag e^{-i psi})] on modes (x, y), sparse."""
    rows, cols, vals = [], [], []
    for idx, nx, evals, evecs in _number_blocks(dx, dy):
        # the psi phase is a conjugation by exp(i psi n_x)
        u = (evecs * np.exp(0.5j * theta * evals)) @ evecs.T
        ph = np.exp(1j * psi * nx)
        u = ph[:, None] * u * ph.conj()[None, :]
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(u.ravel())
    d = dx * dy
    m = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(d, d))
    m = m.tocsr()
    m.eliminate_zeros()
    return m


def _check_pair(modes: Sequence[str]) -> tuple[str, str]:
    x, y = modes
    _check_mode(x)
    _check_mode(y)
    if x == y:
        raise LayoutError("a beam splitter needs two distinct modes")
    return x, y


def beam_splitter(theta: float, psi: float, modes: Sequence[str], dims: Sequence[int]) -> GateOp:
    """Spin-independent beam splitter on ``modes`` with Fock dimensions ``dims``."""
    x, y = _check_pair(modes)
    dx, dy = (int(d) for d in dims)
    u = _beam_splitter_matrix(float(theta), float(psi), dx, dy)
    return GateOp("bs", (x, y), (dx, dy), u, {"theta": theta, "psi": psi})


@lru_cache(maxsize=128)
def _cbs_matrix(theta: float, psi: float, dx: int, dy: int) -> sp.csr_matrix:
    plus = _beam_splitter_matrix(theta, psi, dx, dy)
    minus = _beam_splitter_matrix(-theta, psi, dx, dy)
    return (sp.kron(P_PLUS, plus) + sp.kron(P_MINUS, minus)).tocsr()


def controlled_beam_splitter(theta: float, psi: float, modes: Sequence[str], dims: Sequence[int]) -> GateOp:
    """Spin-dependent beam splitter: sigma_x-conditioned sign of the mixing angle."""
    if theta < 0:
        raise ValueError("mixing angle must be >= 0")
    x, y = _check_pair(modes)
    dx, dy = (int(d) for d in dims)
    return _cbs_gate(float(theta), float(psi), x, y, dx, dy)


@lru_cache(maxsize=64)
def _cbs_gate(theta: float, psi: float, x: str, y: str, dx: int, dy: int) -> GateOp:
    # GateOp is immutable, so sweeps can share one instance per layout
    u = _cbs_matrix(theta, psi, dx, dy)
    return GateOp("cbs", ("qubit", x, y), (2, dx, dy), u, {"theta": theta, "psi": psi})


def spin_displacement(alpha: complex, mode: str, dim: int) -> GateOp:
    """exp(sigma_x (alpha x^dag - alpha^* x)): |+->|0> -> |+->|+-alpha>."""
    _check_mode(mode)
    u = np.kron(P_PLUS, displacement(alpha, dim).matrix) + np.kron(P_MINUS, displacement(-alpha, dim).matrix)
    return GateOp("spin-displacement", ("qubit", mode), (2, dim), u, {"alpha": alpha})


@dataclass(frozen=True)
class PulseEnvelope:
    """Coupling-strength waveform Omega(t) of a beam-splitter pulse.

    ``shape="ramped"``: sin^2 rising and falling edges of length ``ramp_tau``
    around a flat top at ``omega0``; ``shape="constant"``: flat for the whole
    ``total_T``.
    """

    omega0: float
    ramp_tau: float
    total_T: float
    shape: str = "ramped"

    def __post_init__(self):
        if self.shape not in ("ramped", "constant"):
            raise ValueError(f"unknown envelope shape {self.shape!r}")
        if self.omega0 < 0 or self.total_T < 0 or self.ramp_tau < 0:
            raise ValueError("envelope parameters must be non-negative")
        if self.shape == "ramped" and self.total_T < 2 * self.ramp_tau:
            raise ValueError(f"ramped pulse of length {self.total_T} shorter than its two edges ({2 * self.ramp_tau})")

    @classmethod
    def for_area(cls, theta: float, omega0: float, ramp_tau: float = 0.0, shape: str = "ramped") -> "PulseEnvelope":
        if shape == "constant":
            return cls(omega0, 0.0, theta / omega0, "constant")
        return cls(omega0, ramp_tau, theta / omega0 + ramp_tau, "ramped")

    @property
    def area(self) -> float:
        if self.shape == "constant":
            return self.omega0 * self.total_T
        return self.omega0 * (self.total_T - self.ramp_tau)

    def omega(self, t):
        t = np.asarray(t, dtype=float)
        if self.shape == "constant":
            return np.where((t >= 0) & (t <= self.total_T), self.omega0, 0.0)
        tau, T = self.ramp_tau, self.total_T
        out = np.full_like(t, self.omega0)
        if tau > 0:
            rise = t < tau
            fall = t > T - tau
            out[rise] = self.omega0 * np.sin(np.pi * t[rise] / (2 * tau)) ** 2
            out[fall] = self.omega0 * np.sin(np.pi * (T - t[fall]) / (2 * tau)) ** 2
        out[(t < 0) | (t > T)] = 0.0
        return out

    def segments(self) -> list[tuple[float, float]]:
        if self.shape == "constant" or self.ramp_tau == 0:
            return [(0.0, self.total_T)]
        tau, T = self.ramp_tau, self.total_T
        return [(0.0, tau), (tau, T - tau), (T - tau, T)]


def evolve_pulsed_cbs(
    envelope: PulseEnvelope, psi: float, modes: Sequence[str], dims: Sequence[int], steps: int = 200
) -> GateOp:
    """Time-ordered product of midpoint step propagators over the pulse.

    Steps are aligned with the envelope's ramp and flat segments and
    distributed in proportion to their duration.
    """
    if steps < 1:
        raise ValueError("need at least one integration step")
    x, y = _check_pair(modes)
    dx, dy = (int(d) for d in dims)
    segs = [(a, b) for a, b in envelope.segments() if b > a]
    total = sum(b - a for a, b in segs)
    u = sp.identity(2 * dx * dy, dtype=complex, format="csr")
    for a, b in segs:
        n = max(1, int(round(steps * (b - a) / total))) if total > 0 else 1
        dt = (b - a) / n
        mids = a + dt * (np.arange(n) + 0.5)
        for step_area in envelope.omega(mids) * dt:
            u = _cbs_matrix(float(step_area), float(psi), dx, dy) @ u
    params = {"theta": envelope.area, "psi": psi, "envelope": envelope, "steps": steps}
    return GateOp("cbs", ("qubit", x, y), (2, dx, dy), u.tocsr(), params)


def cbs_for(layout: ModeLayout, theta: float, psi: float, modes: Sequence[str]) -> GateOp:
    return controlled_beam_splitter(theta, psi, modes, [layout.factor_dim(m) for m in modes])


def bs_for(layout: ModeLayout, theta: float, psi: float, modes: Sequence[str]) -> GateOp:
    return beam_splitter(theta, psi, modes, [layout.factor_dim(m) for m in modes])


def apply(gate: GateOp, state):
    """Contract ``gate`` against the factors it acts on; other factors are untouched."""
    if isinstance(state, Ensemble):
        return state.map(lambda s: apply(gate, s))
    layout = state.layout
    dims = tuple(layout.factor_dim(f) for f in gate.support)
    if dims != gate.support_dims:
        raise LayoutError(f"{gate.kind} gate built for dimensions {gate.support_dims} on factors with {dims}")
    axes = [layout.axis(f) for f in gate.support]
    front = list(range(len(axes)))
    t = np.moveaxis(state.tensor, axes, front)
    shape = t.shape
    out = gate.unitary @ t.reshape(gate.dim, -1)
    out = np.moveaxis(np.asarray(out).reshape(shape), front, axes)
    return PureState(layout, out)


def apply_sequence(gates: Sequence[GateOp], state):
    for g in gates:
        state = apply(g, state)
    return state
