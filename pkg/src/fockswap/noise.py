"""Phenomenological imperfections: motional heating, motional dephasing, contrast.

Heating and dephasing are stochastic unravelings over pure-state
trajectories.  Each input branch of weight ``w`` is split into
``trajectories`` samples of weight ``w / trajectories``; samples that end in
the same state (heating has only three outcomes per branch) are merged, so
total weight is conserved exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import NoiseRegimeError
from .hilbert import MODES, Ensemble, PureState

FIRST_ORDER_LIMIT = 0.1

# U_CBS(pi/2) takes ~368 us; the pi gate twice that, ~1.1 ms for the whole test
DEFAULT_GATE_DURATIONS = {"prep": 0.0, "cbs_ac": 736e-6, "cbs_ab": 368e-6}


@dataclass(frozen=True)
class NoiseConfig:
    heating_rates: tuple[float, float, float] = (0.0, 0.0, 0.0)  # quanta/s for A, B, C
    dephasing_time: float = float("inf")  # s
    gate_durations: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_GATE_DURATIONS))
    trajectories: int = 200

    def __post_init__(self):
        rates = tuple(float(r) for r in self.heating_rates)
        if len(rates) != 3 or any(r < 0 for r in rates):
            raise ValueError(f"heating rates must be three non-negative numbers, got {self.heating_rates}")
        if self.dephasing_time <= 0:
            raise ValueError("dephasing time must be positive")
        if self.trajectories < 1:
            raise ValueError("need at least one trajectory")
        durations = dict(DEFAULT_GATE_DURATIONS)
        durations.update(self.gate_durations)
        if any(v < 0 for v in durations.values()):
            raise ValueError("gate durations must be non-negative")
        object.__setattr__(self, "heating_rates", rates)
        object.__setattr__(self, "gate_durations", durations)

    def rate(self, mode: str) -> float:
        return self.heating_rates[MODES.index(mode)]


def _mode_op(state: PureState, mode: str, matrix: np.ndarray) -> np.ndarray:
    ax = state.layout.axis(mode)
    t = np.tensordot(matrix, state.tensor, axes=([1], [ax]))
    return np.moveaxis(t, 0, ax)


def _ladder(dim: int, raising: bool) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    return a.T if raising else a


def apply_heating(state: Ensemble, mode: str, rate: float, duration: float, rng: np.random.Generator,
                  trajectories: int = 1) -> Ensemble:
    """First-order jump unraveling of motional heating on one mode.

    Each trajectory jumps with probability ``rate * duration``; a jump applies
    a^dag or a with equal probability, restricted to the operators that do not
    annihilate the branch, and renormalizes.
    """
    p = rate * duration
    if rate < 0 or duration < 0:
        raise ValueError("heating rate and duration must be non-negative")
    if p > FIRST_ORDER_LIMIT:
        raise NoiseRegimeError(f"jump probability {p:.3g} exceeds the first-order limit {FIRST_ORDER_LIMIT}")
    if p == 0:
        return state
    dim = state.layout.factor_dim(mode)
    out = []
    for w, s in state.branches:
        n_jump = rng.binomial(trajectories, p)
        if n_jump < trajectories:
            out.append((w * (trajectories - n_jump) / trajectories, s))
        if n_jump == 0:
            continue
        candidates = []
        for raising in (True, False):
            t = _mode_op(s, mode, _ladder(dim, raising))
            norm = np.linalg.norm(t)
            if norm > 1e-12:
                candidates.append(PureState(s.layout, t / norm))
        counts = rng.multinomial(n_jump, [1 / len(candidates)] * len(candidates))
        out.extend((w * c / trajectories, js) for c, js in zip(counts, candidates) if c)
    return Ensemble.from_weighted(out)


def apply_dephasing(state: Ensemble, mode: str, coherence_time: float, duration: float,
                    rng: np.random.Generator, trajectories: int = 1) -> Ensemble:
    """Random phase exp(i phi n) per trajectory, phi ~ N(0, 2 duration / coherence_time).

    Averaged over trajectories, Fock coherences |n><m| decay as
    exp(-(duration / coherence_time) (n - m)^2).
    """
    if duration < 0:
        raise ValueError("duration must be non-negative")
    if duration == 0 or np.isinf(coherence_time):
        return state
    sigma = np.sqrt(2 * duration / coherence_time)
    n = np.arange(state.layout.factor_dim(mode))
    out = []
    for w, s in state.branches:
        for phi in rng.normal(0.0, sigma, size=trajectories):
            out.append((w / trajectories, PureState(s.layout, _mode_op(s, mode, np.diag(np.exp(1j * phi * n))))))
    return Ensemble.from_weighted(out)


def noise_segment(state: Ensemble, noise: NoiseConfig, duration: float, rng: np.random.Generator,
                  trajectories: int = 1) -> Ensemble:
    """Heating then dephasing on every mode for ``duration`` seconds."""
    for mode in MODES:
        state = apply_heating(state, mode, noise.rate(mode), duration, rng, trajectories)
        state = apply_dephasing(state, mode, noise.dephasing_time, duration, rng, trajectories)
    return state


def apply_contrast(ideal_overlap: float, gamma: float) -> float:
    if not 0 <= ideal_overlap <= 1 + 1e-12:
        raise ValueError(f"overlap {ideal_overlap} outside [0, 1]")
    if not 0 <= gamma <= 1:
        raise ValueError(f"contrast {gamma} outside [0, 1]")
    return gamma * min(ideal_overlap, 1.0)


@dataclass(frozen=True)
class ContrastModel:
    """Measured-contrast factors multiplying ideal overlaps.

    ``gamma`` applies to every pair of inputs (gamma_cat, gamma_alpha, ...).
    ``fock`` optionally lists gamma_nn for n = 0, 1, ...; it overrides
    ``gamma`` when both inputs are the same Fock state |n>.
    """

    gamma: float = 1.0
    fock: tuple[float, ...] = ()

    def __post_init__(self):
        fock = tuple(float(g) for g in self.fock)
        for g in (self.gamma, *fock):
            if not 0 < g <= 1:
                raise ValueError(f"contrast factors must lie in (0, 1], got {g}")
        object.__setattr__(self, "fock", fock)

    def factor(self, fock_b: int | None = None, fock_c: int | None = None) -> float:
        if fock_b is not None and fock_b == fock_c and fock_b < len(self.fock):
            return self.fock[fock_b]
        return self.gamma
