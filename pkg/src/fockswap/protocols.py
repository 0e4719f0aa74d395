"""State preparation, the two-gate SWAP test, and purity measurement.

The SWAP test applies U_CBS^{AC}(pi, 0) and then U_CBS^{AB}(pi/2, pi) to
|g>|0>_A ρ_B ρ_C.  Left alone, the qubit then sits in |g> with probability
(1 + Tr ρ_B ρ_C) / 2.  By default a readout pi rotation follows, so the
reported ground-state probability is P_g = (1 - Tr ρ_B ρ_C) / 2.  In both
cases the overlap is |1 - 2 P_g|.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import bosonic
from .errors import LayoutError, PreconditionError, TruncationError
from .gates import apply, bs_for, cbs_for, rotation, sideband, spin_displacement
from .hilbert import (
    TAIL_THRESHOLD,
    Ensemble,
    ModeLayout,
    PureState,
    check_tail,
    fock_distribution,
    inner_product,
    overlap_exact,
    partial_trace,
    qubit_ground_probability,
    vacuum,
)
from .noise import ContrastModel, NoiseConfig, noise_segment

# parameter names and defaults per recipe kind; None marks a required parameter
RECIPE_PARAMS: dict[str, dict[str, float | None]] = {
    "fock": {"m": None},
    "superposition01": {"phi01": None},
    "coherent": {"alpha_sq": None, "phase": 0.0},
    "squeezed": {"r": None, "phi_sqz": None},
    "cat": {"alpha_sq": None, "phi_cat": 0.0, "phase": 0.0},
    "mixed-rho1": {"phi1": None},
    "mixed-rho2": {"phi2": None, "alpha_sq": None},
}

_VACUUM_TOL = 1e-10


@dataclass(frozen=True)
class PrepRecipe:
    kind: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in RECIPE_PARAMS:
            raise ValueError(f"unknown recipe kind {self.kind!r}; expected one of {sorted(RECIPE_PARAMS)}")
        spec = RECIPE_PARAMS[self.kind]
        unknown = set(self.params) - set(spec)
        if unknown:
            raise ValueError(f"{self.kind} recipe has no parameter(s) {sorted(unknown)}")
        full = {k: v for k, v in spec.items() if v is not None}
        full.update({k: float(v) for k, v in self.params.items()})
        missing = [k for k in spec if k not in full]
        if missing:
            raise ValueError(f"{self.kind} recipe is missing {missing}")
        if self.kind == "fock" and (full["m"] < 0 or full["m"] != int(full["m"])):
            raise ValueError(f"Fock level must be a non-negative integer, got {full['m']}")
        for key in ("alpha_sq", "r"):
            if full.get(key, 0.0) < 0:
                raise ValueError(f"{key} must be >= 0")
        object.__setattr__(self, "params", full)

    def with_params(self, **updates) -> "PrepRecipe":
        return replace(self, params={**self.params, **updates})

    @property
    def is_mixed(self) -> bool:
        return self.kind.startswith("mixed")

    def mode_vector(self, dim: int) -> np.ndarray:
        """Fock vector of a pure recipe."""
        p = self.params
        if self.kind == "fock":
            return bosonic.fock_state(int(p["m"]), dim)
        if self.kind == "superposition01":
            return bosonic.superposition01(p["phi01"], dim)
        if self.kind == "coherent":
            return bosonic.coherent_state(np.sqrt(p["alpha_sq"]) * np.exp(1j * p["phase"]), dim)
        if self.kind == "squeezed":
            zeta = bosonic.squeeze_parameter(p["r"], p["phi_sqz"])
            return bosonic.squeezed_vacuum(abs(zeta), np.angle(zeta), dim)
        if self.kind == "cat":
            return bosonic.cat_state(np.sqrt(p["alpha_sq"]) * np.exp(1j * p["phase"]), p["phi_cat"], dim)
        raise ValueError(f"{self.kind} is a mixed-state recipe")


def _as_ensemble(state) -> Ensemble:
    return Ensemble.pure(state) if isinstance(state, PureState) else state


def _require_vacuum(ens: Ensemble, mode: str) -> None:
    for _, s in ens.branches:
        if fock_distribution(s, mode)[0] < 1 - _VACUUM_TOL:
            raise PreconditionError(f"mode {mode} is not in the vacuum")


def _require_ground(ens: Ensemble) -> None:
    for _, s in ens.branches:
        if qubit_ground_probability(s) < 1 - _VACUUM_TOL:
            raise PreconditionError("qubit is not in |g>")


def _install(state: PureState, mode: str, vec: np.ndarray) -> PureState:
    ax = state.layout.axis(mode)
    rest = np.take(state.tensor, 0, axis=ax)
    t = np.moveaxis(np.multiply.outer(rest, vec), -1, ax)
    return PureState(state.layout, t)


def optical_pump(state) -> Ensemble:
    """Reset the qubit to |g>, splitting each branch by its qubit projection."""
    out = []
    for w, s in _as_ensemble(state).branches:
        for q in (0, 1):
            part = s.tensor[q]
            p = float(np.sum(np.abs(part) ** 2))
            if w * p <= 1e-14:
                continue
            t = np.zeros_like(s.tensor)
            t[0] = part / np.sqrt(p)
            out.append((w * p, PureState(s.layout, t)))
    return Ensemble.from_weighted(out)


def rho1_pump_rotation(phi1: float) -> float:
    """Rotation before pumping that keeps the excited population at most 1/2."""
    return 0.0 if phi1 <= np.pi / 2 else np.pi


def rho2_pump_rotation(phi2: float) -> float:
    return np.pi / 2 if phi2 < 0 else -np.pi / 2


def prepare(recipe: PrepRecipe, mode: str, state) -> Ensemble:
    """Install ``recipe`` on ``mode`` (which must be in the vacuum) in every branch."""
    ens = _as_ensemble(state)
    _require_vacuum(ens, mode)
    dim = ens.layout.factor_dim(mode)
    if not recipe.is_mixed:
        vec = recipe.mode_vector(dim)
        out = ens.map(lambda s: _install(s, mode, vec))
    else:
        _require_ground(ens)
        p = recipe.params
        if recipe.kind == "mixed-rho1":
            seq = [sideband("blue", p["phi1"], mode, dim), rotation(rho1_pump_rotation(p["phi1"]))]
        else:
            seq = [
                rotation(p["phi2"]),
                spin_displacement(np.sqrt(p["alpha_sq"]), mode, dim),
                rotation(rho2_pump_rotation(p["phi2"])),
            ]
        for g in seq:
            ens = apply(g, ens)
        out = optical_pump(ens)
    check_tail(out, modes=[mode])
    return out


def prepare_pair(recipe_b: PrepRecipe, recipe_c: PrepRecipe, layout: ModeLayout) -> Ensemble:
    """|g>|0>_A with ``recipe_b`` on B and ``recipe_c`` on C; branches are B-major."""
    ens = Ensemble.pure(vacuum(layout))
    ens = prepare(recipe_b, "B", ens)
    return prepare(recipe_c, "C", ens)


@dataclass(frozen=True)
class SwapTestResult:
    p_g_exact: float
    overlap_from_pg: float
    overlap_oracle: float
    shots: int | None = None
    p_g_sampled: float | None = None
    stderr: float | None = None
    seed: int | None = None
    branch_p_g: tuple[float, ...] = ()
    leakage: float = 0.0


def swap_leakage(state) -> float:
    """Probability of input components the truncated circuit cannot mix exactly.

    The A-C splitter is exact for n_C < min(N_A, N_C) and the A-B splitter
    for n_B + n_C < min(N_A, N_B).
    """
    ens = _as_ensemble(state)
    na, nb, nc = ens.layout.mode_dims
    b, c = np.meshgrid(np.arange(nb), np.arange(nc), indexing="ij")
    bad = (c >= min(na, nc)) | (b + c >= min(na, nb))
    total = 0.0
    for w, s in ens.branches:
        p_bc = np.sum(np.abs(s.tensor) ** 2, axis=(0, 1))
        total += w * float(p_bc[bad].sum())
    return total


def _fock_level(state: PureState, mode: str) -> int | None:
    p = fock_distribution(state, mode)
    n = int(np.argmax(p))
    return n if p[n] > 1 - 1e-10 else None


def swap_circuit(layout: ModeLayout, readout_flip: bool = True):
    gates = [cbs_for(layout, np.pi, 0.0, ("A", "C")), cbs_for(layout, np.pi / 2, np.pi, ("A", "B"))]
    if readout_flip:
        gates.append(rotation(np.pi))
    return gates


def swap_test(
    state,
    shots: int | None = None,
    rng_seed: int = 0,
    *,
    readout_flip: bool = True,
    noise: NoiseConfig | None = None,
    contrast: ContrastModel | None = None,
    leakage_threshold: float = TAIL_THRESHOLD,
) -> SwapTestResult:
    """Run the SWAP test on |g>|0>_A (x) inputs on B and C.

    ``shots`` draws Bernoulli outcomes from the exact P_g with a generator
    seeded from ``rng_seed``.  ``noise`` inserts heating and dephasing
    segments before each controlled splitter, averaged over trajectories.
    ``contrast`` scales each branch pair's overlap by its contrast factor.
    """
    ens = _as_ensemble(state)
    layout = ens.layout
    _require_ground(ens)
    _require_vacuum(ens, "A")
    if layout.factor_dim("B") != layout.factor_dim("C"):
        raise LayoutError("modes B and C must share a Fock dimension to be compared")
    leakage = swap_leakage(ens)
    if leakage > leakage_threshold:
        raise TruncationError(
            f"{leakage:.3g} of the input lies where the truncated splitters are inexact; "
            f"enlarge modes A and B (dimensions {layout.mode_dims})"
        )
    gate_ac, gate_ab, *readout = swap_circuit(layout, readout_flip)

    sample_ss, noise_ss = np.random.SeedSequence(rng_seed).spawn(2)
    if noise is None:
        out = apply(gate_ab, apply(gate_ac, ens))
        branch_pg = np.array([qubit_ground_probability(apply_all(readout, s)) for s in out.states])
    else:
        branch_pg = _noisy_branch_pg(ens, noise, np.random.default_rng(noise_ss), gate_ac, gate_ab, readout)

    weights = ens.weights
    if contrast is None:
        oracle = overlap_exact(partial_trace(ens, ["B"]), partial_trace(ens, ["C"]))
    else:
        gammas = np.array([contrast.factor(_fock_level(s, "B"), _fock_level(s, "C")) for s in ens.states])
        ideal = 1 - 2 * branch_pg if readout_flip else 2 * branch_pg - 1
        scaled = gammas * ideal
        branch_pg = (1 - scaled) / 2 if readout_flip else (1 + scaled) / 2
        per_branch = [overlap_exact(partial_trace(s, ["B"]), partial_trace(s, ["C"])) for s in ens.states]
        oracle = float(np.dot(weights, gammas * np.array(per_branch)))

    p_g = float(np.clip(np.dot(weights, branch_pg), 0.0, 1.0))
    result = SwapTestResult(
        p_g_exact=p_g,
        overlap_from_pg=min(abs(1 - 2 * p_g), 1.0),
        overlap_oracle=oracle,
        seed=rng_seed,
        branch_p_g=tuple(float(x) for x in branch_pg),
        leakage=leakage,
    )
    if shots is None:
        return result
    if shots < 1:
        raise ValueError("shots must be a positive integer")
    p_hat = np.random.default_rng(sample_ss).binomial(shots, p_g) / shots
    return replace(result, shots=int(shots), p_g_sampled=float(p_hat), stderr=float(np.sqrt(p_hat * (1 - p_hat) / shots)))


def apply_all(gates, state):
    for g in gates:
        state = apply(g, state)
    return state


def _noisy_branch_pg(ens, noise, rng, gate_ac, gate_ab, readout) -> np.ndarray:
    d = noise.gate_durations
    total = np.zeros(len(ens))
    for _ in range(noise.trajectories):
        # single-trajectory channels map each branch to exactly one branch
        traj = Ensemble(tuple((1.0 / len(ens), s) for s in ens.states))
        traj = noise_segment(traj, noise, d["prep"] + d["cbs_ac"], rng)
        traj = apply(gate_ac, traj)
        traj = noise_segment(traj, noise, d["cbs_ab"], rng)
        traj = apply(gate_ab, traj)
        total += [qubit_ground_probability(apply_all(readout, s)) for s in traj.states]
    return total / noise.trajectories


def controlled_swap_equivalence(state: PureState) -> float:
    """Fidelity of the circuit output with the controlled-SWAP closed form.

    After both controlled splitters, the spin-independent U_BS^{AB}(pi/2, 0)
    and then U_BS^{AC}(pi, pi) should leave
    (|+>|0>_A chi_BC - |->|0>_A SWAP chi_BC) / sqrt(2), where
    |g> = (|+> - |->)/sqrt(2) fixes |+> = (|g>+|e>)/sqrt(2) and
    |-> = (|e>-|g>)/sqrt(2).
    """
    if isinstance(state, Ensemble):
        raise TypeError("controlled_swap_equivalence takes a pure state")
    layout = state.layout
    _require_ground(Ensemble.pure(state))
    _require_vacuum(Ensemble.pure(state), "A")
    if layout.factor_dim("B") != layout.factor_dim("C"):
        raise LayoutError("modes B and C must share a Fock dimension to be swapped")
    out = apply_all(
        swap_circuit(layout, readout_flip=False)
        + [bs_for(layout, np.pi / 2, 0.0, ("A", "B")), bs_for(layout, np.pi, np.pi, ("A", "C"))],
        state,
    )
    chi = state.tensor[0, 0]
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([-1, 1]) / np.sqrt(2)
    a0 = np.zeros(layout.factor_dim("A"))
    a0[0] = 1
    expected = (np.einsum("q,a,bc->qabc", plus, a0, chi) - np.einsum("q,a,bc->qabc", minus, a0, chi.T)) / np.sqrt(2)
    return float(abs(inner_product(PureState(layout, expected), out)) ** 2)


def purity_experiment(
    recipe_pair,
    layout: ModeLayout,
    shots: int | None = None,
    seed: int = 0,
    **swap_kwargs,
) -> SwapTestResult:
    """SWAP test on two copies of one state; the overlap estimates Tr(rho^2)."""
    if isinstance(recipe_pair, PrepRecipe):
        recipe_pair = (recipe_pair, recipe_pair)
    recipe_b, recipe_c = recipe_pair
    if recipe_b != recipe_c:
        raise ValueError("purity needs the same recipe on both modes")
    return swap_test(prepare_pair(recipe_b, recipe_c, layout), shots, seed, **swap_kwargs)
