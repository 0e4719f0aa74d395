"""Invariants checked on randomly generated inputs."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from fockswap._linalg import unitarity_error
from fockswap.gates import apply, beam_splitter, controlled_beam_splitter, rotation, sideband, spin_displacement
from fockswap.hilbert import Ensemble, ModeLayout, PureState, fock_distribution
from fockswap.noise import apply_dephasing, apply_heating
from fockswap.protocols import PrepRecipe, optical_pump, prepare_pair, purity_experiment, swap_test

LAYOUT = ModeLayout((7, 7, 7))
SUPPORT = 4  # Fock levels 0..3 on B and C keep n_B + n_C < 7
angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)
finite = st.floats(-1, 1, allow_nan=False, allow_infinity=False)


@st.composite
def mode_vectors(draw, size=SUPPORT, dim=7):
    re = draw(hnp.arrays(float, size, elements=finite))
    im = draw(hnp.arrays(float, size, elements=finite))
    v = re + 1j * im
    assume(np.linalg.norm(v) > 1e-3)
    out = np.zeros(dim, dtype=complex)
    out[:size] = v / np.linalg.norm(v)
    return out


@st.composite
def register_states(draw, entangled=False):
    vac = np.eye(7, dtype=complex)[0]
    g = np.array([1, 0], dtype=complex)
    if not entangled:
        return PureState.product(LAYOUT, g, vac, draw(mode_vectors()), draw(mode_vectors()))
    a = PureState.product(LAYOUT, g, vac, draw(mode_vectors()), draw(mode_vectors()))
    b = PureState.product(LAYOUT, g, vac, draw(mode_vectors()), draw(mode_vectors()))
    c = draw(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False))
    s = a + b * c
    assume(s.norm > 1e-3)
    return s.normalized()


@st.composite
def ensembles(draw):
    """rho_B (x) rho_C with each factor a mixture of up to three random pure states."""
    vac = np.eye(7, dtype=complex)[0]
    g = np.array([1, 0], dtype=complex)

    def mixture():
        k = draw(st.integers(1, 3))
        return [(draw(st.floats(0.05, 1.0)), draw(mode_vectors())) for _ in range(k)]

    rho_b, rho_c = mixture(), mixture()
    branches = [(wb * wc, PureState.product(LAYOUT, g, vac, b, c)) for wb, b in rho_b for wc, c in rho_c]
    return Ensemble.from_weighted(branches)


@given(st.integers(0, 1), st.integers(0, 2), st.integers(0, 3), st.integers(0, 4))
def test_index_round_trip(q, a, b, c):
    lay = ModeLayout((3, 4, 5))
    assert lay.decode(lay.encode(q, a, b, c)) == (q, a, b, c)


@settings(max_examples=40, deadline=None)
@given(angles, angles, st.integers(1, 8), st.integers(1, 8))
def test_splitters_are_unitary(theta, psi, dx, dy):
    assert unitarity_error(beam_splitter(theta, psi, ("A", "B"), (dx, dy)).unitary) < 1e-10
    assert unitarity_error(controlled_beam_splitter(abs(theta), psi, ("B", "C"), (dx, dy)).unitary) < 1e-10


@settings(max_examples=30, deadline=None)
@given(angles, st.floats(0, 10), st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False))
def test_single_mode_gates_are_unitary(theta, area, alpha):
    assert unitarity_error(rotation(theta).unitary) < 1e-12
    assert unitarity_error(sideband("blue", area, "A", 6).unitary) < 1e-10
    assert unitarity_error(spin_displacement(alpha, "B", 25).unitary) < 1e-10


@settings(max_examples=25, deadline=None)
@given(register_states(entangled=True), register_states(), st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), angles)
def test_gate_application_is_linear_and_norm_preserving(x, y, c, theta):
    gate = controlled_beam_splitter(abs(theta), 0.3, ("A", "C"), (7, 7))
    lhs = apply(gate, x + y * c)
    rhs = apply(gate, x) + apply(gate, y) * c
    assert np.allclose(lhs.amplitudes, rhs.amplitudes, atol=1e-12)
    assert apply(gate, x).norm == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(ensembles(), st.integers(0, 2**32 - 1))
def test_ensemble_weight_conservation(ens, seed):
    rng = np.random.default_rng(seed)
    out = optical_pump(apply(rotation(1.0), ens))
    assert out.weights.sum() == pytest.approx(1.0, abs=1e-12)
    out = apply_heating(out, "B", 50.0, 1e-3, rng, trajectories=20)
    assert out.weights.sum() == pytest.approx(1.0, abs=1e-12)
    out = apply_dephasing(out, "C", 1e-3, 1e-4, rng, trajectories=3)
    assert out.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert fock_distribution(out, "B").sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(ensembles())
def test_noiseless_pg_at_most_half(ens):
    res = swap_test(ens)
    assert res.p_g_exact <= 0.5 + 1e-12
    assert res.overlap_from_pg == pytest.approx(res.overlap_oracle, abs=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, np.pi), st.floats(-np.pi / 2, np.pi / 2), st.floats(0.1, 2.0))
def test_purity_bounds(phi1, phi2, alpha_sq):
    lay4 = ModeLayout((4, 4, 4))
    p1 = purity_experiment(PrepRecipe("mixed-rho1", {"phi1": phi1}), lay4).overlap_from_pg
    # rho1 lives on a two-level subspace
    assert 0.5 - 1e-12 <= p1 <= 1 + 1e-12
    lay = ModeLayout((22, 22, 22))
    p2 = purity_experiment(PrepRecipe("mixed-rho2", {"phi2": phi2, "alpha_sq": alpha_sq}), lay).overlap_from_pg
    assert 0.5 - 1e-12 <= p2 <= 1 + 1e-12


@settings(max_examples=30, deadline=None)
@given(ensembles())
def test_purity_of_random_mixtures_is_bounded(ens):
    from fockswap.hilbert import partial_trace

    rho = partial_trace(ens, ["B"])
    rank_bound = 1 / SUPPORT
    assert rank_bound - 1e-12 <= rho.purity <= 1 + 1e-12


@pytest.mark.parametrize("m,n", [(0, 1), (1, 1)])
def test_sampled_estimator_is_unbiased(m, n):
    state = prepare_pair(PrepRecipe("superposition01", {"phi01": np.pi}),
                         PrepRecipe("superposition01", {"phi01": m + 0.7 * n}), ModeLayout((4, 4, 4)))
    reps = [swap_test(state, shots=500, rng_seed=s) for s in range(200)]
    samples = np.array([r.p_g_sampled for r in reps])
    sem = samples.std(ddof=1) / np.sqrt(len(samples))
    assert abs(samples.mean() - reps[0].p_g_exact) < 4 * sem
