"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (the lines are repeated in the terminal summary) or
directly with ``python3 tests/test_acceptance.py``.
"""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from fockswap import bosonic
from fockswap.fitting import FitModel, fit
from fockswap.gates import PulseEnvelope, controlled_beam_splitter, evolve_pulsed_cbs
from fockswap.hilbert import Ensemble, ModeLayout, PureState, overlap_exact, partial_trace
from fockswap.noise import ContrastModel, NoiseConfig
from fockswap.oracles import cat_overlap, coherent_overlap, purity_rho1, squeezed_overlap
from fockswap.protocols import PrepRecipe, controlled_swap_equivalence, prepare_pair, purity_experiment, swap_test
from fockswap.runner import load_config, point_seed, run_calibration, run_sweep

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

OMEGA0 = 2 * np.pi * 680
TWO_PI = 2 * np.pi


def report(label, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


# -- 1. oracle equivalence ---------------------------------------------------

def _random_mode_state(rng, dim):
    if rng.random() < 0.5:
        v = np.zeros(dim, dtype=complex)
        v[:7] = rng.normal(size=7) + 1j * rng.normal(size=7)
        return v / np.linalg.norm(v)
    alpha = np.sqrt(rng.uniform(0, 3)) * np.exp(1j * rng.uniform(0, TWO_PI))
    return bosonic.coherent_state(alpha, dim)


def _random_mixture(rng, dim, mixed):
    if not mixed:
        return [(1.0, _random_mode_state(rng, dim))]
    w = rng.uniform(0.1, 0.9)
    return [(w, _random_mode_state(rng, dim)), (1 - w, _random_mode_state(rng, dim))]


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    layout = ModeLayout.uniform(32)
    vac = np.eye(32)[0]
    g = np.array([1.0, 0.0])
    worst = worst_direct = 0.0
    t0 = time.perf_counter()
    for i in range(200):
        rho_b = _random_mixture(rng, 32, mixed=i % 2 == 1)
        rho_c = _random_mixture(rng, 32, mixed=i % 4 in (1, 2))
        ens = Ensemble.from_weighted(
            (wb * wc, PureState.product(layout, g, vac, b, c)) for wb, b in rho_b for wc, c in rho_c
        )
        got = swap_test(ens).overlap_from_pg
        want = overlap_exact(partial_trace(ens, ["B"]), partial_trace(ens, ["C"]))
        direct = sum(wb * wc * abs(np.vdot(b, c)) ** 2 for wb, b in rho_b for wc, c in rho_c)
        worst = max(worst, abs(got - want))
        worst_direct = max(worst_direct, abs(want - direct))
    elapsed = time.perf_counter() - t0
    report("1 oracle equivalence", worst < 1e-8 and worst_direct < 1e-12 and elapsed < 30,
           f"max |overlap - Tr(rho_B rho_C)| = {worst:.2e} over 200 pairs in {elapsed:.1f} s")


# -- 2. controlled-SWAP equivalence -----------------------------------------

def test_criterion_2_controlled_swap():
    layout = ModeLayout.uniform(8)
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    fids = []
    for m in range(4):
        for n in range(4):
            chi = np.zeros((8, 8), dtype=complex)
            chi[m, n] = 1
            fids.append(controlled_swap_equivalence(_register(layout, chi)))
    for _ in range(50):
        chi = np.zeros((8, 8), dtype=complex)
        chi[:4, :4] = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        fids.append(controlled_swap_equivalence(_register(layout, chi / np.linalg.norm(chi))))
    elapsed = time.perf_counter() - t0
    report("2 controlled-SWAP equivalence", min(fids) >= 1 - 1e-9 and elapsed < 10,
           f"min fidelity 1 - {1 - min(fids):.1e} over {len(fids)} inputs in {elapsed:.1f} s")


def _register(layout, chi):
    t = np.zeros(layout.shape, dtype=complex)
    t[0, 0] = chi
    return PureState.from_tensor(layout, t)


# -- 3. figure curves --------------------------------------------------------

def _rows(name, tmp_path):
    return run_sweep(load_config(name), tmp_path / f"{name}.csv")


def test_criterion_3_fig2a_fock_identity(tmp_path):
    rows = _rows("fig2a", tmp_path)
    err = max(abs(r.overlap_from_pg - (r.sweep_values[0] == r.sweep_values[1])) for r in rows)
    report("3 fig2a Fock overlap matrix", err < 1e-8 and len(rows) == 36, f"max deviation from identity {err:.1e}")


def test_criterion_3_fig2b_sin_squared(tmp_path):
    rows = _rows("fig2b", tmp_path)
    err = max(abs(r.overlap_from_pg - np.sin(r.sweep_values[0] / 2) ** 2) for r in rows)
    report("3 fig2b sin^2(phi01/2)", err < 1e-8 and len(rows) == 33, f"max deviation {err:.1e} on {len(rows)} points")


def test_criterion_3_fig3a_coherent_grid(tmp_path):
    rows = _rows("fig3a", tmp_path)
    alpha = np.sqrt(3) * np.exp(1j * np.pi)
    err = max(abs(r.overlap_from_pg - coherent_overlap(alpha, np.sqrt(r.sweep_values[0]) * np.exp(1j * r.sweep_values[1])))
              for r in rows)
    peak = max(rows, key=lambda r: r.overlap_from_pg).sweep_values
    ok = err < 1e-6 and peak[0] == pytest.approx(3.0) and peak[1] == pytest.approx(np.pi)
    report("3 fig3a coherent overlap grid", ok,
           f"max deviation {err:.1e}; peak at |beta|^2 = {peak[0]:g}, phi_C = {peak[1]:.4f}")


def _fwhm(x, y):
    """Width of the peak at half its prominence, by linear interpolation."""
    x, y = np.asarray(x), np.asarray(y)
    i = int(np.argmax(y))
    half = (y.max() + y.min()) / 2
    left = np.nonzero(y[: i + 1] < half)[0]
    right = np.nonzero(y[i:] < half)[0]
    if not left.size or not right.size:
        return float("inf")
    lo, hi = left[-1], i + right[0]
    x_lo = np.interp(half, [y[lo], y[lo + 1]], [x[lo], x[lo + 1]])
    x_hi = np.interp(half, [y[hi], y[hi - 1]], [x[hi], x[hi - 1]])
    return float(x_hi - x_lo)


def test_criterion_3_fig3d_squeezed(tmp_path):
    rows = _rows("fig3d", tmp_path)
    err = max(abs(r.overlap_from_pg - squeezed_overlap(r.sweep_values[0], r.sweep_values[1] - np.pi)) for r in rows)
    widths = []
    for r_val in (0.2, 0.5, 0.8):
        sub = [r for r in rows if r.sweep_values[0] == r_val]
        widths.append(_fwhm([r.sweep_values[1] for r in sub], [r.overlap_from_pg for r in sub]))
    ok = err < 1e-8 and widths[0] > widths[1] > widths[2]
    report("3 fig3d squeezed overlap", ok,
           f"max deviation {err:.1e}; FWHM {', '.join(f'{w:.3f}' for w in widths)} rad for r = 0.2, 0.5, 0.8")


def test_criterion_3_fig3e_cat(tmp_path):
    rows = _rows("fig3e", tmp_path)
    err = max(abs(r.overlap_from_pg - cat_overlap(1.0, r.sweep_values[0])) for r in rows)
    report("3 fig3e cat overlap", err < 1e-8 and len(rows) == 25, f"max deviation {err:.1e} on {len(rows)} points")


def test_criterion_3_fig4a_purity_with_contrast(tmp_path):
    rows = _rows("fig4a", tmp_path)
    err = max(abs(r.overlap_from_pg - purity_rho1(r.sweep_values[0], 0.92, 0.88)) for r in rows)
    mid = next(r for r in rows if r.sweep_values[0] == pytest.approx(np.pi / 2))
    ok = err < 1e-10 and mid.overlap_from_pg == pytest.approx(0.45, abs=1e-10)
    report("3 fig4a contrast-scaled purity", ok, f"max deviation {err:.1e}; value {mid.overlap_from_pg:.12f} at pi/2")


def test_criterion_3_fig4b_exact_purity():
    res = purity_experiment(PrepRecipe("mixed-rho2", {"phi2": 0.0, "alpha_sq": 1.2}), ModeLayout.uniform(22))
    want = (1 + np.exp(-4.8)) / 2
    report("3 fig4b exact purity", abs(res.overlap_from_pg - want) < 1e-8,
           f"{res.overlap_from_pg:.12f} vs (1 + e^-4.8)/2 = {want:.12f}")


# -- 4. calibration fit -------------------------------------------------------

def test_criterion_4_calibration_fit():
    durations = np.linspace(0, 1.5e-3, 31)
    t0 = time.perf_counter()
    hits = 0
    for seed in range(100):
        res = run_calibration(OMEGA0, durations, shots=500, seed=seed)
        hits += abs(res.fit["omega0"] / OMEGA0 - 1) < 0.01
    elapsed = time.perf_counter() - t0
    report("4 calibration fit", hits >= 95 and elapsed < 60,
           f"{hits}/100 replicas recover Omega0 within 1% in {elapsed:.1f} s")


# -- 5. cat fit ---------------------------------------------------------------

def _cat_recovery(n_points, replicas=100, shots=500, master=5005):
    layout = ModeLayout.uniform(20)
    contrast = ContrastModel(gamma=0.62)
    base = PrepRecipe("cat", {"alpha_sq": 0.9, "phi_cat": 0.0})
    phis = np.linspace(0, TWO_PI, n_points)
    p_g = np.array([swap_test(prepare_pair(base, base.with_params(phi_cat=p), layout), contrast=contrast).p_g_exact
                    for p in phis])
    model = FitModel("cat-eq2")
    hits = 0
    for rep in range(replicas):
        rng = np.random.default_rng(point_seed(master, rep))
        y = 1 - 2 * rng.binomial(shots, p_g) / shots
        res = fit(model, phis, y)
        hits += abs(res["gamma"] / 0.62 - 1) < 0.1 and abs(res["alpha_sq"] / 0.9 - 1) < 0.1
    return hits


FIG3E_POINTS = 25  # the fig3e phi_cat grid


@pytest.mark.xfail(strict=True, reason="500 shots on the 25-point grid cannot pin |alpha|^2 to 10% in 90% of "
                                       "replicas; see test_criterion_5_matches_the_cramer_rao_bound")
def test_criterion_5_cat_fit():
    hits = _cat_recovery(FIG3E_POINTS)
    report("5 cat fit", hits >= 90, f"{hits}/100 replicas recover gamma and |alpha|^2 within 10% "
                                    f"({FIG3E_POINTS}-point phi_cat grid, 500 shots)")


def _crlb(n_points, shots=500, gamma=0.62, alpha_sq=0.9, h=1e-6):
    phis = np.linspace(0, TWO_PI, n_points)

    def curve(g, a):
        return np.array([cat_overlap(a, p, gamma=g) for p in phis])

    y = curve(gamma, alpha_sq)
    var = (1 - y**2) / shots  # variance of 1 - 2 p_hat
    jac = np.stack([(curve(gamma + h, alpha_sq) - curve(gamma - h, alpha_sq)) / (2 * h),
                    (curve(gamma, alpha_sq + h) - curve(gamma, alpha_sq - h)) / (2 * h)], axis=1)
    return np.sqrt(np.diag(np.linalg.inv(jac.T @ (jac / var[:, None]))))


def test_criterion_5_matches_the_cramer_rao_bound():
    from scipy.stats import norm

    sd_gamma, sd_alpha = _crlb(FIG3E_POINTS)
    best = (2 * norm.cdf(0.062 / sd_gamma) - 1) * (2 * norm.cdf(0.09 / sd_alpha) - 1)
    hits = _cat_recovery(FIG3E_POINTS, master=5006)
    line = (f"[INFO] 5 cat fit bound: sd(|alpha|^2) >= {sd_alpha:.3f}, so at most {100 * best:.0f}% of replicas "
            f"can land within 10%; observed {hits}/100")
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert best < 0.9
    assert abs(hits / 100 - best) < 0.15


# -- 6. pulse equivalence -----------------------------------------------------

def test_criterion_6_pulse_equivalence():
    env = PulseEnvelope.for_area(np.pi / 2, OMEGA0, ramp_tau=50e-6)
    pulsed = evolve_pulsed_cbs(env, 0.0, ("A", "B"), (8, 8), steps=4000).dense()
    closed = controlled_beam_splitter(np.pi / 2, 0.0, ("A", "B"), (8, 8)).dense()
    err = float(np.max(np.abs(pulsed - closed)))
    report("6 pulse equivalence", err < 1e-6 and env.area == pytest.approx(np.pi / 2), f"max-norm difference {err:.1e}")


# -- 7. property suites -------------------------------------------------------

SUITES = {
    "unitarity": "unitary",
    "norm preservation": "linear_and_norm",
    "ensemble weights": "weight_conservation",
    "P_g <= 1/2": "pg_at_most_half",
    "purity bounds": "purity",
    "estimator unbiasedness": "unbiased",
}


def test_criterion_7_property_suites():
    props = Path(__file__).with_name("test_properties.py")
    results = []
    for name, key in SUITES.items():
        t0 = time.perf_counter()
        proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", str(props), "-k", key],
                              capture_output=True, text=True)
        results.append((name, proc.returncode == 0, time.perf_counter() - t0))
    ok = all(passed and t < 30 for _, passed, t in results)
    detail = "; ".join(f"{n} {'ok' if p else 'FAILED'} {t:.1f} s" for n, p, t in results)
    report("7 property suites", ok, detail)


# -- 8. noise sanity ----------------------------------------------------------

def test_criterion_8_heating_on_c():
    rate, exposure, n_traj = 20.2, 1.1e-3, 10_000
    # the whole exposure hits the input on C before the first splitter empties it
    noise = NoiseConfig((0.0, 0.0, rate), gate_durations={"prep": exposure, "cbs_ac": 0.0, "cbs_ab": 0.0},
                        trajectories=n_traj)
    fock1 = PrepRecipe("fock", {"m": 1})
    res = swap_test(prepare_pair(fock1, fock1, ModeLayout.uniform(4)), noise=noise, rng_seed=8008)
    drop = 1 - res.overlap_from_pg
    p = rate * exposure
    sigma = np.sqrt(p * (1 - p) / n_traj)
    report("8 heating noise sanity", abs(drop - p) < 3 * sigma,
           f"overlap drop {drop:.4f} vs first-order {p:.4f} (sigma {sigma:.4f}, {n_traj} trajectories)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
