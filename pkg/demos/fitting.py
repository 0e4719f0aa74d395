"""Recovering model parameters from noisy, finite-shot curves.

The calibration scan pins the coupling rate tightly. A cat-state scan
pins the contrast well but |alpha|^2 only loosely, because the curve
depends on it only through e^{-2|alpha|^2}.
"""
import numpy as np

from fockswap import FitModel, bootstrap_errors, fit, run_calibration
from fockswap.oracles import cat_overlap

omega0 = 2 * np.pi * 680
cal = run_calibration(omega0, np.linspace(0, 1.5e-3, 31), shots=500, seed=4)
print(f"calibration: Omega0/2pi = {cal.fit['omega0'] / (2 * np.pi):.1f} +/- "
      f"{cal.fit.stderr['omega0'] / (2 * np.pi):.1f} Hz, P0 = {cal.fit['P0']:.3f}")

phis = np.linspace(0, 2 * np.pi, 25)
truth = np.array([cat_overlap(0.9, p, gamma=0.62) for p in phis])
rng = np.random.default_rng(5)
noisy = 1 - 2 * rng.binomial(500, (1 - truth) / 2) / 500
res = fit(FitModel("cat-eq2"), phis, noisy)
boot = bootstrap_errors(FitModel("cat-eq2"), phis, truth, 500, replicas=200, seed=6)
print(f"cat fit: gamma = {res['gamma']:.3f} (bootstrap sd {boot.std['gamma']:.3f}), "
      f"|alpha|^2 = {res['alpha_sq']:.3f} (bootstrap sd {boot.std['alpha_sq']:.3f})")
