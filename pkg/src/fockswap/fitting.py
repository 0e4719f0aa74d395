"""Levenberg-Marquardt fits of the calibration, fringe, Gaussian and cat models.

Bounded parameters are fitted through a transform so the optimizer itself
is unconstrained: ``(lo, inf)`` uses ``p = lo + u^2`` (the bound is reachable)
and ``(lo, hi)`` a logistic.  Jacobians are analytic; ``jacobian_error``
compares them with central differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConvergenceError, FitError, SingularJacobianError

INF = np.inf


# -- model functions ------------------------------------------------------------


def _sine_squared(x, p):
    p0, w = p
    return p0 * np.sin(w * x) ** 2


def _sine_squared_jac(x, p):
    p0, w = p
    return np.column_stack([np.sin(w * x) ** 2, p0 * x * np.sin(2 * w * x)])


def _sinusoid(x, p):
    amp, phase, offset = p
    return offset + amp * np.cos(x - phase)


def _sinusoid_jac(x, p):
    amp, phase, _ = p
    return np.column_stack([np.cos(x - phase), amp * np.sin(x - phase), np.ones_like(x)])


def _gaussian(x, p):
    amp, center, width = p
    return amp * np.exp(-((x - center) ** 2) / (2 * width**2))


def _gaussian_jac(x, p):
    amp, center, width = p
    g = np.exp(-((x - center) ** 2) / (2 * width**2))
    d = x - center
    return np.column_stack([g, amp * g * d / width**2, amp * g * d**2 / width**3])


def _cat(x, p):
    gamma, s = p
    c = np.cos(x)
    e = np.exp(-2 * s)
    return gamma * (1 + c) * (1 + e) / (2 * (1 + c * e))


def _cat_jac(x, p):
    gamma, s = p
    c = np.cos(x)
    e = np.exp(-2 * s)
    shape = (1 + c) * (1 + e) / (2 * (1 + c * e))
    d_s = gamma * (1 - c**2) / (2 * (1 + c * e) ** 2) * (-2 * e)
    return np.column_stack([shape, d_s])


# -- initial guesses --------------------------------------------------------------


def _guess_sine_squared(x, y):
    order = np.argsort(x)
    x, y = x[order], y[order]
    p0 = max(float(y.max()), 1e-3)
    mid = 0.5 * (y.max() + y.min())
    # first upward crossing of half height sits at T omega = pi/4
    above = np.nonzero((y[:-1] < mid) & (y[1:] >= mid))[0]
    if above.size:
        i = above[0]
        t = x[i] + (mid - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i])
        if t > 0:
            return [p0, np.pi / (4 * t)]
    return [p0, np.pi / (2 * max(float(x.max()), 1e-300))]


def _guess_sinusoid(x, y):
    basis = np.column_stack([np.ones_like(x), np.cos(x), np.sin(x)])
    (off, a, b), *_ = np.linalg.lstsq(basis, y, rcond=None)
    return [float(np.hypot(a, b)), float(np.arctan2(b, a)), float(off)]


def _guess_gaussian(x, y):
    i = int(np.argmax(y))
    amp = max(float(y[i]), 0.0)
    span = float(np.ptp(x)) or 1.0
    if amp <= 0:
        return [0.0, float(x[i]), span / 4]
    inside = x[y >= amp / 2]
    width = (inside.max() - inside.min()) / 2.3548 if inside.size > 1 else span / 10
    return [amp, float(x[i]), max(width, span / (10 * len(x)))]


def _guess_cat(x, y):
    best = None
    for s in np.linspace(0.05, 4.0, 80):
        shape = _cat(x, (1.0, s))
        gamma = float(np.dot(shape, y) / np.dot(shape, shape))
        gamma = min(max(gamma, 0.02), 0.98)
        res = float(np.sum((gamma * shape - y) ** 2))
        if best is None or res < best[0]:
            best = (res, gamma, s)
    return [best[1], best[2]]


@dataclass(frozen=True)
class _Kind:
    names: tuple[str, ...]
    f: Callable
    jac: Callable
    guess: Callable
    bounds: Mapping[str, tuple[float, float]]


_KINDS = {
    "sine-squared": _Kind(("P0", "omega0"), _sine_squared, _sine_squared_jac, _guess_sine_squared,
                          {"P0": (0.0, INF), "omega0": (0.0, INF)}),
    "sinusoid": _Kind(("amplitude", "phase", "offset"), _sinusoid, _sinusoid_jac, _guess_sinusoid, {}),
    "gaussian": _Kind(("amplitude", "center", "width"), _gaussian, _gaussian_jac, _guess_gaussian,
                      {"amplitude": (0.0, INF), "width": (0.0, INF)}),
    "cat-eq2": _Kind(("gamma", "alpha_sq"), _cat, _cat_jac, _guess_cat,
                     {"gamma": (0.0, 1.0), "alpha_sq": (0.0, INF)}),
}
MODEL_KINDS = tuple(_KINDS)


@dataclass(frozen=True)
class FitModel:
    """One of the four supported model families, with optional guesses and bounds.

    sine-squared: P0 sin^2(omega0 x)
    sinusoid:     offset + amplitude cos(x - phase)
    gaussian:     amplitude exp(-(x - center)^2 / (2 width^2))
    cat-eq2:      gamma (1 + cos x)(1 + e^{-2 s}) / (2 (1 + cos x e^{-2 s})), s = alpha_sq
    """

    kind: str
    initial: Mapping[str, float] | None = None
    bounds: Mapping[str, tuple[float, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model {self.kind!r}; expected one of {MODEL_KINDS}")
        merged = dict(_KINDS[self.kind].bounds)
        merged.update(self.bounds)
        bad = set(merged) - set(self.param_names)
        if bad or (self.initial and set(self.initial) - set(self.param_names)):
            raise ValueError(f"{self.kind} has parameters {self.param_names}")
        object.__setattr__(self, "bounds", merged)

    @property
    def param_names(self) -> tuple[str, ...]:
        return _KINDS[self.kind].names

    def __call__(self, x, params) -> np.ndarray:
        return _KINDS[self.kind].f(np.asarray(x, dtype=float), self._vector(params))

    def jacobian(self, x, params) -> np.ndarray:
        return _KINDS[self.kind].jac(np.asarray(x, dtype=float), self._vector(params))

    def guess(self, x, y) -> np.ndarray:
        g = np.array(_KINDS[self.kind].guess(np.asarray(x, float), np.asarray(y, float)), dtype=float)
        if self.initial:
            for i, name in enumerate(self.param_names):
                if name in self.initial:
                    g[i] = self.initial[name]
        return g

    def _vector(self, params) -> np.ndarray:
        if isinstance(params, Mapping):
            return np.array([params[n] for n in self.param_names], dtype=float)
        return np.asarray(params, dtype=float)

    # internal <-> external parameter maps
    def _bound(self, name):
        return self.bounds.get(name, (-INF, INF))

    def to_internal(self, p) -> np.ndarray:
        u = np.empty(len(p))
        for i, (name, v) in enumerate(zip(self.param_names, p)):
            lo, hi = self._bound(name)
            if np.isfinite(lo) and np.isfinite(hi):
                eps = 1e-9 * (hi - lo)
                v = min(max(v, lo + eps), hi - eps)
                u[i] = np.log((v - lo) / (hi - v))
            elif np.isfinite(lo):
                u[i] = np.sqrt(max(v - lo, 0.0))
            else:
                u[i] = v
        return u

    def to_external(self, u) -> tuple[np.ndarray, np.ndarray]:
        """External parameters and their derivatives with respect to ``u``."""
        p = np.empty(len(u))
        dp = np.empty(len(u))
        for i, (name, v) in enumerate(zip(self.param_names, u)):
            lo, hi = self._bound(name)
            if np.isfinite(lo) and np.isfinite(hi):
                s = 1 / (1 + np.exp(-v))
                p[i] = lo + (hi - lo) * s
                dp[i] = (hi - lo) * s * (1 - s)
            elif np.isfinite(lo):
                p[i] = lo + v * v
                dp[i] = 2 * v
            else:
                p[i] = v
                dp[i] = 1.0
        return p, dp


@dataclass(frozen=True)
class FitResult:
    params: dict[str, float]
    stderr: dict[str, float]
    residual_norm: float
    converged: bool
    iterations: int
    degenerate: tuple[str, ...] = ()

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    def as_dict(self) -> dict:
        return {
            "params": self.params,
            "stderr": self.stderr,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "degenerate": list(self.degenerate),
        }


def jacobian_error(model: FitModel, x, params, rel_step: float = 1e-6) -> float:
    """Largest relative gap between the analytic Jacobian and central differences."""
    x = np.asarray(x, dtype=float)
    p = model._vector(params)
    analytic = model.jacobian(x, p)
    numeric = np.empty_like(analytic)
    for i in range(len(p)):
        h = rel_step * max(abs(p[i]), 1.0)
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        numeric[:, i] = (model(x, up) - model(x, dn)) / (2 * h)
    scale = np.maximum(np.abs(analytic), np.max(np.abs(analytic), axis=0, keepdims=True) * 1e-3 + 1e-300)
    return float(np.max(np.abs(analytic - numeric) / scale))


def fit(
    model: FitModel,
    xs: Sequence[float],
    ys: Sequence[float],
    sigmas: Sequence[float] | None = None,
    *,
    max_iter: int = 200,
    ftol: float = 1e-10,
    gtol: float = 1e-10,
) -> FitResult:
    """Damped Gauss-Newton (Levenberg-Marquardt) least squares.

    Damping starts at 1e-3 and is divided by 10 after an accepted step,
    multiplied by 10 after a rejected one.  Converged when an accepted step
    changes the cost by less than ``ftol`` relative, or the gradient norm
    drops below ``gtol``.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    n_par = len(model.param_names)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D and of equal length")
    if len(x) < 2 * n_par:
        raise ValueError(f"{model.kind} needs at least {2 * n_par} points, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite data")
    if sigmas is None:
        w = np.ones_like(y)
    else:
        sig = np.asarray(sigmas, dtype=float)
        if sig.shape != y.shape or np.any(sig <= 0) or not np.all(np.isfinite(sig)):
            raise ValueError("sigmas must be positive, finite and match ys")
        w = 1 / sig

    def residual(u):
        p, _ = model.to_external(u)
        return (model(x, p) - y) * w

    def jac(u):
        p, dp = model.to_external(u)
        return model.jacobian(x, p) * w[:, None] * dp[None, :]

    u = model.to_internal(model.guess(x, y))
    r = residual(u)
    cost = 0.5 * float(r @ r)
    lam = 1e-3
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        J = jac(u)
        g = J.T @ r
        if cost == 0.0 or np.max(np.abs(g)) < gtol:
            converged = True
            break
        A = J.T @ J
        diag = np.diag(A).copy()
        if not np.any(diag > 0):
            raise SingularJacobianError(f"{model.kind}: Jacobian vanishes at {model.to_external(u)[0]}")
        diag = np.maximum(diag, 1e-12 * diag.max())
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                u_new = u + step
                r_new = residual(u_new)
                cost_new = 0.5 * float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    rel = (cost - cost_new) / cost
                    u, r, cost = u_new, r_new, cost_new
                    lam = max(lam / 10, 1e-15)
                    converged = rel < ftol
                    break
            lam *= 10
            if lam > 1e16:
                # no damped step lowers the cost: a minimum to working precision
                converged = True
                break
        if converged:
            break
    if not converged:
        raise ConvergenceError(f"{model.kind} fit did not converge in {max_iter} iterations")

    p, _ = model.to_external(u)
    jp = model.jacobian(x, p) * w[:, None]
    col = np.linalg.norm(jp, axis=0)
    degenerate = tuple(n for n, c in zip(model.param_names, col) if c <= 1e-12 * max(col.max(), 1e-300))
    live = [i for i, n in enumerate(model.param_names) if n not in degenerate]
    if not live:
        raise SingularJacobianError(f"{model.kind}: the data constrain none of the parameters")
    stderr = {n: float("nan") for n in model.param_names}
    jl = jp[:, live]
    ata = jl.T @ jl
    s = np.linalg.svd(ata, compute_uv=False)
    if s.min() <= 1e-14 * s.max():
        raise SingularJacobianError(f"{model.kind}: parameters are not separately identifiable at the optimum")
    cov = np.linalg.inv(ata)
    dof = len(x) - n_par
    scale = 2 * cost / dof if sigmas is None else 1.0
    for k, i in enumerate(live):
        stderr[model.param_names[i]] = float(np.sqrt(max(cov[k, k] * scale, 0.0)))
    return FitResult(
        params={n: float(v) for n, v in zip(model.param_names, p)},
        stderr=stderr,
        residual_norm=float(np.sqrt(2 * cost)),
        converged=True,
        iterations=it,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class BootstrapResult:
    """Spread of refitted parameters over shot-noise resamples."""

    std: dict[str, float]
    mean: dict[str, float]
    replicas: int
    failures: int
    method: str = "parametric bootstrap over Bernoulli shot noise"


def bootstrap_errors(
    model: FitModel,
    xs: Sequence[float],
    ys: Sequence[float],
    shots_per_point: int,
    replicas: int = 200,
    seed: int = 0,
) -> BootstrapResult:
    """Resample every point as Binomial(shots, y)/shots, refit, and report the spread."""
    if replicas < 100:
        raise ValueError("bootstrap needs at least 100 replicas")
    if shots_per_point < 1:
        raise ValueError("shots_per_point must be positive")
    rng = np.random.default_rng(seed)
    p = np.clip(np.asarray(ys, dtype=float), 0.0, 1.0)
    samples = []
    failures = 0
    for _ in range(replicas):
        y_star = rng.binomial(shots_per_point, p) / shots_per_point
        try:
            samples.append([fit(model, xs, y_star).params[n] for n in model.param_names])
        except FitError:
            failures += 1
    if failures > 0.05 * replicas:
        raise FitError(f"{failures} of {replicas} bootstrap refits failed")
    arr = np.array(samples)
    names = model.param_names
    return BootstrapResult(
        std={n: float(v) for n, v in zip(names, arr.std(axis=0, ddof=1))},
        mean={n: float(v) for n, v in zip(names, arr.mean(axis=0))},
        replicas=replicas,
        failures=failures,
    )
