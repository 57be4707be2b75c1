"""Maximum likelihood for the Fisher model on SO(3).

After the signed SVD of the sample mean, the per-sample log-likelihood is a
function of three numbers::

    l(x) = x . g - log c~(x)

It is strictly concave, so every optimizer here targets the same unique
maximizer.  Values and gradients come from :func:`engine.eval_logC`;
Hessians from the Pfaffian connection applied to ``(1, grad c~ / c~)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import engine
from .errors import ConcentrationError, ConvergenceWarning, SingularLocusError
from .ode import IntegratorConfig
from .pfaffian import chamber_representatives, hessian_from_C, sing_distance
from .rotations import SufficientStats, reconstruct_theta, signed_svd, sufficient_stats

CONCENTRATION_LIMIT = 0.9999
METHODS = ("hga", "hbfgs", "newton")
_DEFAULT_MAX_ITER = {"hga": 20000, "hbfgs": 500, "newton": 100}


@dataclass(frozen=True)
class OptimConfig:
    """Optimizer settings.

    ``start`` is ``"auto"``, ``"multistart"`` or an explicit 3-vector.
    ``transport`` switches HGA to the literal per-step path transport
    instead of re-evaluating each iterate radially.
    """

    method: str = "newton"
    gamma: float = 1e-2
    delta: float = 1e-8
    max_iter: Optional[int] = None
    start: object = "auto"
    transport: bool = False
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not self.gamma > 0 or not self.delta > 0:
            raise ValueError("gamma and delta must be positive")

    @property
    def iteration_limit(self):
        return self.max_iter if self.max_iter is not None else _DEFAULT_MAX_ITER[self.method]


@dataclass
class MLEResult:
    x_hat: np.ndarray
    loglik: float
    grad_norm: float
    iterations: int
    method: str
    converged: bool
    theta_hat: Optional[np.ndarray] = None
    stats: Optional[SufficientStats] = None
    warnings: list = field(default_factory=list)
    trace: list = field(default_factory=list)


def loglik(x, g, cfg=engine.DEFAULT_CONFIG):
    x = np.asarray(x, dtype=float)
    return float(x @ np.asarray(g, dtype=float) - engine.eval_logC(x, cfg).log_c)


def grad_loglik(x, g, cfg=engine.DEFAULT_CONFIG):
    return np.asarray(g, dtype=float) - engine.eval_logC(x, cfg).u


def _hess_from_state(x, state):
    u = state.u
    second = hessian_from_C(x, state.normalized())
    return np.outer(u, u) - second


def hess_loglik(x, cfg=engine.DEFAULT_CONFIG):
    """Hessian of the log-likelihood (independent of the data ``g``)."""
    x = np.asarray(x, dtype=float)
    if sing_distance(x) == 0.0:
        raise SingularLocusError(f"Hessian undefined on the singular locus, x = {x.tolist()}")
    return _hess_from_state(x, engine.eval_logC(x, cfg))


def loglik_theta(theta, mean, cfg=engine.DEFAULT_CONFIG):
    """Per-sample log-likelihood of a full parameter matrix."""
    theta = np.asarray(theta, dtype=float)
    x = signed_svd(theta).g
    return float(np.sum(theta * np.asarray(mean)) - engine.eval_logC(x, cfg).log_c)


def default_start(g, min_distance=1e-3):
    """``3 g`` (the small-``x`` inverse of ``grad c~ / c~``), nudged off the planes."""
    x = 3.0 * np.asarray(g, dtype=float)
    step = min_distance
    nudge = np.array([1.0, 2.0, 3.0])
    y = x
    while sing_distance(y) < min_distance:
        y = x + step * nudge
        step *= 2.0
    return y


class _Objective:
    """Caches one evaluation per point."""

    def __init__(self, g, integrator):
        self.g = np.asarray(g, dtype=float)
        self.cfg = integrator
        self.evals = 0

    def at(self, x, state=None):
        x = np.asarray(x, dtype=float)
        if state is None:
            state = engine.eval_logC(x, self.cfg)
            self.evals += 1
        value = float(x @ self.g - state.log_c)
        return _Point(x, value, self.g - state.u, state)


@dataclass
class _Point:
    x: np.ndarray
    value: float
    grad: np.ndarray
    state: engine.LogCState

    @property
    def gnorm(self):
        return float(np.max(np.abs(self.grad)))


def _start_point(g, cfg):
    if isinstance(cfg.start, str):
        if cfg.start == "auto":
            return default_start(g)
        raise ValueError(f"unknown start {cfg.start!r}")
    x0 = np.asarray(cfg.start, dtype=float)
    if x0.shape != (3,) or not np.all(np.isfinite(x0)):
        raise ValueError("explicit start must be a finite 3-vector")
    return x0


def _finish(point, it, method, converged, notes, trace):
    if not converged:
        notes.append("not converged")
        warnings.warn(f"{method}: not converged after {it} iterations "
                      f"(|grad| = {point.gnorm:.3e})", ConvergenceWarning, stacklevel=3)
    return MLEResult(x_hat=point.x, loglik=point.value, grad_norm=point.gnorm,
                     iterations=it, method=method, converged=converged,
                     warnings=notes, trace=trace)


def hga(g, cfg=None):
    """Holonomic gradient ascent with a fixed learning rate ``cfg.gamma``."""
    cfg = cfg or OptimConfig(method="hga")
    obj = _Objective(g, cfg.integrator)
    point = obj.at(_start_point(g, cfg))
    notes, trace = [], []
    for it in range(cfg.iteration_limit):
        if point.gnorm < cfg.delta:
            return _finish(point, it, "hga", True, notes, trace)
        x_new = point.x + cfg.gamma * point.grad
        state = None
        if cfg.transport:
            try:
                state = engine.transport_logC(point.state, point.x, x_new, cfg.integrator)
            except SingularLocusError:
                notes.append(f"iteration {it}: transport blocked by singular locus, "
                             "re-evaluated radially")
        point = obj.at(x_new, state)
        trace.append(point.x.copy())
    return _finish(point, cfg.iteration_limit, "hga", point.gnorm < cfg.delta, notes, trace)


def _ftol(value):
    return 1e-12 * (1.0 + abs(value))


def _cap(p, x):
    limit = 10.0 * max(1.0, float(np.max(np.abs(x))))
    n = float(np.max(np.abs(p)))
    return p * (limit / n) if n > limit else p


def _line_search(obj, point, p, armijo=1e-4, max_halvings=60):
    """Backtrack from the full step until sufficient increase (up to noise)."""
    slope = float(point.grad @ p)
    alpha = 1.0
    for _ in range(max_halvings):
        trial = obj.at(point.x + alpha * p)
        if trial.value >= point.value + armijo * alpha * slope - _ftol(point.value):
            return trial
        alpha *= 0.5
    return None


def _bfgs_update(hinv, s, yf):
    sy = float(s @ yf)
    if sy <= 1e-14 * float(np.linalg.norm(s) * np.linalg.norm(yf)):
        return hinv
    rho = 1.0 / sy
    eye = np.eye(3)
    a = eye - rho * np.outer(s, yf)
    return a @ hinv @ a.T + rho * np.outer(s, s)


def hbfgs(g, cfg=None):
    """BFGS ascent on the log-likelihood with Armijo backtracking."""
    cfg = cfg or OptimConfig(method="hbfgs")
    obj = _Objective(g, cfg.integrator)
    point = obj.at(_start_point(g, cfg))
    # Inverse Hessian of -l at the origin is 3 I.
    hinv = 3.0 * np.eye(3)
    notes, trace = [], []
    for it in range(cfg.iteration_limit):
        if point.gnorm < cfg.delta:
            return _finish(point, it, "hbfgs", True, notes, trace)
        p = _cap(hinv @ point.grad, point.x)
        trial = _line_search(obj, point, p)
        if trial is None:
            hinv = 3.0 * np.eye(3)
            p = _cap(hinv @ point.grad, point.x)
            trial = _line_search(obj, point, p)
            if trial is None:
                notes.append(f"iteration {it}: line search failed")
                return _finish(point, it, "hbfgs", False, notes, trace)
        hinv = _bfgs_update(hinv, trial.x - point.x, point.grad - trial.grad)
        point = trial
        trace.append(point.x.copy())
    return _finish(point, cfg.iteration_limit, "hbfgs", point.gnorm < cfg.delta, notes, trace)


def _newton_direction(point):
    if sing_distance(point.x) == 0.0:
        return None, "singular locus"
    hess = _hess_from_state(point.x, point.state)
    try:
        np.linalg.cholesky(-hess)
    except np.linalg.LinAlgError:
        return None, "Hessian not negative definite"
    return -np.linalg.solve(hess, point.grad), None


def newton(g, cfg=None):
    """Damped Newton iteration with Pfaffian Hessians.

    Steps are halved until the likelihood increases.  Where the Hessian is
    unusable (on a singular plane, or not negative definite numerically) a
    quasi-Newton step from a running BFGS estimate is taken instead.
    """
    cfg = cfg or OptimConfig(method="newton")
    obj = _Objective(g, cfg.integrator)
    point = obj.at(_start_point(g, cfg))
    hinv = 3.0 * np.eye(3)
    notes, trace = [], []
    for it in range(cfg.iteration_limit):
        if point.gnorm < cfg.delta:
            return _finish(point, it, "newton", True, notes, trace)
        p, why = _newton_direction(point)
        if p is None:
            notes.append(f"iteration {it}: {why}, quasi-Newton step")
            warnings.warn(f"newton: {why} at x = {point.x.tolist()}; "
                          "falling back to a quasi-Newton step", ConvergenceWarning,
                          stacklevel=2)
            p = hinv @ point.grad
        trial = _line_search(obj, point, _cap(p, point.x))
        if trial is None:
            notes.append(f"iteration {it}: line search failed")
            return _finish(point, it, "newton", False, notes, trace)
        hinv = _bfgs_update(hinv, trial.x - point.x, point.grad - trial.grad)
        point = trial
        trace.append(point.x.copy())
    return _finish(point, cfg.iteration_limit, "newton", point.gnorm < cfg.delta, notes, trace)


OPTIMIZERS = {"hga": hga, "hbfgs": hbfgs, "newton": newton}


def multistart(g, cfg=None):
    """Run the optimizer from one point in each of the 24 chambers.

    Starts are scaled to the norm of :func:`default_start`.  The best
    likelihood wins (ties broken by lexicographic ``x_hat``); a spread
    between the estimates beyond ``1e-6`` relative is recorded as a warning.
    """
    cfg = cfg or OptimConfig()
    radius = float(np.linalg.norm(default_start(g)))
    results = []
    for rep in chamber_representatives():
        start = rep * (radius / float(np.linalg.norm(rep)))
        sub = OptimConfig(method=cfg.method, gamma=cfg.gamma, delta=cfg.delta,
                          max_iter=cfg.max_iter, start=start, transport=cfg.transport,
                          integrator=cfg.integrator)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            results.append(OPTIMIZERS[cfg.method](g, sub))
    best = max(results, key=lambda r: (r.loglik, tuple(-r.x_hat)))
    xs = np.array([r.x_hat for r in results])
    spread = float(np.max(np.abs(xs - best.x_hat)))
    if spread > 1e-6 * max(1.0, float(np.max(np.abs(best.x_hat)))):
        best.warnings.append(f"multistart estimates disagree by {spread:.3e}")
    best.iterations = sum(r.iterations for r in results)
    best.converged = all(r.converged for r in results)
    return best


def polytope_margin(g):
    """Distance-like margin of ``g`` inside the tetrahedron of attainable means.

    The diagonals of rotations fill the tetrahedron with vertices (1,1,1),
    (1,-1,-1), (-1,1,-1), (-1,-1,1).  A maximizer exists only for ``g`` in
    its interior, i.e. for a positive margin.
    """
    g1, g2, g3 = np.asarray(g, dtype=float)
    return float(min(1 + g1 + g2 + g3, 1 + g1 - g2 - g3,
                     1 - g1 + g2 - g3, 1 - g1 - g2 + g3))


def fit(data, cfg=None, *, force_gauge=False):
    """Fit the Fisher model to a rotation sample or precomputed statistics.

    ``data`` is either a :class:`SufficientStats` or an ``(n, 3, 3)`` array.
    Raises :class:`ConcentrationError` when the smallest signed singular
    value of the mean exceeds 0.9999, unless ``force_gauge`` is set, and
    always when ``g`` lies on the boundary where no maximizer exists.
    """
    cfg = cfg or OptimConfig()
    stats = data if isinstance(data, SufficientStats) else sufficient_stats(data)
    if polytope_margin(stats.g) <= 1e-12:
        raise ConcentrationError(
            f"no maximum likelihood estimate exists: g = {stats.g.tolist()} lies on "
            "the boundary of the set of attainable sample means")
    if stats.g[2] > CONCENTRATION_LIMIT and not force_gauge:
        raise ConcentrationError(
            f"sample mean is nearly a rotation (g = {stats.g.tolist()}); the "
            "normalizing constant is astronomically large and the estimate "
            "diverges.  Pass force_gauge=True (CLI: --force-gauge) to try anyway, "
            "ideally with an explicit start.")
    if isinstance(cfg.start, str) and cfg.start == "multistart":
        result = multistart(stats.g, cfg)
    else:
        result = OPTIMIZERS[cfg.method](stats.g, cfg)
    result.stats = stats
    result.theta_hat = reconstruct_theta(stats, result.x_hat)
    return result


def likelihood_ratio(theta, result, cfg=engine.DEFAULT_CONFIG):
    """``l(theta) - l(theta_hat)`` per sample; non-positive at the MLE."""
    return loglik_theta(theta, result.stats.mean(), cfg) - result.loglik
