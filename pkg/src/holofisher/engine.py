"""Holonomic gradient method: ODE transport of ``C = (c~, grad c~)``.

Three routes are offered:

* :func:`hgm_transport` carries ``C`` along a straight segment using the
  Pfaffian connection; the segment must stay away from the singular planes.
* :func:`eval_C` integrates the radial system from a small multiple of ``x``
  (initialized by quadrature) out to ``x``.  The radial coefficient matrix
  has no poles in ``x``, so any query point works.
* :func:`eval_logC` does the same for ``D = C exp(-lambda0 t)`` with running
  renormalization, returning ``log c~`` and ``grad c~ / c~``.  This is the
  route the likelihood code uses; it does not overflow for concentrated data.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import GaugeError, SingularLocusError, SingularLocusWarning
from .ode import IntegratorConfig, integrate
from .pfaffian import gauge_matrix, lambda0, pfaffian_matrices, plane_forms, sing_distance

DEFAULT_CONFIG = IntegratorConfig()

_EYE4 = np.eye(4)
_RADIAL_MASK = np.array([0.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class LogCState:
    """``log c~(x)`` and ``u = grad c~ / c~``."""

    log_c: float
    u: np.ndarray

    def as_C(self):
        """Plain ``C`` vector; only representable while ``log_c`` is moderate."""
        return math.exp(self.log_c) * np.concatenate([[1.0], self.u])

    def normalized(self):
        return np.concatenate([[1.0], self.u])


def _as_point(x):
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise ValueError("x must be a finite 3-vector")
    return x


def _off_locus(x):
    """Return ``x`` or a slightly jittered copy if it lies on a singular plane."""
    if sing_distance(x) > 0.0:
        return x
    shifted = x + np.array([1.0, 2.0, 3.0]) * 1e-8 * max(1.0, float(np.max(np.abs(x))))
    warnings.warn(f"x = {x.tolist()} lies on the singular locus; "
                  f"evaluating at jittered point {shifted.tolist()}",
                  SingularLocusWarning, stacklevel=3)
    return shifted


def _radial_start(x, cfg):
    r = float(np.max(np.abs(x)))
    return min(cfg.t0, cfg.init_radius / r)


def _radial_rhs(x, shift):
    a = gauge_matrix(x) - shift * _EYE4

    def rhs(t, y):
        return a @ y - (2.0 / t) * (_RADIAL_MASK * y)

    return rhs


def eval_C(x, cfg=DEFAULT_CONFIG):
    """``C(x)`` by radial integration from a quadrature start."""
    x = _as_point(x)
    if float(np.sum(np.abs(x))) > oracle.OVERFLOW_LIMIT:
        raise OverflowError("c~(x) would overflow; use eval_logC")
    if not np.any(x):
        return np.array([1.0, 0.0, 0.0, 0.0])
    x = _off_locus(x)
    t_start = _radial_start(x, cfg)
    c0 = oracle.C_quad(t_start * x)
    c, log_scale = integrate(_radial_rhs(x, 0.0), t_start, 1.0, c0, cfg)
    return c * math.exp(log_scale) if log_scale else c


def eval_logC(x, cfg=DEFAULT_CONFIG):
    """``log c~(x)`` and ``grad c~ / c~`` through the gauge-shifted radial system."""
    x = _as_point(x)
    if not np.any(x):
        return LogCState(0.0, np.zeros(3))
    x = _off_locus(x)
    lam = lambda0(x)
    t_start = _radial_start(x, cfg)
    shift, d0 = oracle.C_quad_scaled(t_start * x)
    log_factor = shift - lam * t_start
    d, log_scale = integrate(_radial_rhs(x, lam), t_start, 1.0, d0, cfg, rescale=True)
    if not d[0] > 0:
        raise GaugeError("gauge pipeline lost positivity; tighten the integrator")
    return LogCState(lam + log_factor + log_scale + math.log(d[0]), d[1:] / d[0])


def segment_clearance(x_start, x_target):
    """Smallest plane distance on the closed segment and where it occurs.

    Each plane form is affine in the path parameter, so its minimum modulus
    is at an endpoint unless it changes sign.
    """
    a = plane_forms(x_start)
    b = plane_forms(x_target)
    best, where = math.inf, 0.0
    for fa, fb in zip(a, b):
        if fa == 0.0 or fb == 0.0 or (fa > 0) != (fb > 0):
            t = fa / (fa - fb) if fa != fb else 0.0
            return 0.0, t
        if abs(fa) < best:
            best, where = abs(fa), 0.0
        if abs(fb) < best:
            best, where = abs(fb), 1.0
    return best, where


def _transport(y0, x_start, x_target, cfg):
    x_start = _as_point(x_start)
    x_target = _as_point(x_target)
    dx = x_target - x_start
    if not np.any(dx):
        return np.array(y0, dtype=float), 0.0
    clearance, t_bad = segment_clearance(x_start, x_target)
    if clearance <= cfg.sing_threshold:
        raise SingularLocusError("path crosses singular locus", t=t_bad)

    def rhs(t, y):
        p1, p2, p3 = pfaffian_matrices(x_start + t * dx)
        return (dx[0] * p1 + dx[1] * p2 + dx[2] * p3) @ y

    return integrate(rhs, 0.0, 1.0, y0, cfg, rescale=True)


def hgm_transport(c_start, x_start, x_target, cfg=DEFAULT_CONFIG):
    """Carry ``C`` from ``x_start`` to ``x_target`` along the straight segment."""
    c_start = np.asarray(c_start, dtype=float)
    scale = float(np.max(np.abs(c_start)))
    if scale == 0.0:
        return np.zeros(4)
    y, log_scale = _transport(c_start / scale, x_start, x_target, cfg)
    return y * (scale * math.exp(log_scale))


def transport_logC(state, x_start, x_target, cfg=DEFAULT_CONFIG):
    """:func:`hgm_transport` for a :class:`LogCState`."""
    y, log_scale = _transport(state.normalized(), x_start, x_target, cfg)
    if not y[0] > 0:
        raise GaugeError("transport lost positivity of c~")
    return LogCState(state.log_c + log_scale + math.log(y[0]), y[1:] / y[0])
