"""Explicit Runge-Kutta integrators for small linear systems ``y' = f(t, y)``.

Only what the holonomic pipelines need: classical RK4 on a uniform grid and
the Fehlberg 4(5) pair with step-size control.  Both can rescale the state
when it drifts out of ``[1e-100, 1e100]``; this is only valid for linear
(homogeneous) systems and the accumulated log factor is returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

RESCALE_HI = 1e100
RESCALE_LO = 1e-100


@dataclass(frozen=True)
class IntegratorConfig:
    """Solver settings shared by radial evaluation and path transport.

    ``t0`` is the radial start; the start is also capped so that the initial
    point ``t0 * x`` has sup-norm at most ``init_radius`` (the quadrature
    initializer is cheap and exact there).  ``sing_threshold`` is the minimum
    plane distance allowed along a transport segment.
    """

    method: str = "rkf45"
    steps: int = 1000
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    t0: float = 0.1
    init_radius: float = 5.0
    sing_threshold: float = 0.02
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.method not in ("rk4", "rkf45"):
            raise ValueError(f"unknown integrator {self.method!r}")
        if self.steps < 10:
            raise ValueError("steps must be >= 10")
        if not 0.0 < self.t0 < 1.0:
            raise ValueError("t0 must lie in (0, 1)")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.init_radius <= 0:
            raise ValueError("init_radius must be positive")


def _rescale(y, log_scale):
    m = float(np.abs(y).max())
    if m > RESCALE_HI or (0.0 < m < RESCALE_LO):
        return y / m, log_scale + math.log(m)
    return y, log_scale


def rk4(f, t0, t1, y0, steps, rescale=False):
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / steps
    log_scale = 0.0
    for k in range(steps):
        t = t0 + k * h
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if rescale:
            y, log_scale = _rescale(y, log_scale)
    return y, log_scale


# Fehlberg tableau; _E is the difference between the 5th- and 4th-order
# weights.  The step is accepted on the 4th-order error estimate and, with
# local extrapolation, the 5th-order solution is carried forward.
_C = (0.0, 1 / 4, 3 / 8, 12 / 13, 1.0, 1 / 2)
_A = (
    (),
    (1 / 4,),
    (3 / 32, 9 / 32),
    (1932 / 2197, -7200 / 2197, 7296 / 2197),
    (439 / 216, -8.0, 3680 / 513, -845 / 4104),
    (-8 / 27, 2.0, -3544 / 2565, 1859 / 4104, -11 / 40),
)
_B4 = (25 / 216, 0.0, 1408 / 2565, 2197 / 4104, -1 / 5, 0.0)
_E = (1 / 360, 0.0, -128 / 4275, -2197 / 75240, 1 / 50, 2 / 55)


def rkf45(f, t0, t1, y0, rel_tol, abs_tol, rescale=False, max_steps=1_000_000,
          extrapolate=True):
    y = np.array(y0, dtype=float)
    log_scale = 0.0
    span = t1 - t0
    if span == 0:
        return y, log_scale
    direction = 1.0 if span > 0 else -1.0
    t = t0
    h = direction * min(abs(span), 0.01 * abs(span) + 1e-3)
    (a21,), (a31, a32), (a41, a42, a43), (a51, a52, a53, a54), \
        (a61, a62, a63, a64, a65) = _A[1:]
    b1, _, b3, b4, b5, _ = _B4
    e1, _, e3, e4, e5, e6 = _E
    c2, c3, c4, c5, c6 = _C[1:]
    for _ in range(max_steps):
        if direction * (t1 - t) <= 0:
            return y, log_scale
        if direction * (t + h - t1) > 0:
            h = t1 - t
        k1 = f(t, y)
        k2 = f(t + c2 * h, y + h * (a21 * k1))
        k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2))
        k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3))
        k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4))
        k6 = f(t + c6 * h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5))
        y4 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5)
        err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6)
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y4))
        err = float((np.abs(err_vec) / scale).max())
        if err <= 1.0:
            t = t1 if abs(t1 - (t + h)) <= 1e-15 * abs(span) else t + h
            y = y4 + err_vec if extrapolate else y4
            if rescale:
                y, log_scale = _rescale(y, log_scale)
        factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h *= factor
    raise RuntimeError("rkf45 exceeded the step budget")


def integrate(f, t0, t1, y0, cfg, rescale=False):
    """Integrate ``y' = f(t, y)`` from ``t0`` to ``t1``; returns ``(y, log_scale)``.

    The true solution is ``y * exp(log_scale)``; ``log_scale`` stays 0 unless
    ``rescale`` is set.
    """
    if cfg.method == "rk4":
        return rk4(f, t0, t1, y0, cfg.steps, rescale=rescale)
    return rkf45(f, t0, t1, y0, cfg.rel_tol, cfg.abs_tol, rescale=rescale,
                 max_steps=cfg.max_steps)
