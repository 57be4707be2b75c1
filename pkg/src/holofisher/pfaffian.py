"""Pfaffian connection for the SO(3) normalizing constant.

The holonomic vector is ``C = (c~, d1 c~, d2 c~, d3 c~)`` and satisfies
``d_i C = P_i(x) C``.  The ``P_i`` have poles on the six planes
``x_i = +-x_j``; everything here is plain numpy evaluated at a point.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import SingularLocusError


def plane_forms(x):
    """``(x1-x2, x1+x2, x1-x3, x1+x3, x2-x3, x2+x3)``."""
    x1, x2, x3 = (float(v) for v in x)
    return np.array([x1 - x2, x1 + x2, x1 - x3, x1 + x3, x2 - x3, x2 + x3])


def sing_distance(x):
    """Smallest ``|x_i -+ x_j|``; zero exactly on the singular locus."""
    return float(np.min(np.abs(plane_forms(x))))


def _require_regular(x):
    if sing_distance(x) == 0.0:
        raise SingularLocusError(f"Pfaffian singular at x = {list(map(float, x))}")


def pfaffian_matrix(i, x):
    """``P_i(x)`` for axis ``i`` in ``{1, 2, 3}``."""
    if i not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    _require_regular(x)
    x1, x2, x3 = (float(v) for v in x)
    if i == 1:
        d12, d13 = x1 * x1 - x2 * x2, x1 * x1 - x3 * x3
        return np.array([
            [0.0, 1.0, 0.0, 0.0],
            [1.0, x1 * (-2 * x1 * x1 + x2 * x2 + x3 * x3) / (d13 * d12), x2 / d12, x3 / d13],
            [0.0, x2 / d12, -x1 / d12, 1.0],
            [0.0, x3 / d13, 1.0, -x1 / d13],
        ])
    if i == 2:
        d21, d23 = x2 * x2 - x1 * x1, x2 * x2 - x3 * x3
        return np.array([
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -x2 / d21, x1 / d21, 1.0],
            [1.0, x1 / d21, x2 * (x1 * x1 - 2 * x2 * x2 + x3 * x3) / (d21 * d23), x3 / d23],
            [0.0, 1.0, x3 / d23, -x2 / d23],
        ])
    d31, d32 = x3 * x3 - x1 * x1, x3 * x3 - x2 * x2
    return np.array([
        [0.0, 0.0, 0.0, 1.0],
        [0.0, -x3 / d31, 1.0, x1 / d31],
        [0.0, 1.0, -x3 / d32, x2 / d32],
        [1.0, x1 / d31, x2 / d32, x3 * (x1 * x1 + x2 * x2 - 2 * x3 * x3) / (d31 * d32)],
    ])


def pfaffian_matrices(x):
    return [pfaffian_matrix(i, x) for i in (1, 2, 3)]


def gauge_matrix(x):
    """Symmetric 4x4 matrix with zero diagonal whose top eigenvalue is the gauge."""
    x1, x2, x3 = (float(v) for v in x)
    return np.array([
        [0.0, x1, x2, x3],
        [x1, 0.0, x3, x2],
        [x2, x3, 0.0, x1],
        [x3, x2, x1, 0.0],
    ])


def radial_matrix(x, t):
    """Coefficient of ``d/dt C(t x) = M(x, t) C(t x)``."""
    if not t > 0:
        raise ValueError("radial matrix needs t > 0")
    m = gauge_matrix(x)
    m[1, 1] = m[2, 2] = m[3, 3] = -2.0 / t
    return m


def lambda0(x):
    """Largest eigenvalue of :func:`gauge_matrix`."""
    return float(np.linalg.eigvalsh(gauge_matrix(x))[-1])


def hessian_from_C(x, c):
    """Second partials of ``c~`` recovered from ``C`` through the connection.

    Rows of ``P_i C`` hold ``d_i d_j c~`` in positions 2..4 (1-based), i.e.
    ``(P_j C)[i]`` for ``i <= j`` with zero-based ``i`` in 1..3.
    """
    c = np.asarray(c, dtype=float)
    p1c, p2c, p3c = (p @ c for p in pfaffian_matrices(x))
    h11, h12, h13 = p1c[1], p2c[1], p3c[1]
    h22, h23 = p2c[2], p3c[2]
    h33 = p3c[3]
    return np.array([[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]])


def chamber_signature(x):
    return tuple(int(s) for s in np.sign(plane_forms(x)))


def chamber_representatives():
    """One interior point in each of the 24 chambers of the arrangement."""
    reps = {}
    for perm in itertools.permutations((3.0, 2.0, 1.0)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            p = np.array(signs) * np.array(perm)
            reps.setdefault(chamber_signature(p), p)
    return list(reps.values())
