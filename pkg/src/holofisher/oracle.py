"""Brute-force quadrature for the SO(3) normalizing constant and its partials.

Rotations are parametrized by ZXZ Euler angles ``Y = Rz(a) Rx(b) Rz(c)``; the
Haar measure is ``sin(b) da db dc / (8 pi^2)``.  With ``u = cos(b)`` the
diagonal of ``Y`` is::

    y11 = cos a cos c - u sin a sin c
    y22 = u cos a cos c - sin a sin c
    y33 = u

The two periodic angles use the trapezoid rule (spectrally accurate for
this entire integrand) and ``u`` uses Gauss-Legendre nodes.  Partial
derivatives are computed by differentiating under the integral sign, so a
moment ``E[y11^a1 y22^a2 y33^a3 exp(...)]`` is a fresh quadrature and never
a finite difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import SingularLocusError

OVERFLOW_LIMIT = 700.0

# Upper bound on integrand points held in memory at once.
_CHUNK_POINTS = 1 << 20


@dataclass(frozen=True)
class QuadratureGrid:
    n_alpha: int = 24
    n_u: int = 16
    n_gamma: int = 24

    def __post_init__(self):
        if min(self.n_alpha, self.n_u, self.n_gamma) < 4:
            raise ValueError("quadrature grid needs at least 4 nodes per axis")

    @classmethod
    def for_point(cls, x):
        """Default grid, refined with the size of ``x``."""
        r = math.ceil(float(np.max(np.abs(x)))) if np.size(x) else 0
        n_ang = max(24, 8 + 4 * r)
        return cls(n_alpha=n_ang, n_u=max(16, 8 + 2 * r), n_gamma=n_ang)

    def refined(self, factor=2):
        return QuadratureGrid(self.n_alpha * factor, self.n_u * factor,
                              self.n_gamma * factor)


@lru_cache(maxsize=64)
def _nodes(grid):
    alpha = 2 * np.pi * np.arange(grid.n_alpha) / grid.n_alpha
    gamma = 2 * np.pi * np.arange(grid.n_gamma) / grid.n_gamma
    u, wu = np.polynomial.legendre.leggauss(grid.n_u)
    ca, sa = np.cos(alpha), np.sin(alpha)
    cg, sg = np.cos(gamma), np.sin(gamma)
    cc = np.outer(ca, cg).ravel()
    ss = np.outer(sa, sg).ravel()
    # Haar weight: trapezoid steps (2pi/n each) times GL weight over 8 pi^2.
    w_ang = 1.0 / (2.0 * grid.n_alpha * grid.n_gamma)
    return cc, ss, u, wu * w_ang


def _check_order(order):
    order = tuple(int(a) for a in order)
    if len(order) != 3 or min(order) < 0 or sum(order) > 4:
        raise ValueError(f"derivative order must be 3 non-negative ints "
                         f"with total <= 4, got {order}")
    return order


def tetra_max(x):
    """Maximum of ``x . diag(Y)`` over SO(3).

    The diagonals of rotations fill the tetrahedron with vertices
    ``(1,1,1), (1,-1,-1), (-1,1,-1), (-1,-1,1)``, so the maximum is attained
    at one of them.  This equals the largest eigenvalue used by the gauge
    transform.
    """
    x1, x2, x3 = (float(v) for v in x)
    return max(x1 + x2 + x3, x1 - x2 - x3, -x1 + x2 - x3, -x1 - x2 + x3)


def scaled_moments(x, orders, grid=None, shift=0.0):
    """``E[prod y_ii^a_i * exp(x . diag(Y) - shift)]`` for each order.

    Returns an array with one entry per multi-index in ``orders``.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (3,) or not np.all(np.isfinite(x)):
        raise ValueError("x must be a finite 3-vector")
    orders = [_check_order(o) for o in orders]
    if grid is None:
        grid = QuadratureGrid.for_point(x)
    cc, ss, u, wu = _nodes(grid)
    m = cc.size
    per_chunk = max(1, _CHUNK_POINTS // m)
    acc = np.zeros(len(orders))
    for start in range(0, grid.n_u, per_chunk):
        uk = u[start:start + per_chunk, None]
        y11 = cc - uk * ss
        y22 = uk * cc - ss
        y33 = np.broadcast_to(uk, y11.shape)
        e = np.exp(x[0] * y11 + x[1] * y22 + x[2] * y33 - shift)
        e *= wu[start:start + per_chunk, None]
        for k, (a1, a2, a3) in enumerate(orders):
            f = e
            if a1:
                f = f * y11 ** a1
            if a2:
                f = f * y22 ** a2
            if a3:
                f = f * y33 ** a3
            acc[k] += f.sum()
    return acc


def _guard(x):
    if float(np.sum(np.abs(x))) > OVERFLOW_LIMIT:
        raise OverflowError("exp(x . diag(Y)) would overflow; use log-scale oracle")


def ctilde_deriv(x, order=(0, 0, 0), grid=None):
    """Partial derivative ``d^order c~(x)`` by direct quadrature."""
    _guard(x)
    return float(scaled_moments(x, [order], grid)[0])


_C_ORDERS = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
_HESS_ORDERS = [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]


def C_quad(x, grid=None):
    """The vector ``(c~, d1 c~, d2 c~, d3 c~)`` at ``x``."""
    _guard(x)
    return scaled_moments(x, _C_ORDERS, grid)


def C_quad_scaled(x, grid=None):
    """``(shift, C * exp(-shift))`` with ``shift`` the integrand maximum.

    Safe for any ``x`` the grid resolves; the scaled vector stays O(1).
    """
    shift = tetra_max(x)
    return shift, scaled_moments(x, _C_ORDERS, grid, shift=shift)


def hessian_quad(x, grid=None):
    """Second partials of ``c~`` as a symmetric 3x3 matrix."""
    _guard(x)
    h11, h12, h13, h22, h23, h33 = scaled_moments(x, _HESS_ORDERS, grid)
    return np.array([[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]])


def log_ctilde(x, grid=None):
    """``log c~(x)`` without overflow.

    The integrand is shifted by its maximum over SO(3) so it never exceeds 1.
    Accuracy requires the grid to resolve the concentrated integrand; the
    default grid grows linearly with ``|x|`` and gets slow past ``|x| ~ 200``.
    """
    shift = tetra_max(x)
    return shift + math.log(scaled_moments(x, [(0, 0, 0)], grid, shift=shift)[0])


def _plane_gap(x):
    x1, x2, x3 = x
    return min(abs(x1 - x2), abs(x1 + x2), abs(x1 - x3),
               abs(x1 + x3), abs(x2 - x3), abs(x2 + x3))


def annihilator_residual(x, grid=None, min_distance=0.05):
    """Residuals of the six annihilating operators applied to ``c~``.

    Order: ``H1, H2, H3, L12, L13, L23``, each divided by ``c~(x)``.  ``H_i``
    is the second-order Muirhead-type operator::

        d_i^2 - 1 + sum_{j != i} (x_i d_i - x_j d_j) / (x_i^2 - x_j^2)

    and for ``i < j`` with ``k`` the remaining index::

        L_ij = (x_i^2 - x_j^2) d_i d_j - (x_j d_i - x_i d_j) - (x_i^2 - x_j^2) d_k
    """
    x = np.asarray(x, dtype=float)
    if _plane_gap(x) <= min_distance:
        raise SingularLocusError(
            f"x = {x.tolist()} is within {min_distance} of the singular locus")
    _guard(x)
    shift = tetra_max(x)
    vals = scaled_moments(x, _C_ORDERS + _HESS_ORDERS, grid, shift=shift)
    c = vals[0]
    d = vals[1:4]
    h11, h12, h13, h22, h23, h33 = vals[4:]
    hess = np.array([[h11, h12, h13], [h12, h22, h23], [h13, h23, h33]])
    out = []
    for i in range(3):
        r = hess[i, i] - c
        for j in range(3):
            if j != i:
                r += (x[i] * d[i] - x[j] * d[j]) / (x[i] ** 2 - x[j] ** 2)
        out.append(r)
    for i, j, k in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
        q = x[i] ** 2 - x[j] ** 2
        out.append(q * hess[i, j] - (x[j] * d[i] - x[i] * d[j]) - q * d[k])
    return np.array(out) / c
