"""Rotation data: validation, sufficient statistics and samplers.

A sample of rotations is stored as a float array of shape ``(n, 3, 3)``.
Quaternions are scalar-first ``(w, x, y, z)`` and map to right-handed
rotation matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ROTATION_TOL = 1e-10

# Rejection sampler draws this many Haar proposals per round; fixed so that
# a given seed always consumes the generator identically.
_PROPOSAL_BATCH = 1 << 16


@dataclass(frozen=True)
class SufficientStats:
    """Signed SVD of a sample mean: ``mean = q @ diag(g) @ r``."""

    q: np.ndarray
    g: np.ndarray
    r: np.ndarray
    n: int = 0

    def mean(self):
        return self.q @ np.diag(self.g) @ self.r


def is_rotation(m, tol=ROTATION_TOL):
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3) or not np.all(np.isfinite(m)):
        return False
    ortho = np.linalg.norm(m.T @ m - np.eye(3))
    return bool(ortho <= tol and abs(np.linalg.det(m) - 1.0) <= tol)


def as_rotations(samples):
    """Coerce ``samples`` to an ``(n, 3, 3)`` array, checking every entry."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1:] != (3, 3):
        raise ValueError(f"expected an (n, 3, 3) array, got shape {arr.shape}")
    for k, m in enumerate(arr):
        if not is_rotation(m):
            raise ValueError(f"sample {k} is not a rotation matrix")
    return arr


def sample_mean(samples):
    """Entrywise mean of a rotation sample.

    Each entry is summed with ``math.fsum`` so the result does not depend on
    the sample order or on BLAS blocking.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 2 and arr.shape == (3, 3):
        arr = arr[None]
    if arr.size == 0 or len(arr) == 0:
        raise ValueError("empty sample")
    n = len(arr)
    flat = arr.reshape(n, 9)
    return np.array([math.fsum(flat[:, k]) / n for k in range(9)]).reshape(3, 3)


def signed_svd(m, n=0):
    """Sign-preserving SVD ``m = q @ diag(g) @ r`` with ``q, r`` in SO(3).

    ``|g[0]| >= g[1] >= g[2] >= 0`` and the sign of ``det(m)`` is carried by
    ``g[0]``.  When singular values tie the order returned by LAPACK is kept.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    u, s, vt = np.linalg.svd(m)
    u = u.copy()
    vt = vt.copy()
    s = s.copy()
    if np.linalg.det(u) < 0:
        u[:, 0] = -u[:, 0]
        s[0] = -s[0]
    if np.linalg.det(vt) < 0:
        vt[0, :] = -vt[0, :]
        s[0] = -s[0]
    return SufficientStats(q=u, g=s, r=vt, n=n)


def sufficient_stats(samples):
    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 2:
        arr = arr[None]
    return signed_svd(sample_mean(arr), n=len(arr))


def reconstruct_theta(stats, x):
    """Parameter matrix ``Q diag(x) R`` for diagonal coordinates ``x``."""
    return stats.q @ np.diag(np.asarray(x, dtype=float)) @ stats.r


def quaternion_to_matrix(q):
    """Rotation matrices from scalar-first unit quaternions, shape ``(n, 4)``.

    A single quaternion of shape ``(4,)`` gives a single ``(3, 3)`` matrix.
    """
    q = np.asarray(q, dtype=float)
    single = q.ndim == 1
    q = np.atleast_2d(q)
    w, x, y, z = q.T
    m = np.empty((len(q), 3, 3))
    m[:, 0, 0] = 1 - 2 * (y * y + z * z)
    m[:, 0, 1] = 2 * (x * y - z * w)
    m[:, 0, 2] = 2 * (x * z + y * w)
    m[:, 1, 0] = 2 * (x * y + z * w)
    m[:, 1, 1] = 1 - 2 * (x * x + z * z)
    m[:, 1, 2] = 2 * (y * z - x * w)
    m[:, 2, 0] = 2 * (x * z - y * w)
    m[:, 2, 1] = 2 * (y * z + x * w)
    m[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return m[0] if single else m


def _haar_batch(rng, n):
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    return quaternion_to_matrix(q)


def haar_sample(seed, n):
    """``n`` Haar-uniform rotations, deterministic in ``seed``."""
    if n < 0:
        raise ValueError("n must be non-negative")
    rng = np.random.default_rng(seed)
    if n == 0:
        return np.empty((0, 3, 3))
    return _haar_batch(rng, n)


def fisher_sample(theta, seed, n):
    """Draw ``n`` rotations from the Fisher density ``exp(tr(theta.T @ Y))``.

    Rejection from Haar proposals with envelope ``exp(sum |x_i|)``, where
    ``x`` are the signed singular values of ``theta``.  The acceptance rate
    is ``c(theta) / exp(sum |x_i|)`` and decays roughly like
    ``|x|**(-3/2)`` for concentrated parameters, so large ``theta`` is slow.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    theta = np.asarray(theta, dtype=float)
    bound = float(np.sum(np.abs(signed_svd(theta).g)))
    rng = np.random.default_rng(seed)
    accepted = []
    count = 0
    while count < n:
        ys = _haar_batch(rng, _PROPOSAL_BATCH)
        log_ratio = np.einsum("ij,kij->k", theta, ys) - bound
        keep = rng.random(_PROPOSAL_BATCH) < np.exp(np.minimum(log_ratio, 0.0))
        if keep.any():
            accepted.append(ys[keep])
            count += int(keep.sum())
    if not accepted:
        return np.empty((0, 3, 3))
    return np.concatenate(accepted)[:n]


def rotation_from_vector_pair(v1, v2):
    """Right-handed frame with first column along ``v1``.

    The second column is ``v2`` with its ``v1`` component removed; the third
    is the cross product of the first two.
    """
    a = np.asarray(v1, dtype=float)
    b = np.asarray(v2, dtype=float)
    na = np.linalg.norm(a)
    if na == 0 or not np.isfinite(na):
        raise ValueError("degenerate frame")
    e1 = a / na
    b = b - (e1 @ b) * e1
    nb = np.linalg.norm(b)
    if nb <= 1e-12 * max(1.0, np.linalg.norm(v2)):
        raise ValueError("degenerate frame")
    e2 = b / nb
    return np.column_stack([e1, e2, np.cross(e1, e2)])


def matrix_to_quaternion(m):
    """Scalar-first unit quaternions (``w >= 0``) for rotations of shape ``(n, 3, 3)``."""
    m = np.asarray(m, dtype=float)
    single = m.ndim == 2
    m = m.reshape(-1, 3, 3)
    out = np.empty((len(m), 4))
    for k, r in enumerate(m):
        tr = r[0, 0] + r[1, 1] + r[2, 2]
        # Branch on the largest of (w, x, y, z) for a well-conditioned square root.
        i = int(np.argmax([tr, r[0, 0], r[1, 1], r[2, 2]]))
        if i == 0:
            s = 2.0 * math.sqrt(1.0 + tr)
            q = [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        elif i == 1:
            s = 2.0 * math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2])
            q = [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
        elif i == 2:
            s = 2.0 * math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2])
            q = [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
        else:
            s = 2.0 * math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1])
            q = [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
        q = np.array(q)
        out[k] = -q if q[0] < 0 else q
    return out[0] if single else out


def project_to_rotation(m):
    """Nearest rotation in Frobenius norm (polar factor with det fixed to +1)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt
