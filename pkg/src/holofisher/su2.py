"""Closed-form Fisher normalizer on SU(2).

For the standard representation the normalizing constant depends on the
parameter only through its determinant, ``c(theta) = phi(det theta)``, where
``phi`` is the entire solution of ``x phi'' + 2 phi' - phi = 0`` with
``phi(0) = 1``::

    phi(x) = sum_n x**n / (n! (n+1)!)

The pairing is the complex-bilinear ``tr(theta.T @ Y)``, so complex
parameters give complex values.
"""

from __future__ import annotations

import numpy as np

MIN_TERMS = 10


def _auto_terms(x):
    """Smallest N >= 10 whose tail term is below 1e-16 of the partial sum."""
    r = abs(x)
    term, total = 1.0, 1.0
    n = 0
    while True:
        term *= r / ((n + 1) * (n + 2))
        n += 1
        total += term
        if n >= MIN_TERMS and term < 1e-17 * total:
            return n + 1


def phi(x, n_terms=None, deriv=0):
    """``phi`` (or its ``deriv``-th derivative) by truncated series.

    Terms follow ``t_{n+1} = t_n x / ((n+1)(n+2))``; ``deriv`` differentiates
    the series term by term.
    """
    n_terms = n_terms or _auto_terms(x)
    if n_terms < MIN_TERMS:
        raise ValueError(f"need at least {MIN_TERMS} terms")
    coeffs = [1.0]
    for n in range(n_terms - 1):
        coeffs.append(coeffs[-1] / ((n + 1) * (n + 2)))
    for _ in range(deriv):
        coeffs = [k * c for k, c in enumerate(coeffs)][1:]
    # Horner from the highest power keeps the reverse-order summation.
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def phi_residual(x, n_terms=None):
    """``x phi'' + 2 phi' - phi`` at ``x``."""
    n = n_terms or _auto_terms(x) + 2
    return x * phi(x, n, 2) + 2 * phi(x, n, 1) - phi(x, n)


def su2_normalizer(theta):
    theta = np.asarray(theta, dtype=complex)
    if theta.shape != (2, 2):
        raise ValueError("theta must be 2x2")
    det = theta[0, 0] * theta[1, 1] - theta[0, 1] * theta[1, 0]
    if not theta.imag.any():
        return phi(float(det.real))
    return phi(complex(det))


def haar_su2(seed, n):
    """``n`` Haar-uniform SU(2) matrices ``[[a, b], [-conj(b), conj(a)]]``."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a = q[:, 0] + 1j * q[:, 1]
    b = q[:, 2] + 1j * q[:, 3]
    out = np.empty((n, 2, 2), dtype=complex)
    out[:, 0, 0] = a
    out[:, 0, 1] = b
    out[:, 1, 0] = -np.conj(b)
    out[:, 1, 1] = np.conj(a)
    return out
