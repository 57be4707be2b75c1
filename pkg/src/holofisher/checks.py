"""Randomized numerical self-checks used by ``holofisher check``.

Every check returns a list of :class:`CheckResult`; nothing here raises on
a failed comparison.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import oracle
from .pfaffian import pfaffian_matrix, sing_distance
from .su2 import haar_su2, phi_residual, su2_normalizer

SUITES = ("pfaffian", "annihilators", "symmetry", "su2")

FLATNESS_TOL = 1e-6
CONSISTENCY_TOL = 1e-5
ANNIHILATOR_TOL = 1e-6
SYMMETRY_TOL = 1e-10
SU2_RESIDUAL_TOL = 1e-12


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float
    tol: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.suite}/{self.name}: {self.value:.3e} (tol {self.tol:.0e})"


def random_points(rng, count, min_distance, box=5.0):
    """Uniform points in ``[-box, box]^3`` at least ``min_distance`` off the planes."""
    out = []
    while len(out) < count:
        x = rng.uniform(-box, box, 3)
        if sing_distance(x) > min_distance:
            out.append(x)
    return out


def _richardson(fun, x, i, h):
    e = np.zeros(3)
    e[i] = 1.0

    def central(step):
        return (fun(x + step * e) - fun(x - step * e)) / (2 * step)

    return (4 * central(h / 2) - central(h)) / 3


def flatness_defect(x, h=1e-5):
    """Max-norm of ``d_j P_i + P_i P_j - d_i P_j - P_j P_i`` over all pairs."""
    mats = [pfaffian_matrix(i + 1, x) for i in range(3)]
    worst = 0.0
    for i, j in itertools.combinations(range(3), 2):
        dj_pi = _richardson(lambda y: pfaffian_matrix(i + 1, y), x, j, h)
        di_pj = _richardson(lambda y: pfaffian_matrix(j + 1, y), x, i, h)
        defect = dj_pi + mats[i] @ mats[j] - di_pj - mats[j] @ mats[i]
        worst = max(worst, float(np.max(np.abs(defect))))
    return worst


def connection_defect(x, h=1e-4):
    """Normwise relative gap between finite-difference ``d_i C`` and ``P_i C``."""
    c = oracle.C_quad(x)
    worst = 0.0
    for i in range(3):
        fd = _richardson(oracle.C_quad, x, i, h)
        pc = pfaffian_matrix(i + 1, x) @ c
        worst = max(worst, float(np.max(np.abs(fd - pc)) / np.max(np.abs(pc))))
    return worst


def symmetry_defect(x):
    """Largest relative change of ``c~`` under coordinate permutations and
    simultaneous sign flips of two coordinates."""
    base = oracle.ctilde_deriv(x)
    worst = 0.0
    for perm in itertools.permutations(range(3)):
        worst = max(worst, abs(oracle.ctilde_deriv(x[list(perm)]) - base) / base)
    for flip in ((-1, -1, 1), (-1, 1, -1), (1, -1, -1)):
        worst = max(worst, abs(oracle.ctilde_deriv(x * np.array(flip)) - base) / base)
    return worst


def su2_monte_carlo(theta, seed, n):
    """Haar Monte-Carlo mean of ``exp(tr(theta.T @ Y))`` and its standard error."""
    ys = haar_su2(seed, n)
    vals = np.exp(np.einsum("ij,kij->k", np.asarray(theta, dtype=complex), ys))
    se = complex(vals.real.std(ddof=1), vals.imag.std(ddof=1)) / np.sqrt(n)
    return complex(vals.mean()), se


def run_pfaffian(rng, trials):
    pts = random_points(rng, trials, 0.3)
    flat = max((flatness_defect(x) for x in pts), default=0.0)
    conn = max((connection_defect(x) for x in pts), default=0.0)
    return [CheckResult("pfaffian", "flatness", flat < FLATNESS_TOL, flat, FLATNESS_TOL),
            CheckResult("pfaffian", "dC=PC", conn < CONSISTENCY_TOL, conn, CONSISTENCY_TOL)]


def run_annihilators(rng, trials):
    pts = random_points(rng, trials, 0.1)
    worst = max((float(np.max(np.abs(oracle.annihilator_residual(x, min_distance=0.1))))
                 for x in pts), default=0.0)
    return [CheckResult("annihilators", "H1..H3,L12..L23", worst < ANNIHILATOR_TOL,
                        worst, ANNIHILATOR_TOL)]


def run_symmetry(rng, trials):
    pts = [rng.uniform(-5, 5, 3) for _ in range(trials)]
    worst = max((symmetry_defect(x) for x in pts), default=0.0)
    return [CheckResult("symmetry", "permutations+flips", worst < SYMMETRY_TOL,
                        worst, SYMMETRY_TOL)]


def run_su2(rng, trials, n_mc=100_000, z=4.0):
    """ODE residual on the unit disc plus Monte-Carlo agreement in ``z`` sigmas.

    The CLI default is 4 sigma so that 2 x 50 comparisons rarely fail by chance.
    """
    zs = rng.uniform(-1, 1, trials) + 1j * rng.uniform(-1, 1, trials)
    zs = np.where(np.abs(zs) <= 1, zs, zs / np.abs(zs))
    resid = max((abs(phi_residual(complex(z_))) for z_ in zs), default=0.0)
    worst_z = 0.0
    for _ in range(trials):
        theta = rng.uniform(-1, 1, (2, 2)) + 1j * rng.uniform(-1, 1, (2, 2))
        mean, se = su2_monte_carlo(theta, int(rng.integers(2**32)), n_mc)
        exact = complex(su2_normalizer(theta))
        worst_z = max(worst_z, abs((mean - exact).real) / se.real,
                      abs((mean - exact).imag) / se.imag)
    return [CheckResult("su2", "ode residual", resid < SU2_RESIDUAL_TOL, resid, SU2_RESIDUAL_TOL),
            CheckResult("su2", "monte-carlo sigmas", worst_z < z, worst_z, z)]


RUNNERS = {"pfaffian": run_pfaffian, "annihilators": run_annihilators,
           "symmetry": run_symmetry, "su2": run_su2}


def run(suite, trials=50, seed=0):
    suites = SUITES if suite == "all" else (suite,)
    rng = np.random.default_rng(seed)
    results = []
    for name in suites:
        results.extend(RUNNERS[name](rng, trials))
    return results
