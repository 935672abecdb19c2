"""Eigenvalue-gap genericity functionals for curvature paths.

h_n measures how separated the spectrum of a symmetric matrix is; the
level functional takes, for each sampled orbit on an energy level, the
best h_n value seen along a short curvature segment, and then the worst
case over the sample.  A positive estimate certifies (empirically) that
every sampled orbit passes through a moment of simple transverse spectrum,
which is what the perturbation solver needs.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import models
from .fields import SumPotential
from .flow import injectivity_time, integrate_linearized, sample_energy_level
from .frames import FrameQualityWarning, adapted_frame, extract_curvature


def h_n(A):
    """Product of squared eigenvalue gaps; identically 1 for n = 1."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    if n == 1:
        return 1.0
    lam = np.linalg.eigvalsh(0.5 * (A + A.T))
    out = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            out *= (lam[i] - lam[j]) ** 2
    return float(out)


@dataclass
class PhiEstimate:
    value: float
    witness: object          # the sampled state achieving the minimum
    samples: int
    failures: int
    k0: float


def phi_n_estimate(model, c, theta_samples=12, t_grid=48, k0=None, seed=0,
                   tol=1e-10, max_failure_fraction=0.10):
    """Sampled lower functional: min over orbits of max_t h_n(K(t)).

    Scans theta_samples random states on the energy level, extracts the
    curvature path on [0, k0/2] for each, and records the best gap
    functional along it; returns the worst case over the sample (an upper
    estimate of the true level infimum, since only finitely many orbits
    are seen).  n = 1 returns 1 exactly without integrating.
    """
    n = model.space.n
    if k0 is None:
        k0 = injectivity_time(model, c, seed=seed)[1]
    if n == 1:
        return PhiEstimate(value=1.0, witness=None, samples=0, failures=0,
                           k0=float(k0))
    rng = np.random.default_rng(seed)
    states = sample_energy_level(model, c, theta_samples, rng)
    horizon = 0.5 * k0
    best = np.inf
    witness = None
    failures = 0
    for s in states:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", FrameQualityWarning)
                lin = integrate_linearized(model, s, horizon, tol=tol)
                frame = adapted_frame(model, lin, n_grid=400)
                path = extract_curvature(model, frame)
            tt = np.linspace(0.0, horizon, t_grid)
            val = max(h_n(path.at(t)) for t in tt)
        except (RuntimeError, np.linalg.LinAlgError):
            failures += 1
            continue
        if val < best:
            best, witness = val, s
    if failures > max_failure_fraction * len(states):
        raise RuntimeError("curvature extraction failed on %d of %d samples"
                           % (failures, len(states)))
    if not np.isfinite(best):
        raise RuntimeError("no usable samples for the gap functional")
    return PhiEstimate(value=float(best), witness=witness,
                       samples=len(states), failures=failures, k0=float(k0))


def genericity_test(model, u=None, c=0.5, threshold=1e-8, **budget):
    """True iff the sampled gap functional of the (perturbed) model exceeds
    the threshold.  u, when given, is an extra potential added to the model
    (the perturbed Lagrangian subtracts u, so the Hamiltonian gains it)."""
    if u is not None:
        model = models.LagrangianModel(
            model.space, metric=model.metric,
            one_form=model.one_form,
            potential=SumPotential(model.potential, u),
            name=model.name + "+u")
    est = phi_n_estimate(model, c, **budget)
    return bool(est.value > threshold)
