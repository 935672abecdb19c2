"""Shared fixtures.

The constants ledger and the closed orbits of the cosine-well model are
expensive and deterministic, so they are built once per session.  The
well model (d=2, eps=0.1, level c=0.5) has closed-form relative
equilibria used as ground truth throughout:

    hyperbolic   x=(0,0),   v=(0, sqrt(0.8)),  T = 1/sqrt(0.8)
    elliptic     x=(.5,0),  v=(0, sqrt(1.2)),  T = 1/sqrt(1.2)

with transverse Hill curvature K = -/+ (2 pi)^2 eps and monodromy trace
2cosh / 2cos of 2 pi sqrt(eps / (2(c -/+ eps))).
"""

import numpy as np
import pytest

from toruslab import (PhaseState, build_preset, estimate_constants,
                      find_closed_orbit_shooting, orbit_seed_states)

EPS = 0.1
C = 0.5
MU = 2.0 * np.pi * np.sqrt(EPS)                      # sqrt(|K|)
T_HYP = 1.0 / np.sqrt(2.0 * (C - EPS))
T_ELL = 1.0 / np.sqrt(2.0 * (C + EPS))
TRACE_HYP = 2.0 * np.cosh(2.0 * np.pi * np.sqrt(EPS / (2.0 * (C - EPS))))
TRACE_ELL = 2.0 * np.cos(2.0 * np.pi * np.sqrt(EPS / (2.0 * (C + EPS))))
K_HYP = -(2.0 * np.pi) ** 2 * EPS
K_ELL = +(2.0 * np.pi) ** 2 * EPS


@pytest.fixture(scope="session")
def pendulum():
    return build_preset("pendulum-torus")


@pytest.fixture(scope="session")
def hyp_orbit(pendulum):
    seed = PhaseState([0.0, 0.0], [0.0, np.sqrt(2.0 * (C - EPS))])
    return find_closed_orbit_shooting(pendulum, C, seed, winding_hint=[0, 1])


@pytest.fixture(scope="session")
def ell_orbit(pendulum):
    seed = PhaseState([0.5, 0.0], [0.0, np.sqrt(2.0 * (C + EPS))])
    return find_closed_orbit_shooting(pendulum, C, seed, winding_hint=[0, 1])


@pytest.fixture(scope="session")
def pend_ledger(pendulum):
    return estimate_constants(pendulum, C, seed=0,
                              extra_states=orbit_seed_states(pendulum, C))
