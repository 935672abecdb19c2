"""Window-system derivatives and Gauss-Newton target realization.

The derivative of the window transfer map is computed three independent
ways (variational integral, bump-concentrated quadrature, and central
differences); these must agree.  Realization is tested against targets
well inside the measured reachable radius of the elliptic orbit.
"""

import numpy as np
import pytest
from scipy.linalg import expm

from toruslab import (BudgetError, PerturbationParams, WindowKernel,
                      build_profile, extract_curvature,
                      reachable_radius_estimate, realize_target)
from toruslab.realize import directional_derivative_F
from toruslab.spnlib import random_sp_tangent


@pytest.fixture(scope="module")
def kernel_setup(pendulum, ell_orbit, pend_ledger):
    t0 = 2.0 * pend_ledger.k0
    frame = ell_orbit.segment_frame(t0)
    path = extract_curvature(pendulum, frame)
    practical = build_profile(pend_ledger, t0, path=path, kind="practical")
    certified = build_profile(pend_ledger, t0, path=path, kind="ledger")
    kern_p = WindowKernel(pendulum, frame, practical, path=path)
    kern_c = WindowKernel(pendulum, frame, certified, path=path)
    return frame, path, practical, certified, kern_p, kern_c


def _unit_dirs(n, count, seed):
    rng = np.random.default_rng(seed)
    dim = PerturbationParams.dim(n)
    out = []
    for _ in range(count):
        v = rng.normal(size=dim)
        out.append(v / np.linalg.norm(v))
    return out


def test_zero_direction_gives_zero(kernel_setup):
    _, _, _, _, kern_p, _ = kernel_setup
    Z = kern_p.derivative_direct(PerturbationParams.zeros(1))
    assert np.max(np.abs(Z)) == 0.0


def test_fd_matches_direct_practical(pendulum, kernel_setup):
    frame, path, practical, _, kern_p, _ = kernel_setup
    worst = 0.0
    for v in _unit_dirs(1, 6, seed=7):
        xi = PerturbationParams.from_vector(v, 1)
        Zd = kern_p.derivative_direct(xi)
        Zf = kern_p.derivative_fd(xi)
        worst = max(worst, np.linalg.norm(Zf - Zd) / np.linalg.norm(Zd))
    # measured 1.6e-5 worst case; budget 10x for platform noise
    assert worst < 2e-4


def test_ibp_matches_direct_certified(kernel_setup):
    """The bump-window quadrature identity, on the narrow certified bump."""
    _, _, _, _, _, kern_c = kernel_setup
    worst = 0.0
    for v in _unit_dirs(1, 8, seed=11):
        xi = PerturbationParams.from_vector(v, 1)
        Zd = kern_c.derivative_direct(xi)
        Zi = kern_c.derivative_ibp(xi)
        worst = max(worst, np.linalg.norm(Zi - Zd) / np.linalg.norm(Zd))
    # measured 1.9e-8 worst case over 50 directions
    assert worst < 1e-6


def test_check_method_passes(pendulum, kernel_setup):
    frame, path, practical, _, kern_p, _ = kernel_setup
    xi = PerturbationParams.from_vector(_unit_dirs(1, 1, seed=3)[0], 1)
    Z = directional_derivative_F(pendulum, frame, practical, None, xi,
                                 method="check", kernel=kern_p)
    assert np.linalg.norm(Z) > 1.0   # far from degenerate


def test_derivative_floor_dominates_k6(kernel_setup, pend_ledger):
    _, _, _, _, _, kern_c = kernel_setup
    floors = []
    for v in _unit_dirs(1, 16, seed=5):
        xi = PerturbationParams.from_vector(v, 1)
        floors.append(np.linalg.norm(kern_c.derivative_direct(xi), 2))
    assert min(floors) >= pend_ledger.k6


def test_jacobian_columns_match_directions(kernel_setup):
    _, _, _, _, kern_p, _ = kernel_setup
    F, J = kern_p.jacobian(PerturbationParams.zeros(1))
    assert F.shape == (2, 2)
    assert J.shape == (4, 3)
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        xi = PerturbationParams.from_vector(e, 1)
        Z = kern_p.derivative_direct(xi)
        np.testing.assert_allclose(J[:, j], Z.ravel(), atol=1e-12)


EPS_C2 = 1e5


def test_realize_small_target(pendulum, kernel_setup, pend_ledger):
    frame, path, practical, _, kern_p, _ = kernel_setup
    F0 = kern_p.transfer()
    rng = np.random.default_rng(21)
    U = random_sp_tangent(1, rng)
    U /= np.linalg.norm(U)
    r = 1e-3                       # well inside the measured radius 6.5e-3
    target = F0 @ expm(r * U)
    field, err = realize_target(pendulum, frame, target, EPS_C2,
                                ledger=pend_ledger, profile=practical,
                                path=path, kernel=kern_p)
    assert err < 1e-6
    rz = field.realization
    assert rz["c2_bound"] <= EPS_C2
    assert rz["orbit_residual"] < 1e-8
    assert rz["iterations"] <= 10


def test_budget_error_when_too_tight(pendulum, kernel_setup, pend_ledger):
    frame, path, practical, _, kern_p, _ = kernel_setup
    F0 = kern_p.transfer()
    rng = np.random.default_rng(22)
    U = random_sp_tangent(1, rng)
    target = F0 @ expm(1e-3 * U / np.linalg.norm(U))
    with pytest.raises(BudgetError):
        realize_target(pendulum, frame, target, 1.0,
                       ledger=pend_ledger, profile=practical,
                       path=path, kernel=kern_p)


def test_reachable_radius_zero_budget(pendulum, kernel_setup, pend_ledger):
    frame, path, _, _, _, _ = kernel_setup
    r = reachable_radius_estimate(pendulum, frame, 0.0, trials=2,
                                  ledger=pend_ledger, kind="practical",
                                  path=path)
    assert r == 0.0


def test_identity_target_trivial(pendulum, kernel_setup, pend_ledger):
    """F(0) itself must be realized at w = 0 with zero error."""
    frame, path, practical, _, kern_p, _ = kernel_setup
    F0 = kern_p.transfer()
    field, err = realize_target(pendulum, frame, F0, EPS_C2,
                                ledger=pend_ledger, profile=practical,
                                path=path, kernel=kern_p)
    assert err < 1e-10
    assert np.linalg.norm(field.realization["w"]) < 1e-8
