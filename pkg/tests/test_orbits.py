"""Closed orbits of the cosine well: periods, traces, classification.

The two relative equilibria have closed-form Floquet data (see conftest),
giving exact targets for the shooting solver and the spectral classifier.
"""

import numpy as np
import pytest

from toruslab import (PhaseState, build_preset, classify_spectrum,
                      find_closed_orbit_action, find_closed_orbit_shooting,
                      is_4_elementary)

from conftest import C, K_ELL, K_HYP, T_ELL, T_HYP, TRACE_ELL, TRACE_HYP


def test_hyperbolic_equilibrium_oracle(hyp_orbit):
    assert abs(hyp_orbit.period - T_HYP) < 1e-10
    assert abs(np.trace(hyp_orbit.dP) - TRACE_HYP) < 1e-6
    assert hyp_orbit.spectral.kind == "hyperbolic"
    assert hyp_orbit.residual < 1e-10
    assert not hyp_orbit.degenerate


def test_elliptic_equilibrium_oracle(ell_orbit):
    assert abs(ell_orbit.period - T_ELL) < 1e-10
    assert abs(np.trace(ell_orbit.dP) - TRACE_ELL) < 1e-6
    assert ell_orbit.spectral.kind == "q-elliptic"
    assert ell_orbit.spectral.q == 1
    assert str(ell_orbit.spectral) == "1-elliptic"


def test_eigenvalue_reciprocal_symmetry(hyp_orbit, ell_orbit):
    for orb in (hyp_orbit, ell_orbit):
        lam = np.linalg.eigvals(orb.dP)
        for z in lam:
            # symplectic spectrum closed under z -> 1/z
            assert min(abs(lam - 1.0 / z)) < 1e-6


def test_monodromy_trace_trichotomy():
    def mat(tr):
        return np.array([[tr / 2, (tr / 2) ** 2 - 1.0], [1.0, tr / 2]])

    assert classify_spectrum(mat(3.0)).kind == "hyperbolic"
    assert classify_spectrum(mat(-3.0)).kind == "hyperbolic"
    assert classify_spectrum(mat(1.2)).kind == "q-elliptic"
    assert classify_spectrum(mat(2.0)).kind == "parabolic"
    assert classify_spectrum(mat(-2.0)).kind == "parabolic"


def test_elliptic_rotation_angle(ell_orbit):
    # trace = 2 cos(2 pi theta)
    theta = np.atleast_1d(ell_orbit.spectral.angles)[0]
    assert abs(2.0 * np.cos(2.0 * np.pi * theta) - TRACE_ELL) < 1e-8


def test_shooting_matches_action_minimizer(pendulum, hyp_orbit):
    # the free-time action minimizer in class (0,1) is the orbit over the
    # potential maximum (smallest Maupertuis length), i.e. the hyperbolic one
    orb = find_closed_orbit_action(pendulum, C, winding=[0, 1])
    assert abs(orb.period - hyp_orbit.period) < 1e-6
    assert abs(np.trace(orb.dP) - np.trace(hyp_orbit.dP)) < 1e-6
    assert orb.spectral.kind == "hyperbolic"


def test_return_map_pipelines_agree(pendulum, hyp_orbit):
    from toruslab.orbits import linearized_poincare, section_return_map_fd

    A_var = np.asarray(getattr(linearized_poincare(pendulum, hyp_orbit),
                               "entries"))
    A_fd = np.asarray(section_return_map_fd(pendulum, hyp_orbit))
    scale = np.max(np.abs(A_var))
    assert np.max(np.abs(A_var - A_fd)) / scale < 1e-6


def test_initial_state_is_cotangent(hyp_orbit):
    assert hyp_orbit.initial.rep == "cotangent"
    # v = (0, sqrt(0.8)), flat metric: p equals v here
    np.testing.assert_allclose(hyp_orbit.initial.vec, [0.0, np.sqrt(0.8)],
                               atol=1e-9)


def test_free_torus_orbit_degenerate_family():
    model = build_preset("free-torus")
    seed = PhaseState([0.0, 0.0], [1.0, 0.0], "tangent")
    with pytest.warns(UserWarning, match="non-isolated"):
        orb = find_closed_orbit_shooting(model, C, seed, winding_hint=[1, 0])
    assert orb.degenerate
    assert orb.spectral.kind == "parabolic"
    assert abs(orb.period - 1.0) < 1e-10


def test_curvature_signs_via_monodromy(hyp_orbit, ell_orbit):
    # constant-K Hill monodromy: trace determined by K and the period
    mu = np.sqrt(-K_HYP)
    assert abs(np.trace(hyp_orbit.dP) - 2 * np.cosh(mu * T_HYP)) < 1e-6
    om = np.sqrt(K_ELL)
    assert abs(np.trace(ell_orbit.dP) - 2 * np.cos(om * T_ELL)) < 1e-6


def test_4_elementary_detection():
    def rot(theta):
        c, s = np.cos(2 * np.pi * theta), np.sin(2 * np.pi * theta)
        return np.array([[c, -s], [s, c]])

    generic = classify_spectrum(rot(0.2137))
    assert is_4_elementary(generic)
    # an exact root of unity is filed as parabolic, not weakly elliptic
    assert classify_spectrum(rot(1.0 / 3.0)).kind == "parabolic"
    # a near-resonance fails the test at a tolerance covering its distance
    near_quarter = classify_spectrum(rot(0.25 + 1e-4))
    assert near_quarter.kind == "q-elliptic"
    assert not is_4_elementary(near_quarter, tol=1e-3)
    assert is_4_elementary(near_quarter, tol=1e-7)


def test_segment_frame_horizon(ell_orbit):
    frame = ell_orbit.segment_frame(0.3)
    assert abs(frame.horizon - 0.3) < 1e-12
    assert frame.frame_defect < 1e-8
