"""Adapted frames and curvature extraction.

On the relative equilibria of the cosine well the transverse Hill
curvature is constant and known in closed form, so the full
frame-plus-gauge pipeline can be checked end to end.
"""

import numpy as np

from toruslab import adapted_frame, extract_curvature
from toruslab.spnlib import symplectic_defect

from conftest import K_ELL, K_HYP


def test_frame_is_symplectic(hyp_orbit):
    frame = hyp_orbit.segment_frame(hyp_orbit.period)
    assert frame.frame_defect < 1e-8
    assert frame.is_gauge_clean


def test_constant_curvature_hyperbolic(pendulum, hyp_orbit):
    frame = hyp_orbit.segment_frame(hyp_orbit.period)
    path = extract_curvature(pendulum, frame)
    assert np.max(np.abs(path.K - K_HYP)) < 1e-6
    assert path.asym_residual < 1e-8


def test_constant_curvature_elliptic(pendulum, ell_orbit):
    frame = ell_orbit.segment_frame(ell_orbit.period)
    path = extract_curvature(pendulum, frame)
    assert np.max(np.abs(path.K - K_ELL)) < 1e-6


def test_hill_propagation_validates(pendulum, ell_orbit):
    frame = ell_orbit.segment_frame(ell_orbit.period)
    path = extract_curvature(pendulum, frame, validate=True)
    assert path.validation_error is not None
    assert path.validation_error < 1e-6


def test_reduced_transfer_symplectic(hyp_orbit):
    frame = hyp_orbit.segment_frame(0.4)
    X, defect = frame.reduced_transfer()
    assert defect < 1e-8
    np.testing.assert_allclose(X[0], np.eye(2), atol=1e-10)


def test_anchor_reduced_matches_monodromy_trace(hyp_orbit):
    frame = hyp_orbit.segment_frame(hyp_orbit.period)
    red = frame.anchor_reduced(hyp_orbit.period)
    # transverse block carries the nontrivial Floquet data
    assert abs(np.trace(red) - np.trace(hyp_orbit.dP)) < 1e-6
    assert symplectic_defect(red) < 1e-8


def test_curvature_spline_queries(pendulum, hyp_orbit):
    frame = hyp_orbit.segment_frame(0.5)
    path = extract_curvature(pendulum, frame)
    for t in (0.0, 0.123, 0.5):
        Kt = path.at(t)
        assert Kt.shape == (1, 1)
        assert abs(Kt[0, 0] - K_HYP) < 1e-6
    assert abs(path.sup_norm() - abs(K_HYP)) < 1e-5


def test_adapted_frame_direct_build(pendulum, ell_orbit):
    frame = adapted_frame(pendulum, ell_orbit.initial, horizon=0.3)
    assert frame.horizon == 0.3
    assert frame.n == 1
    # E columns are G-orthonormal and transverse to the velocity
    lin = frame.lin
    for k in (0, len(frame.times) // 2):
        x, _ = lin.base_at(frame.times[k])
        G = pendulum.metric.value(x)
        E = frame.E[k]
        np.testing.assert_allclose(E.T @ G @ E, np.eye(1), atol=1e-8)
