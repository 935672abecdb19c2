"""Bump/window profiles: supports, masses, exact derivative recurrences."""

import numpy as np
import pytest

from toruslab import BumpProfile, PerturbationParams
from toruslab.profiles import (DeltaBump, PlateauWindow, mollifier_derivs,
                               mollifier_mass)


def test_mollifier_derivatives_match_fd():
    ys = np.array([-0.7, -0.2, 0.0, 0.35, 0.81])
    h = 1e-7
    f = mollifier_derivs(ys, order=3)
    for k in range(3):
        fd = (mollifier_derivs(ys + h, order=k)[k]
              - mollifier_derivs(ys - h, order=k)[k]) / (2 * h)
        np.testing.assert_allclose(fd, f[k + 1], rtol=1e-5, atol=1e-8)


def test_mollifier_vanishes_outside():
    out = mollifier_derivs(np.array([-1.0, 1.0, 1.5, -2.0]), order=5)
    assert np.all(out == 0.0)


def test_delta_bump_unit_mass_any_width():
    for lam in (0.1, 1e-2, 1e-3):
        bump = DeltaBump(0.5, lam)
        assert abs(bump.mass() - 1.0) < 1e-12
        lo, hi = bump.support
        assert abs((hi - lo) - 2 * lam) < 1e-15


def test_delta_bump_c0_norm_scales():
    # k-th derivative sup grows like lam^-(k+1) under rescaling
    n0 = DeltaBump(0.5, 0.1).c0_norm(0)
    n0_half = DeltaBump(0.5, 0.05).c0_norm(0)
    assert abs(n0_half / n0 - 2.0) < 1e-9
    n2 = DeltaBump(0.5, 0.1).c0_norm(2)
    n2_half = DeltaBump(0.5, 0.05).c0_norm(2)
    assert abs(n2_half / n2 - 8.0) < 1e-9


def test_plateau_window_shape():
    w = PlateauWindow(1.0, 0.1)
    h = w.derivs(np.array([-0.5, 0.05, 0.5, 0.95, 1.5]))[0]
    assert h[0] == 0.0 and h[4] == 0.0
    assert abs(h[2] - 1.0) < 1e-12
    assert 0.0 < h[1] < 1.0 and 0.0 < h[3] < 1.0


def test_plateau_exclusions_zero_the_window():
    w = PlateauWindow(1.0, 0.05, exclusions=[(0.4, 0.5)])
    h = w.derivs(np.array([0.45, 0.2, 0.7]))[0]
    assert h[0] == 0.0
    assert abs(h[1] - 1.0) < 1e-12
    assert abs(h[2] - 1.0) < 1e-12


def _profile():
    return BumpProfile(t0=1.0, tau=0.25, lam=0.05, ramp=0.02, eps=0.3, n=2)


def test_beta_derivs_match_fd():
    prof = _profile()
    rng = np.random.default_rng(0)
    params = PerturbationParams.random(2, rng)
    s = np.linspace(0.18, 0.32, 9)
    vals = prof.beta_derivs(params, s, order=2)
    h = 1e-7
    for order in (0, 1):
        plus = prof.beta_derivs(params, s + h, order=order)[order]
        minus = prof.beta_derivs(params, s - h, order=order)[order]
        fd = (plus - minus) / (2 * h)
        scale = max(1.0, np.max(np.abs(vals[order + 1])))
        assert np.max(np.abs(fd - vals[order + 1])) / scale < 1e-4


def test_beta_path_supported_in_bump():
    prof = _profile()
    rng = np.random.default_rng(1)
    params = PerturbationParams.random(2, rng)
    lo, hi = prof.delta.support
    outside = np.array([lo - 1e-6, hi + 1e-6, 0.0, prof.t0])
    B = prof.beta_path(params, outside)
    assert np.all(B == 0.0)
    inside = prof.beta_path(params, np.array([prof.tau]))
    assert np.max(np.abs(inside)) > 0.0


def test_beta_symmetric():
    prof = _profile()
    rng = np.random.default_rng(2)
    params = PerturbationParams.random(2, rng)
    s = np.linspace(0.2, 0.3, 7)
    B = prof.beta_path(params, s)
    np.testing.assert_allclose(B, np.swapaxes(B, 1, 2), atol=1e-12)


def test_profile_validation_rejects_bad_geometry():
    with pytest.raises(ValueError):
        BumpProfile(t0=1.0, tau=0.03, lam=0.05, ramp=0.01, eps=0.3, n=1)
    with pytest.raises(ValueError):
        BumpProfile(t0=1.0, tau=0.5, lam=0.05, ramp=0.02, eps=-1.0, n=1)
    with pytest.raises(ValueError):
        # exclusion overlapping the bump support
        BumpProfile(t0=1.0, tau=0.5, lam=0.05, ramp=0.02, eps=0.3, n=1,
                    exclusions=[(0.5, 0.6)])


def test_c_norms_report():
    prof = _profile()
    rng = np.random.default_rng(3)
    params = PerturbationParams.random(2, rng)
    norms = prof.beta_c_norms(params)
    assert len(norms) == 3
    assert all(v >= 0 for v in norms)
    # C0 norm agrees with a dense scan of the path itself
    s = np.linspace(0.0, prof.t0, 4001)
    c0 = np.max(np.linalg.norm(prof.beta_path(params, s), ord=2, axis=(1, 2)))
    assert c0 <= norms[0] * (1 + 1e-6)
