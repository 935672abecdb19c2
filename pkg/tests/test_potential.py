"""Tube potentials: chart geometry, support, on-orbit Hessian identity."""

import numpy as np
import pytest

from toruslab import (BumpProfile, PerturbationParams, TubeChart,
                      TubeChartError, build_potential, extract_curvature)
from toruslab.potential import perturbed_curvature

from conftest import C


def _field(orbit, n_params=None, seed=0, eps=0.2, t0=0.45):
    frame = orbit.segment_frame(t0)
    prof = BumpProfile(t0=t0, tau=t0 / 4, lam=t0 / 8, ramp=t0 / 16,
                       eps=eps, n=1)
    rng = np.random.default_rng(seed)
    params = PerturbationParams.random(1, rng, scale=0.5)
    return build_potential(prof, params, frame), prof, params, frame


def test_chart_round_trip(hyp_orbit, pendulum):
    frame = hyp_orbit.segment_frame(0.45)
    chart = TubeChart(pendulum, frame, 0.45, 0.2)
    rng = np.random.default_rng(4)
    for _ in range(10):
        t = rng.uniform(0.0, 0.45)
        xp = rng.uniform(-0.05, 0.05, 1)
        X = chart.embed(t, xp)
        t2, xp2 = chart.coords(X)
        assert abs(t2 - t) < 1e-10
        np.testing.assert_allclose(xp2, xp, atol=1e-10)


def test_chart_rejects_curved_segment(pendulum):
    from toruslab import PhaseState, integrate_linearized
    from toruslab.frames import adapted_frame

    s = PhaseState([0.2, 0.1], [0.4, np.sqrt(2 * (C - 0.05))], "tangent")
    lin = integrate_linearized(pendulum, pendulum.to_cotangent(s), 0.5)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        frame = adapted_frame(pendulum, lin)
        with pytest.raises(TubeChartError):
            TubeChart(pendulum, frame, 0.5, 0.2)


def test_chart_rejects_wide_tube(hyp_orbit, pendulum):
    frame = hyp_orbit.segment_frame(0.45)
    with pytest.raises(TubeChartError, match="unit cell|too wide"):
        TubeChart(pendulum, frame, 0.45, 1.5)


def test_field_vanishes_on_orbit_and_outside(hyp_orbit):
    field, prof, params, frame = _field(hyp_orbit)
    lin = frame.lin
    # on the segment: value and gradient identically zero
    for t in np.linspace(0.0, prof.t0, 12):
        x, _ = lin.base_at(t)
        assert abs(field.value(x)) < 1e-14
        assert np.max(np.abs(field.grad(x))) < 1e-12
    # far from the tube: zero
    assert field.value(np.array([0.47, 0.9])) == 0.0
    assert np.all(field.hess(np.array([0.47, 0.9])) == 0.0)


def test_on_orbit_hessian_equals_beta(hyp_orbit):
    """The transverse Hessian on the segment equals the coefficient path."""
    field, prof, params, frame = _field(hyp_orbit)
    lin = frame.lin
    E = frame.E[0]
    for t in np.linspace(0.05, prof.t0 - 0.05, 9):
        x, _ = lin.base_at(t)
        H = field.hess(x)
        transverse = E.T @ H @ E
        B = prof.beta_path(params, np.array([t]))[0]
        np.testing.assert_allclose(transverse, B, atol=1e-9)


def test_ambient_gradient_matches_fd(hyp_orbit):
    field, prof, _, frame = _field(hyp_orbit)
    chart = field.chart
    X = chart.embed(prof.tau, np.array([0.04]))
    h = 1e-6
    g = field.grad(X)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (field.value(X + e) - field.value(X - e)) / (2 * h)
        assert abs(fd - g[j]) < 1e-7


def test_perturbed_curvature_shift(pendulum, hyp_orbit):
    field, prof, params, frame = _field(hyp_orbit)
    path = extract_curvature(pendulum, frame)
    newK = perturbed_curvature(path, field)
    ts = path.times
    B = prof.beta_path(params, ts)
    W = path.W
    expected = path.K + np.einsum("tji,tjk,tkl->til", W, B, W)
    np.testing.assert_allclose(newK.K, expected, atol=1e-8)


def test_chart_c2_norm_bounds_ambient(hyp_orbit):
    field, _, _, _ = _field(hyp_orbit)
    chart_norm = field.chart_c2_norm(t_grid=60, x_grid=7)
    ambient = field.ambient_c2_norm(t_grid=60, x_grid=7)
    assert chart_norm > 0 and ambient > 0
    # flat metric, orthonormal frame: the two norms agree to chart scaling
    assert ambient <= 4.0 * chart_norm
    assert chart_norm <= 4.0 * ambient


def test_integration_with_field_preserves_orbit(pendulum, hyp_orbit):
    """Adding the tube potential leaves the central orbit a solution."""
    from toruslab import LagrangianModel, integrate
    from toruslab.fields import SumPotential

    field, prof, _, frame = _field(hyp_orbit, seed=5)
    perturbed = LagrangianModel(
        pendulum.space, pendulum.metric, pendulum.one_form,
        SumPotential(pendulum.potential, field.as_field()))
    traj = integrate(perturbed, hyp_orbit.initial, horizon=prof.t0)
    base = frame.lin
    worst = 0.0
    for t in np.linspace(0.0, prof.t0, 20):
        x1 = traj.state_at(t).x
        x0, _ = base.base_at(t)
        worst = max(worst, float(np.max(np.abs(x1 - x0))))
    assert worst < 1e-9
