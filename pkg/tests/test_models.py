"""Model layer: Legendre transform, field derivatives, torus geometry."""

import numpy as np
import pytest

from toruslab import (ConstantMetric, ConstantOneForm, LagrangianModel,
                      PhaseState, TorusSpace, TrigPotential, build_preset)
from toruslab.models import legendre

TONELLI = ["free-torus", "pendulum-torus", "two-wave", "magnetic", "skewed-free"]


@pytest.mark.parametrize("name", TONELLI)
def test_legendre_round_trip(name):
    model = build_preset(name)
    rng = np.random.default_rng(11)
    for _ in range(20):
        x = rng.uniform(0, 1, model.d)
        v = rng.normal(size=model.d)
        p = model.momentum(x, v)
        np.testing.assert_allclose(model.velocity(x, p), v, atol=1e-12)


@pytest.mark.parametrize("name", TONELLI)
def test_energy_equals_hamiltonian(name):
    model = build_preset(name)
    rng = np.random.default_rng(3)
    x = rng.uniform(0, 1, model.d)
    v = rng.normal(size=model.d)
    e = model.energy(x, v)
    h = model.hamiltonian(x, model.momentum(x, v))
    assert abs(e - h) < 1e-12


def test_legendre_state_round_trip():
    model = build_preset("magnetic")
    s = PhaseState([0.2, 0.7], [1.0, -0.4], "tangent")
    cot = legendre(model, s)
    assert cot.rep == "cotangent"
    back = legendre(model, cot)
    np.testing.assert_allclose(back.vec, s.vec, atol=1e-13)
    assert abs(model.state_energy(s) - model.state_energy(cot)) < 1e-12


def test_fenchel_gap_nonnegative_zero_at_legendre():
    model = build_preset("skewed-free")
    rng = np.random.default_rng(9)
    x = rng.uniform(0, 1, 2)
    v = rng.normal(size=2)
    p_star = model.momentum(x, v)
    assert abs(model.fenchel_gap(x, v, p_star)) < 1e-12
    assert model.fenchel_gap(x, v, p_star + [0.3, -0.2]) > 0


def test_batched_momentum_matches_loop():
    model = build_preset("magnetic")
    rng = np.random.default_rng(5)
    xs = rng.uniform(0, 1, (7, 2))
    vs = rng.normal(size=(7, 2))
    batch = model.momentum(xs, vs)
    for k in range(7):
        np.testing.assert_allclose(batch[k], model.momentum(xs[k], vs[k]),
                                   atol=1e-14)


def test_rest_energy_pendulum(pendulum):
    e0, x0 = pendulum.rest_energy()
    assert abs(e0 - 0.1) < 1e-9
    assert abs(pendulum.potential.value(x0) - e0) < 1e-12


def test_rest_energy_magnetic_zero():
    # a constant one-form is closed: it shifts momenta, not the rest energy
    model = build_preset("magnetic")
    e0, _ = model.rest_energy()
    assert abs(e0 - 0.0) < 1e-12


def test_trig_potential_derivatives_match_fd():
    pot = TrigPotential([(0.1, [1, 0], 0.0), (0.05, [1, 2], 0.3)])
    rng = np.random.default_rng(2)
    x = rng.uniform(0, 1, 2)
    h = 1e-6
    g = pot.grad(x)
    H = pot.hess(x)
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (pot.value(x + e) - pot.value(x - e)) / (2 * h)
        assert abs(fd - g[j]) < 1e-8
        fd_row = (pot.grad(x + e) - pot.grad(x - e)) / (2 * h)
        np.testing.assert_allclose(fd_row, H[:, j], atol=1e-7)


def test_one_form_shifts_momentum():
    G = ConstantMetric(np.eye(2))
    A = ConstantOneForm([0.0, 0.05])
    model = LagrangianModel(TorusSpace(2), G, A, TrigPotential([]))
    p = model.momentum(np.array([0.2, 0.7]), np.array([1.0, 1.0]))
    np.testing.assert_allclose(p, [1.0, 1.05], atol=1e-14)


def test_torus_wrap_and_diff():
    space = TorusSpace(2)
    np.testing.assert_allclose(space.wrap([1.25, -0.25]), [0.25, 0.75])
    d = space.diff(np.array([0.9, 0.1]), np.array([0.1, 0.9]))
    np.testing.assert_allclose(np.abs(d), [0.2, 0.2], atol=1e-14)
    assert space.n == 1


def test_skewed_metric_not_identity():
    model = build_preset("skewed-free")
    G = model.metric.value(np.zeros(2))
    assert model.metric.is_constant
    assert abs(G[0, 1]) > 0
    assert np.all(np.linalg.eigvalsh(G) > 0)
