"""Flow integration: energy conservation, symplectic linearization."""

import numpy as np
import pytest

from toruslab import (PhaseState, build_preset, integrate,
                      integrate_linearized, sample_energy_level)
from toruslab.spnlib import standard_J, symplectic_defect

from conftest import C


def test_energy_conservation(pendulum):
    rng = np.random.default_rng(0)
    for s in sample_energy_level(pendulum, C, 4, rng):
        traj = integrate(pendulum, s, horizon=5.0)
        assert traj.energy_drift < 1e-8


def test_sampled_states_on_level(pendulum):
    rng = np.random.default_rng(1)
    for s in sample_energy_level(pendulum, C, 10, rng):
        assert s.rep == "tangent"
        assert abs(pendulum.state_energy(s) - C) < 1e-12


def test_propagator_is_symplectic(pendulum):
    rng = np.random.default_rng(2)
    J = standard_J(pendulum.d)
    for s in sample_energy_level(pendulum, C, 3, rng):
        lin = integrate_linearized(pendulum, s, horizon=2.0)
        for t in (0.5, 1.3, 2.0):
            M = lin.propagator_at(t)
            assert np.max(np.abs(M.T @ J @ M - J)) < 1e-8
            assert lin.symplectic_defect_at(t) < 1e-8


def test_monodromy_is_array_attribute(pendulum):
    s = PhaseState([0.0, 0.0], [0.0, np.sqrt(0.8)], "tangent")
    lin = integrate_linearized(pendulum, s, horizon=1.0)
    M = lin.monodromy
    assert isinstance(M, np.ndarray)
    assert M.shape == (4, 4)


def test_propagator_matches_flow_fd(pendulum):
    """Variational solution == finite difference of the flow map."""
    s = PhaseState([0.1, 0.2], [0.3, np.sqrt(0.8)], "tangent")
    cot = pendulum.to_cotangent(s)
    T = 0.8
    lin = integrate_linearized(pendulum, cot, horizon=T)
    M = lin.propagator_at(T)
    z0 = np.concatenate([cot.x, cot.vec])
    h = 1e-6
    for j in range(4):
        dz = np.zeros(4)
        dz[j] = h
        outs = []
        for sgn in (+1, -1):
            z = z0 + sgn * dz
            st = PhaseState(z[:2], z[2:], "cotangent")
            tr = integrate(pendulum, st, horizon=T)
            zT = tr.state_at(T)
            outs.append(np.concatenate([zT.x, zT.vec]))
        col = (outs[0] - outs[1]) / (2 * h)
        np.testing.assert_allclose(col, M[:, j], atol=5e-6)


def test_trajectory_state_query(pendulum):
    s = PhaseState([0.0, 0.0], [0.0, np.sqrt(0.8)], "cotangent")
    traj = integrate(pendulum, s, horizon=2.0)
    mid = traj.state_at(1.0)
    assert mid.rep == "cotangent"
    assert abs(pendulum.state_energy(mid) - pendulum.state_energy(s)) < 1e-9


def test_linearized_defect_guard(pendulum):
    # a coarse tolerance must still keep the symplectic defect bounded
    s = PhaseState([0.05, 0.1], [0.1, np.sqrt(0.8)], "cotangent")
    lin = integrate_linearized(pendulum, s, horizon=3.0, tol=1e-8)
    assert symplectic_defect(lin.monodromy) < 1e-6
