"""Benchmark flows for the entropy estimators."""

import numpy as np
import pytest

from toruslab import CatSuspension, EnergyLevelFlow, build_preset

from conftest import C

FIXED_COUNTS = [1, 5, 16, 45, 121, 320]      # trace(A^m) - 2, m = 1..6
PRIME_COUNTS = [1, 2, 5, 10, 24, 50]


def test_entropy_closed_form():
    flow = CatSuspension()
    golden = 0.5 * (3.0 + np.sqrt(5.0))
    assert abs(flow.entropy - np.log(golden)) < 1e-12
    assert abs(flow.entropy - 0.9624236501192069) < 1e-12


def test_fixed_point_counts():
    flow = CatSuspension()
    assert [flow.fixed_point_count(m) for m in range(1, 7)] == FIXED_COUNTS


def test_prime_orbit_counts_and_mobius_consistency():
    flow = CatSuspension()
    primes = [flow.prime_orbit_count(m) for m in range(1, 7)]
    assert primes == PRIME_COUNTS
    # inversion check: sum over divisors recovers the fixed-point counts
    for m in range(1, 7):
        total = sum(k * primes[k - 1] for k in range(1, m + 1) if m % k == 0)
        assert total == FIXED_COUNTS[m - 1]


def test_registry_periods_are_flow_times():
    reg = CatSuspension().orbit_registry(4)
    assert [r["period"] for r in reg] == [1.0, 2.0, 3.0, 4.0]
    assert [r["count"] for r in reg] == PRIME_COUNTS[:4]


def test_advance_integer_time_is_matrix_action():
    flow = CatSuspension()
    pts = flow.seed_grid(64)
    out = flow.advance(pts, 2.0)
    A2 = np.linalg.matrix_power(flow.A, 2)
    expect_x = np.mod(pts[:, :2] @ A2.T, 1.0)
    np.testing.assert_allclose(out[:, :2], expect_x, atol=1e-12)
    np.testing.assert_allclose(out[:, 2], pts[:, 2], atol=1e-12)


def test_advance_fractional_time_moves_roof_only():
    flow = CatSuspension()
    pts = flow.seed_grid(27)
    out = flow.advance(pts, 0.25)
    # no point crosses the roof at s + 0.25 < 1 for s < 0.75
    stay = pts[:, 2] < 0.75
    np.testing.assert_allclose(out[stay, :2], pts[stay, :2], atol=1e-12)
    np.testing.assert_allclose(out[stay, 2], pts[stay, 2] + 0.25, atol=1e-12)


def test_distance_metric():
    flow = CatSuspension()
    P = np.array([[0.95, 0.0, 0.1]])
    Q = np.array([[0.05, 0.0, 0.1]])
    # torus wrap: distance 0.1, not 0.9
    assert abs(flow.distance(P, Q)[0] - 0.1) < 1e-12
    assert flow.diameter >= flow.distance(P, Q)[0]


def test_rejects_non_hyperbolic_base():
    with pytest.raises(ValueError):
        CatSuspension(matrix=[[1, 1], [0, 1]])
    with pytest.raises(ValueError):
        CatSuspension(matrix=[[2, 0], [0, 1]])


def test_energy_level_flow_seeds_on_level(pendulum):
    flow = EnergyLevelFlow(pendulum, C)
    pts = flow.seed_grid(512)
    d = pendulum.d
    H = pendulum.hamiltonian(pts[:, :d], pts[:, d:])
    np.testing.assert_allclose(H, C, atol=1e-10)


def test_energy_level_flow_advance_conserves(pendulum):
    flow = EnergyLevelFlow(pendulum, C)
    pts = flow.seed_grid(128)[:16]
    out = flow.advance(pts, 2.0)
    d = pendulum.d
    H = pendulum.hamiltonian(out[:, :d], out[:, d:])
    np.testing.assert_allclose(H, C, atol=1e-6)
    # positions stay wrapped
    assert np.all(out[:, :d] >= 0.0) and np.all(out[:, :d] < 1.0)


def test_energy_level_flow_rejects_low_energy(pendulum):
    with pytest.raises(ValueError):
        EnergyLevelFlow(pendulum, 0.05)


def test_free_flow_advance_is_straight_line():
    model = build_preset("free-torus")
    flow = EnergyLevelFlow(model, 0.5)
    pts = flow.seed_grid(64)[:5]
    t = 1.7
    out = flow.advance(pts, t)
    expect = np.mod(pts[:, :2] + t * pts[:, 2:], 1.0)
    np.testing.assert_allclose(out[:, :2], expect, atol=1e-9)


def test_free_registry_windings():
    model = build_preset("free-torus")
    flow = EnergyLevelFlow(model, 0.5)
    reg = flow.orbit_registry(3.0)
    assert len(reg) > 0
    periods = [r["period"] for r in reg]
    assert all(0 < p <= 3.0 for p in periods)
    # winding (1,0) at speed 1 closes at time 1
    assert min(abs(p - 1.0) for p in periods) < 1e-9
