"""Curvature-gap functionals Phi_n and the genericity probe."""

import numpy as np
import pytest

from toruslab import build_preset, genericity_test, phi_n_estimate
from toruslab.genericity import h_n


def test_h1_identically_one():
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert h_n(rng.normal(size=(1, 1))) == 1.0


def test_h_n_gap_product():
    A = np.diag([3.0, 1.0, 0.0])
    # gaps 2, 3, 1 -> product of squares 36
    assert abs(h_n(A) - 36.0) < 1e-12
    assert h_n(np.eye(2)) == 0.0


def test_h_n_uses_symmetric_part():
    A = np.array([[2.0, 1.0], [-1.0, 0.0]])   # sym part diag(2, 0)
    assert abs(h_n(A) - 4.0) < 1e-12


@pytest.mark.parametrize("name", ["free-torus", "pendulum-torus",
                                  "magnetic", "skewed-free"])
def test_phi_1_trivial_in_dim_two(name):
    # k0 passed explicitly: the n = 1 value is exact regardless of window
    model = build_preset(name)
    est = phi_n_estimate(model, 0.5, k0=0.25)
    assert est.value == 1.0
    assert est.samples == 0          # the n = 1 shortcut never integrates


def test_phi_2_two_wave_positive():
    model = build_preset("two-wave")
    est = phi_n_estimate(model, 2.0, theta_samples=6, t_grid=32, seed=0)
    assert est.value > 1e-6
    assert est.witness is not None
    assert est.failures == 0


def test_phi_2_flat_three_torus_zero():
    model = build_preset("free-torus", d=3)
    est = phi_n_estimate(model, 0.5, theta_samples=6, t_grid=32, seed=0)
    assert est.value < 1e-12         # zero curvature: all gaps vanish


def test_genericity_probe_boolean(pendulum):
    assert genericity_test(pendulum, c=0.5, k0=0.25) is True
    # an impossible threshold flips the verdict
    assert genericity_test(pendulum, c=0.5, k0=0.25, threshold=2.0) is False
