"""Uniform hyperbolicity certificates for periodic symplectic families."""

import numpy as np
import pytest

from toruslab.families import (HyperbolicityReport, PeriodicFamily,
                               check_uniform_hyperbolicity,
                               stable_hyperbolicity_probe)


def rot(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


SADDLE = np.diag([2.0, 0.5])


def test_accepts_pure_saddle_at_tight_constants():
    report = check_uniform_hyperbolicity(PeriodicFamily.single([SADDLE]),
                                         K=1.0, lam=0.5)
    assert report.ok
    assert report.worst_ratio <= 1.0 + 1e-9
    assert "uniformly hyperbolic" in str(report)


def test_rejects_rotation():
    report = check_uniform_hyperbolicity(
        PeriodicFamily.single([rot(0.9)]), K=10.0, lam=0.9)
    assert not report.ok
    assert "unit-modulus" in report.per_sequence[0]["reason"]


def test_accepts_period_two_mixed():
    """Each step alone is elliptic (square is -I) but the word is a saddle."""
    xi1 = np.array([[0.0, 2.0], [-0.5, 0.0]])
    xi2 = np.array([[0.0, -0.5], [2.0, 0.0]])
    np.testing.assert_allclose(xi2 @ xi1, np.diag([0.25, 4.0]), atol=1e-14)
    family = PeriodicFamily(sequences=[[xi1, xi2]])
    report = check_uniform_hyperbolicity(family, K=4.0, lam=0.55)
    assert report.ok


def test_rejects_saddle_at_impossible_constants():
    report = check_uniform_hyperbolicity(PeriodicFamily.single([SADDLE]),
                                         K=1.0, lam=0.25)
    assert not report.ok


def test_family_bound_validation():
    with pytest.raises(ValueError):
        PeriodicFamily(sequences=[[SADDLE]], bound=1.0)
    with pytest.raises(ValueError):
        PeriodicFamily(sequences=[])
    with pytest.raises(ValueError):
        check_uniform_hyperbolicity(PeriodicFamily.single([SADDLE]),
                                    K=1.0, lam=1.5)


def test_mixed_family_multiple_sequences():
    fam = PeriodicFamily(sequences=[[SADDLE], [rot(0.3) @ SADDLE @ rot(-0.3)]])
    report = check_uniform_hyperbolicity(fam, K=2.0, lam=0.51)
    assert report.ok
    assert len(report.per_sequence) == 2


def test_stability_probe_saddle_robust():
    probe = stable_hyperbolicity_probe(PeriodicFamily.single([SADDLE]),
                                       epsilon=1e-3, trials=200, seed=0)
    assert probe.baseline_hyperbolic
    assert probe.fraction_hyperbolic == 1.0
    assert probe.destabilizing_eps is None


def test_stability_probe_parabolic_fragile():
    shear = np.array([[1.0, 1.0], [0.0, 1.0]])
    probe = stable_hyperbolicity_probe(PeriodicFamily.single([shear]),
                                       epsilon=1e-3, trials=200, seed=0)
    assert not probe.baseline_hyperbolic
    assert probe.fraction_hyperbolic < 1.0
