"""Constants ledger: frozen per-model values and structural invariants.

The cosine-well values below were produced by this code under seed 0 and
then hand-checked against the closed-form pieces that admit them
(injectivity time against the separatrix geometry, k1 against
sup|K| + 0, the n = 1 shortcuts k4 = a0 and k5 = 1 + k1).  They are
regression anchors: drift means the estimation pipeline changed.
"""

import numpy as np
import pytest

from toruslab import (InfeasibleLedgerError, build_preset, build_profile,
                      estimate_constants, orbit_seed_states)

PENDULUM_LEDGER = {
    "k0": 0.2265331664580726,
    "k1": 4.342625936479318,
    "k2": 3.191772610639183,
    "k3_slope": 7.124075943288386,
    "lambda_width": 0.000884895181476846,
    "a0": 0.6428243465332251,
    "k4": 0.6428243465332251,
    "k5": 5.342625936479318,
    "k6": 0.0018680576307237248,
    "k7": 28.682084554978744,
    "rho": 2.7322859741091756e-06,
    "delta_c0": 936.346877249627,
    "eps1": 0.997999941784382,
}


def test_pendulum_ledger_frozen(pend_ledger):
    for name, want in PENDULUM_LEDGER.items():
        got = getattr(pend_ledger, name)
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want)), (
            f"{name}: {got!r} != frozen {want!r}")
    assert pend_ledger.n == 1
    assert abs(pend_ledger.margin() - 0.05791809816220216) < 1e-9


def test_ledger_n1_structure(pend_ledger):
    led = pend_ledger
    assert led.k4 == led.a0                      # n = 1: no gap cascade
    assert abs(led.k5 - (1.0 + led.k1)) < 1e-12  # n = 1 shortcut
    assert led.check() is led
    # k3 is a slope times the width
    assert abs(led.k3() - led.k3_slope * led.lambda_width) < 1e-15
    assert led.margin() > 0


def test_ledger_sup_bounds_are_suprema(pendulum, pend_ledger, hyp_orbit):
    # k1 must dominate the curvature found on any sampled orbit
    from toruslab import extract_curvature

    frame = hyp_orbit.segment_frame(2 * pend_ledger.k0)
    path = extract_curvature(pendulum, frame)
    assert path.sup_norm() <= pend_ledger.k1
    # k2 bounds the transfer on [0, 2 k0]
    X, _ = frame.reduced_transfer()
    assert np.max(np.linalg.norm(X, ord=2, axis=(1, 2))) <= pend_ledger.k2


def test_free_two_torus_ledger():
    model = build_preset("free-torus")
    led = estimate_constants(model, 0.5, seed=0,
                             extra_states=orbit_seed_states(model, 0.5))
    # flat path: curvature sup hits the 1e-3 floor, shear transfer only
    assert led.k1 == 1e-3
    assert abs(led.k2 - 1.407571521053176) < 1e-9
    assert abs(led.k6 - 0.15939022992924873) < 1e-9
    assert led.eps1 > 0.5
    led.check()


def test_two_wave_ledger_dimensions():
    model = build_preset("two-wave")
    led = estimate_constants(model, 2.0, seed=0,
                             extra_states=orbit_seed_states(model, 2.0))
    assert led.n == 2
    assert abs(led.k1 - 8.685251872958636) < 1e-8
    assert abs(led.k5 - 31.85737229762864) < 1e-8
    assert led.k5 >= 1.0 / led.k4
    led.check()


def test_free_three_torus_infeasible():
    model = build_preset("free-torus", d=3)
    with pytest.raises(InfeasibleLedgerError):
        estimate_constants(model, 0.5, seed=0)


def test_profile_kinds(pend_ledger):
    t0 = 2 * pend_ledger.k0
    ledger_prof = build_profile(pend_ledger, t0, kind="ledger")
    practical = build_profile(pend_ledger, t0, kind="practical")
    # certified bump width vs workable width
    assert abs(ledger_prof.lam - pend_ledger.lambda_width) < 1e-15
    assert abs(practical.lam - pend_ledger.k0 / 8.0) < 1e-15
    assert practical.lam > 10 * ledger_prof.lam
    # both carry the ledger's certified amplitude radius
    assert ledger_prof.rho == pend_ledger.rho
    assert practical.rho == pend_ledger.rho
    for prof in (ledger_prof, practical):
        assert 0 < prof.tau < t0
        assert prof.eps == pend_ledger.eps1


def test_profile_respects_exclusions(pend_ledger):
    t0 = 2 * pend_ledger.k0
    prof = build_profile(pend_ledger, t0, kind="practical",
                         exclusions=[(0.9 * t0, t0)])
    assert prof.exclusions
    lo, hi = prof.delta.support
    assert hi <= 0.9 * t0
