"""Coefficient system linking bump parameters to monodromy directions.

The map params -> T(params) is linear; the solver inverts it given the
local curvature K.  Round trips must be exact to solver precision, and
the d-block obeys the commutator gap bound when K has separated spectrum.
"""

import numpy as np
import pytest

from toruslab import (LieAlgebraTarget, PerturbationParams, assemble_T,
                      solve_T_system)


def _random_sym(n, rng, scale=1.0):
    A = rng.normal(size=(n, n)) * scale
    return 0.5 * (A + A.T)


def _random_target(n, rng):
    # sp(n, R) element in the block form [[beta, gamma], [alpha, -beta^T]]
    beta = rng.normal(size=(n, n))
    gamma = _random_sym(n, rng)
    alpha = _random_sym(n, rng)
    return LieAlgebraTarget(alpha=alpha, beta=beta, gamma=gamma)


def test_parameter_dimension():
    for n in (1, 2, 3, 4):
        assert PerturbationParams.dim(n) == 2 * n * n + n
        assert PerturbationParams.zeros(n).to_vector().size == 2 * n * n + n


@pytest.mark.parametrize("n", [1, 2, 3])
def test_round_trip_exact(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(100):
        K = _random_sym(n, rng, scale=2.0)
        e = _random_target(n, rng)
        params = solve_T_system(K, e)
        back = assemble_T(K, params)
        err = np.max(np.abs(back.as_matrix() - e.as_matrix()))
        assert err < 1e-10


def test_vector_round_trip():
    rng = np.random.default_rng(7)
    for n in (1, 2, 3):
        p = PerturbationParams.random(n, rng)
        v = p.to_vector()
        q = PerturbationParams.from_vector(v, n)
        np.testing.assert_allclose(q.to_vector(), v, atol=0)


def test_n1_has_no_d_block():
    assert PerturbationParams.dim(1) == 3
    rng = np.random.default_rng(1)
    K = _random_sym(1, rng)
    params = solve_T_system(K, _random_target(1, rng))
    assert params.d is None or np.allclose(params.d, 0.0)


def test_gap_controls_d_block():
    """||d|| <= ||e|| / gap when K's eigenvalue gaps are >= gap."""
    rng = np.random.default_rng(42)
    for n in (2, 3):
        for _ in range(50):
            # build K with a prescribed minimal spectral gap
            gap = 0.1 + rng.uniform(0.0, 0.4)
            lam = np.cumsum(gap + rng.uniform(0.0, 1.0, n))
            Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
            K = Q @ np.diag(lam) @ Q.T
            e = _random_target(n, rng)
            params = solve_T_system(K, e)
            resid = np.max(np.abs(assemble_T(K, params).as_matrix()
                                  - e.as_matrix()))
            assert resid < 1e-9
            e_norm = np.linalg.norm(e.as_matrix(), 2)
            assert np.linalg.norm(params.d, 2) <= e_norm / gap * (1 + 1e-9)


def test_assembled_block_structure():
    rng = np.random.default_rng(3)
    n = 2
    K = _random_sym(n, rng)
    p = PerturbationParams.random(n, rng)
    T = assemble_T(K, p)
    M = T.as_matrix()
    # symplectic Lie algebra: J M symmetric
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    np.testing.assert_allclose(J @ M, (J @ M).T, atol=1e-12)
    # gamma block is -2c by construction
    np.testing.assert_allclose(T.gamma, -2.0 * p.c, atol=1e-12)
