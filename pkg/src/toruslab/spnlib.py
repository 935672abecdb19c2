"""Linear symplectic utilities shared across the package.

Conventions: the standard form on R^{2n} is represented by
J = [[0, I], [-I, 0]], a matrix A is symplectic when A^T J A = J, and
sp(n) denotes the matrices X with JX symmetric (tangent space of the
symplectic group at the identity).
"""

import numpy as np


def standard_J(n):
    """Standard symplectic form matrix on R^{2n}."""
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def symplectic_defect(A):
    """Max-entry norm of A^T J A - J; zero exactly when A is symplectic."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0] // 2
    J = standard_J(n)
    return float(np.max(np.abs(A.T @ J @ A - J)))


def symplectic_inverse(A):
    """Inverse of a symplectic matrix via A^{-1} = J^{-1} A^T J."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0] // 2
    J = standard_J(n)
    return -J @ A.T @ J


def is_symplectic(A, tol=1e-9):
    return symplectic_defect(A) < tol


def random_sp_tangent(n, rng):
    """Random unit Frobenius-norm element of sp(n).

    Elements are J^{-1} S with S symmetric, which is the general solution
    of J X + X^T J = 0.
    """
    S = rng.standard_normal((2 * n, 2 * n))
    S = 0.5 * (S + S.T)
    J = standard_J(n)
    X = -J @ S
    return X / np.linalg.norm(X)


def project_symplectic(A, max_sweeps=3):
    """Project a near-symplectic matrix onto the symplectic group.

    Symplectic Gram-Schmidt on the column pairs (a_k, b_k) of
    A = [a_1 .. a_n b_1 .. b_n]: each pair is orthogonalized against the
    previously fixed pairs in the symplectic form and rescaled so that
    omega(a_k, b_k) = 1.  Exact on output up to rounding; intended for
    inputs within O(1) of the group.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0] // 2
    J = standard_J(n)

    def omega(u, v):
        return u @ (J @ v)

    for _ in range(max_sweeps):
        for k in range(n):
            a = A[:, k].copy()
            b = A[:, n + k].copy()
            for j in range(k):
                aj, bj = A[:, j], A[:, n + j]
                a = a - omega(a, bj) * aj + omega(a, aj) * bj
                b = b - omega(b, bj) * aj + omega(b, aj) * bj
            s = omega(a, b)
            if abs(s) < 1e-14:
                raise np.linalg.LinAlgError("degenerate pair in symplectic projection")
            b = b / s
            A[:, k], A[:, n + k] = a, b
        if symplectic_defect(A) < 1e-13:
            break
    return A


def eig_unit_circle_split(A, tol=1e-7):
    """Split spectrum of A by modulus against the unit circle.

    Returns (on_circle, inside, outside) as arrays of eigenvalues, using
    ||lambda| - 1| < tol as the circle band.
    """
    lam = np.linalg.eigvals(np.asarray(A, dtype=float))
    mod = np.abs(lam)
    on = lam[np.abs(mod - 1.0) < tol]
    inside = lam[mod <= 1.0 - tol]
    outside = lam[mod >= 1.0 + tol]
    return on, inside, outside


def is_root_of_unity(lam, max_order=12, angle_tol=1e-7):
    """True when lam^k is within angular tolerance of 1 for some k <= max_order."""
    theta = np.angle(lam) / (2.0 * np.pi)
    for k in range(1, max_order + 1):
        if abs(k * theta - round(k * theta)) < angle_tol * k:
            return True
    return False
