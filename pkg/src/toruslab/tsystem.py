"""The linear system tying perturbation parameters to Lie-algebra targets.

The tube potentials are parameterized by w = (a, b, c, d) with a, b, c
symmetric and d symmetric with zero diagonal in a distinguished basis.
Their aggregate effect on the reduced linearized flow is the sp(n) element

    T(w) = [[beta, gamma], [alpha, -beta^T]]

with alpha = a - (Kc + cK), gamma = -2c, beta = b - Kd - 3dK, where K is
the curvature at the bump center.  This module assembles T, inverts it
(including the commutator equation Kd - dK = antisym(beta)), and packs
parameters to flat vectors for optimization.
"""

from dataclasses import dataclass

import numpy as np


class NearResonanceError(RuntimeError):
    """Eigenvalue gap of K too small for the commutator inversion."""


def _sym(M):
    return 0.5 * (M + M.T)


def _check_square(M, n, what):
    M = np.asarray(M, dtype=float)
    if M.shape != (n, n):
        raise ValueError("%s must be %dx%d" % (what, n, n))
    return M


@dataclass
class PerturbationParams:
    """w = (a, b, c, d): three symmetric matrices and a star element.

    d lies in the zero-diagonal symmetric matrices *in the star basis* Q
    (columns orthonormal): d = Q d~ Q^T with diag(d~) = 0.  The default
    Q = I recovers literal zero diagonal; solvers pass the eigenbasis of
    the curvature so that the commutator equation stays invertible.
    For n = 1 the star space is {0} and d is forced to zero.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray = None
    star_basis: np.ndarray = None

    def __post_init__(self):
        self.a = _sym(np.atleast_2d(np.asarray(self.a, dtype=float)))
        n = self.a.shape[0]
        self.b = _sym(_check_square(np.atleast_2d(self.b), n, "b"))
        self.c = _sym(_check_square(np.atleast_2d(self.c), n, "c"))
        if self.d is None:
            self.d = np.zeros((n, n))
        self.d = _sym(_check_square(np.atleast_2d(self.d), n, "d"))
        if self.star_basis is None:
            self.star_basis = np.eye(n)
        self.star_basis = _check_square(self.star_basis, n, "star_basis")
        if n == 1:
            self.d = np.zeros((1, 1))
        else:
            dtil = self.star_basis.T @ self.d @ self.star_basis
            off = float(np.max(np.abs(np.diag(dtil))))
            if off > 1e-10:
                raise ValueError("d has diagonal %.2e in the star basis" % off)

    @property
    def n(self):
        return self.a.shape[0]

    def as_stack(self):
        return np.stack([self.a, self.b, self.c, self.d])

    def norm(self):
        return float(np.sqrt(sum(np.sum(m * m) for m in self.as_stack())))

    # -- flat coordinates ---------------------------------------------------

    @staticmethod
    def dim(n):
        return 2 * n * n + n          # 3 * n(n+1)/2 + n(n-1)/2

    def to_vector(self):
        n = self.n
        iu = np.triu_indices(n)
        ius = np.triu_indices(n, k=1)
        dtil = self.star_basis.T @ self.d @ self.star_basis
        return np.concatenate([self.a[iu], self.b[iu], self.c[iu], dtil[ius]])

    @classmethod
    def from_vector(cls, v, n, star_basis=None):
        v = np.asarray(v, dtype=float)
        if v.size != cls.dim(n):
            raise ValueError("vector length %d != %d" % (v.size, cls.dim(n)))
        iu = np.triu_indices(n)
        ius = np.triu_indices(n, k=1)
        k = iu[0].size
        mats = []
        for i in range(3):
            m = np.zeros((n, n))
            m[iu] = v[i * k:(i + 1) * k]
            mats.append(_sym(m + np.triu(m, 1).T))
        dt = np.zeros((n, n))
        dt[ius] = v[3 * k:]
        dt = dt + dt.T
        Q = np.eye(n) if star_basis is None else star_basis
        return cls(mats[0], mats[1], mats[2], Q @ dt @ Q.T, star_basis=Q)

    @classmethod
    def zeros(cls, n, star_basis=None):
        return cls.from_vector(np.zeros(cls.dim(n)), n, star_basis)

    @classmethod
    def random(cls, n, rng, scale=1.0, star_basis=None):
        return cls.from_vector(scale * rng.standard_normal(cls.dim(n)),
                               n, star_basis)


@dataclass
class LieAlgebraTarget:
    """sp(n) element in block form [[beta, gamma], [alpha, -beta^T]]."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.alpha = _sym(np.atleast_2d(np.asarray(self.alpha, dtype=float)))
        n = self.alpha.shape[0]
        self.beta = _check_square(np.atleast_2d(self.beta), n, "beta")
        self.gamma = _sym(_check_square(np.atleast_2d(self.gamma), n, "gamma"))

    @property
    def n(self):
        return self.alpha.shape[0]

    def as_matrix(self):
        return np.block([[self.beta, self.gamma],
                         [self.alpha, -self.beta.T]])

    @classmethod
    def from_matrix(cls, M, tol=1e-9):
        M = np.asarray(M, dtype=float)
        n = M.shape[0] // 2
        beta = M[:n, :n]
        if np.max(np.abs(M[n:, n:] + beta.T)) > tol:
            raise ValueError("matrix is not in sp(n) block form")
        for blk, name in ((M[:n, n:], "gamma"), (M[n:, :n], "alpha")):
            if np.max(np.abs(blk - blk.T)) > tol:
                raise ValueError("%s block is not symmetric" % name)
        return cls(alpha=M[n:, :n], beta=beta, gamma=M[:n, n:])

    def norm(self):
        return float(np.linalg.norm(self.as_matrix()))


def assemble_T(K, params):
    """Exact linear map from parameters to the sp(n) target."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    a, b, c, d = params.as_stack()
    return LieAlgebraTarget(alpha=a - (K @ c + c @ K),
                            beta=b - K @ d - 3.0 * d @ K,
                            gamma=-2.0 * c)


def solve_commutator(K, e, gap_tol=1e-8):
    """Solve K d - d K = e for symmetric d, zero-diagonal in K's eigenbasis.

    e must be antisymmetric and K symmetric with simple spectrum.  The
    solution satisfies the bound |d|_F <= |e|_F / min eigenvalue gap.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    e = np.atleast_2d(np.asarray(e, dtype=float))
    n = K.shape[0]
    if n < 2:
        raise ValueError("commutator equation needs n >= 2")
    if np.max(np.abs(e + e.T)) > 1e-12 * max(1.0, float(np.max(np.abs(e)))):
        raise ValueError("right-hand side must be antisymmetric")
    lam, Q = np.linalg.eigh(_sym(K))
    gaps = np.abs(lam[:, None] - lam[None, :])
    min_gap = float(np.min(gaps[~np.eye(n, dtype=bool)]))
    if min_gap < gap_tol:
        raise NearResonanceError("eigenvalue gap %.3e below %g"
                                 % (min_gap, gap_tol))
    et = Q.T @ e @ Q
    dt = np.zeros((n, n))
    off = ~np.eye(n, dtype=bool)
    dt[off] = et[off] / (lam[:, None] - lam[None, :])[off]
    d = Q @ dt @ Q.T
    resid = float(np.linalg.norm(K @ d - d @ K - e))
    if resid > 1e-9 * max(1.0, float(np.linalg.norm(e))):
        raise RuntimeError("commutator residual %.2e" % resid)
    bound = float(np.linalg.norm(e)) / min_gap
    if np.linalg.norm(d) > bound * (1.0 + 1e-12):
        raise RuntimeError("commutator norm bound violated")
    return d


def solve_T_system(K, target, gap_tol=1e-8):
    """Invert assemble_T: find w with assemble_T(K, w) = target.

    n = 1 uses the closed 3x3 triangular form (d = 0, b = beta); n >= 2
    additionally solves the commutator equation for d in the eigenbasis
    of K.  The result is verified to reproduce the target within 1e-10.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    n = K.shape[0]
    if target.n != n:
        raise ValueError("dimension mismatch between K and target")
    c = -0.5 * target.gamma
    a = target.alpha + K @ c + c @ K
    if n == 1:
        d = np.zeros((1, 1))
        b = target.beta.copy()
        Q = np.eye(1)
    else:
        e = 0.5 * (target.beta - target.beta.T)
        d = solve_commutator(K, e, gap_tol=gap_tol)
        b = 0.5 * (target.beta + target.beta.T) + 2.0 * (K @ d + d @ K)
        Q = np.linalg.eigh(_sym(K))[1]
    params = PerturbationParams(a=a, b=b, c=c, d=d, star_basis=Q)
    back = assemble_T(K, params)
    resid = float(np.linalg.norm(back.as_matrix() - target.as_matrix()))
    if resid > 1e-10 * max(1.0, target.norm()):
        raise RuntimeError("T-system round trip residual %.2e" % resid)
    return params


def random_target(n, rng, scale=1.0):
    """Random sp(n) element in block coordinates."""
    b = scale * rng.standard_normal((n, n))
    al = _sym(scale * rng.standard_normal((n, n)))
    ga = _sym(scale * rng.standard_normal((n, n)))
    return LieAlgebraTarget(alpha=al, beta=b, gamma=ga)
