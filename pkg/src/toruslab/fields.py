"""Smooth fields on the flat torus R^d/Z^d with exact derivatives.

Every field evaluates on points of shape (d,) or batches (..., d); all
coefficients refer to the unit-cell coordinates, so 1-periodicity holds by
construction for the trigonometric families.  Derivative conventions:
grad has shape (..., d), hess (..., d, d); for metric fields grad[..., k, i, j]
is the x_k-derivative of G_ij.
"""

import numpy as np


class ZeroPotential:
    """V = 0."""

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1])

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape)

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d))


class TrigPotential:
    """Finite sum of cosine waves  sum_j a_j cos(2 pi k_j . x + phi_j).

    Wave vectors k_j must be integer covectors so the field descends to the
    torus.  Gradients and Hessians are closed-form.
    """

    def __init__(self, terms):
        # terms: list of (amplitude, wavevector, phase)
        self.amps = np.array([t[0] for t in terms], dtype=float)
        self.waves = np.array([t[1] for t in terms], dtype=float)
        self.phases = np.array([t[2] for t in terms], dtype=float)
        if not np.allclose(self.waves, np.round(self.waves)):
            raise ValueError("wave vectors must be integer for torus periodicity")

    def _args(self, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * np.pi * (x @ self.waves.T) + self.phases

    def value(self, x):
        return np.cos(self._args(x)) @ self.amps

    def grad(self, x):
        s = np.sin(self._args(x))
        coef = -2.0 * np.pi * self.amps[:, None] * self.waves
        return s @ coef

    def hess(self, x):
        c = np.cos(self._args(x))
        kk = self.waves[:, :, None] * self.waves[:, None, :]
        coef = -4.0 * np.pi ** 2 * self.amps[:, None, None] * kk
        return np.tensordot(c, coef, axes=([-1], [0]))


class CallablePotential:
    """Wrap user-supplied callables (value required, derivatives optional)."""

    def __init__(self, value, grad=None, hess=None):
        self._value, self._grad, self._hess = value, grad, hess

    def value(self, x):
        return np.asarray(self._value(np.asarray(x, dtype=float)))

    def grad(self, x):
        if self._grad is None:
            raise NotImplementedError("no gradient callback supplied")
        return np.asarray(self._grad(np.asarray(x, dtype=float)))

    def hess(self, x):
        if self._hess is None:
            raise NotImplementedError("no Hessian callback supplied")
        return np.asarray(self._hess(np.asarray(x, dtype=float)))


class SumPotential:
    """Pointwise sum of potential fields."""

    def __init__(self, *parts):
        self.parts = parts

    def value(self, x):
        return sum(p.value(x) for p in self.parts)

    def grad(self, x):
        return sum(p.grad(x) for p in self.parts)

    def hess(self, x):
        return sum(p.hess(x) for p in self.parts)


class ZeroOneForm:
    """A = 0."""

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape)

    def jac(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d))

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d, d))


class ConstantOneForm:
    """Constant covector field A(x) = a; closed, generally not exact on the torus."""

    def __init__(self, a):
        self.a = np.asarray(a, dtype=float)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.a, x.shape).copy()

    def jac(self, x):
        # jac[..., k, j] = d A_j / d x_k
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d))

    def hess(self, x):
        # hess[..., j, k, l] = d^2 A_j / d x_k d x_l
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d, d))


class ConstantMetric:
    """Constant symmetric positive-definite kinetic metric."""

    def __init__(self, G):
        G = np.asarray(G, dtype=float)
        if not np.allclose(G, G.T):
            raise ValueError("metric must be symmetric")
        w = np.linalg.eigvalsh(G)
        if w.min() <= 0:
            raise ValueError("metric must be positive definite")
        self.G = G
        self.Ginv = np.linalg.inv(G)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.G, x.shape[:-1] + self.G.shape).copy()

    def inv(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(self.Ginv, x.shape[:-1] + self.Ginv.shape).copy()

    def grad(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d, d))

    def hess(self, x):
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        return np.zeros(x.shape[:-1] + (d, d, d, d))

    @property
    def is_constant(self):
        return True


class CallableMetric:
    """Metric from a value callback; derivative callbacks optional.

    Sufficient for pointwise scans (Tonelli admissibility checks); flows
    require the derivative callbacks.
    """

    def __init__(self, value, grad=None, hess=None):
        self._value, self._grad, self._hess = value, grad, hess

    def value(self, x):
        return np.asarray(self._value(np.asarray(x, dtype=float)))

    def inv(self, x):
        return np.linalg.inv(self.value(x))

    def grad(self, x):
        if self._grad is None:
            raise NotImplementedError("no metric gradient callback supplied")
        return np.asarray(self._grad(np.asarray(x, dtype=float)))

    def hess(self, x):
        if self._hess is None:
            raise NotImplementedError("no metric Hessian callback supplied")
        return np.asarray(self._hess(np.asarray(x, dtype=float)))

    @property
    def is_constant(self):
        return False
