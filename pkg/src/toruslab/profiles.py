"""Smooth compactly supported profiles with exact closed-form derivatives.

Everything here is built from the standard mollifier f(y) = exp(-1/(1-y^2))
on (-1, 1) and the smoothstep sigma(u) = phi(u)/(phi(u)+phi(1-u)) with
phi(u) = exp(-1/u).  Derivatives are produced by symbolic recurrences, not
finite differences: the coefficient paths assembled downstream consume the
bump derivatives up to fifth order, where numerical differentiation of a
narrow bump is hopeless.
"""

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

MAX_ORDER = 5          # highest bump derivative ever requested
_EDGE = 1.0 - 1e-8     # |y| beyond this evaluates to exactly zero


@lru_cache(maxsize=None)
def _g_pairs(order):
    """(polynomial, power) pairs for d^j/dy^j of g(y) = -1/u, u = 1 - y^2.

    Representation g^(j) = p_j(y) * u^(-m_j); differentiation acts by
    (p, m) -> (p' u + 2 m y p, m+1).
    """
    u = Polynomial([1.0, 0.0, -1.0])
    y = Polynomial([0.0, 1.0])
    pairs = [(Polynomial([-1.0]), 1)]
    for _ in range(order):
        p, m = pairs[-1]
        pairs.append((p.deriv() * u + 2.0 * m * y * p, m + 1))
    return pairs


def mollifier_derivs(y, order=MAX_ORDER):
    """f^(k)(y) for k = 0..order of f = exp(-1/(1-y^2)), zero outside (-1,1).

    Returns an array of shape (order+1,) + y.shape.  Uses the Leibniz
    recurrence f^(k) = sum_j C(k-1,j) g^(j+1) f^(k-1-j) with the g
    derivatives held as exact rational expressions.
    """
    y = np.asarray(y, dtype=float)
    shape = y.shape
    y = np.atleast_1d(y).ravel()
    out = np.zeros((order + 1,) + y.shape)
    mask = np.abs(y) < _EDGE
    if not np.any(mask):
        return out.reshape((order + 1,) + shape)
    ym = y[mask]
    u = 1.0 - ym * ym
    pairs = _g_pairs(order)
    gd = [p(ym) * u ** (-float(m)) for p, m in pairs]   # gd[j] = g^(j)
    fk = [np.exp(gd[0])]
    for k in range(1, order + 1):
        acc = np.zeros_like(ym)
        for j in range(k):
            acc += comb(k - 1, j) * gd[j + 1] * fk[k - 1 - j]
        fk.append(acc)
    for k in range(order + 1):
        out[k][mask] = fk[k]
    return out.reshape((order + 1,) + shape)


@lru_cache(maxsize=1)
def _gl_nodes():
    x, w = np.polynomial.legendre.leggauss(400)
    return x, w


@lru_cache(maxsize=1)
def mollifier_mass():
    """Integral of the mollifier over (-1, 1)."""
    x, w = _gl_nodes()
    return float(np.sum(w * mollifier_derivs(x, 0)[0]))


@lru_cache(maxsize=None)
def mollifier_moment(k):
    """Normalized moment: integral of y^k f(y) dy / mass."""
    x, w = _gl_nodes()
    return float(np.sum(w * x ** k * mollifier_derivs(x, 0)[0])) / mollifier_mass()


@lru_cache(maxsize=None)
def _mollifier_sup(k):
    """sup |f^(k)| on (-1, 1), measured once on a fine grid."""
    grid = np.linspace(-1.0, 1.0, 40001)
    return float(np.max(np.abs(mollifier_derivs(grid, k)[k])))


# ---------------------------------------------------------------------------
# smoothstep and the radial cutoff

def _phi_derivs(u):
    """exp(-1/u) with first and second derivatives; zero for u <= 0."""
    u = np.asarray(u, dtype=float)
    w = np.zeros_like(u)
    w1 = np.zeros_like(u)
    w2 = np.zeros_like(u)
    m = u > 1e-4            # below this exp(-1/u) underflows anyway
    um = u[m]
    wm = np.exp(-1.0 / um)
    w[m] = wm
    w1[m] = wm / um ** 2
    w2[m] = wm * (1.0 - 2.0 * um) / um ** 4
    return w, w1, w2


def smoothstep_derivs(u):
    """sigma(u) = phi(u)/(phi(u)+phi(1-u)) and its first two derivatives.

    sigma is 0 for u <= 0, 1 for u >= 1, strictly increasing in between,
    and satisfies sigma(u) + sigma(1-u) = 1.
    """
    u = np.asarray(u, dtype=float)
    s = np.where(u >= 1.0, 1.0, 0.0)
    s1 = np.zeros_like(u)
    s2 = np.zeros_like(u)
    m = (u > 0.0) & (u < 1.0)
    if np.any(m):
        um = u[m]
        w, w1, w2 = _phi_derivs(um)
        v, v1m, v2m = _phi_derivs(1.0 - um)
        v1, v2 = -v1m, v2m          # chain rule through (1-u)
        den = w + v
        num1 = w1 * v - w * v1
        s[m] = w / den
        s1[m] = num1 / den ** 2
        s2[m] = (w2 * v - w * v2) / den ** 2 - 2.0 * num1 * (w1 + v1) / den ** 3
    return s, s1, s2


def alpha1_derivs(y):
    """One-dimensional cutoff: 1 on |y|<=1/4, 0 on |y|>=1/2, smooth between."""
    y = np.asarray(y, dtype=float)
    s, s1, s2 = smoothstep_derivs(2.0 - 4.0 * np.abs(y))
    sgn = np.sign(y)
    return s, -4.0 * sgn * s1, 16.0 * s2


@lru_cache(maxsize=1)
def alpha1_norms():
    """(A0, A1, A2): sup norms of alpha1 and its first two derivatives."""
    grid = np.linspace(0.25, 0.5, 20001)
    a, a1, a2 = alpha1_derivs(grid)
    return 1.0, float(np.max(np.abs(a1))), float(np.max(np.abs(a2)))


def alpha_cutoff_derivs(xperp, eps):
    """Product cutoff on the transverse cube: value, gradient, Hessian.

    alpha_eps(x) = prod_i alpha1(x_i / eps); equals 1 on the cube of
    half-width eps/4 and 0 outside half-width eps/2.
    """
    x = np.asarray(xperp, dtype=float)
    n = x.shape[0]
    a, a1, a2 = alpha1_derivs(x / eps)
    a1 = a1 / eps
    a2 = a2 / eps ** 2
    val = float(np.prod(a))
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    for i in range(n):
        rest = np.prod(np.delete(a, i))
        grad[i] = a1[i] * rest
        hess[i, i] = a2[i] * rest
        for j in range(i + 1, n):
            both = np.prod(np.delete(a, (i, j)))
            hess[i, j] = hess[j, i] = a1[i] * a1[j] * both
    return val, grad, hess


# ---------------------------------------------------------------------------

class DeltaBump:
    """Normalized bump delta(s) = f((s-tau)/lam) / (lam * mass)."""

    def __init__(self, tau, lam):
        if lam <= 0.0:
            raise ValueError("bump width must be positive")
        self.tau = float(tau)
        self.lam = float(lam)
        self.support = (self.tau - self.lam, self.tau + self.lam)

    def derivs(self, s, order=MAX_ORDER):
        """Stack delta^(k)(s), k = 0..order; shape (order+1,) + s.shape."""
        s = np.asarray(s, dtype=float)
        y = (s - self.tau) / self.lam
        fk = mollifier_derivs(y, order)
        mass = mollifier_mass()
        scale = np.array([self.lam ** (-(k + 1)) for k in range(order + 1)])
        return fk * scale.reshape((-1,) + (1,) * s.ndim) / mass

    def c0_norm(self, k=0):
        """sup |delta^(k)|."""
        return _mollifier_sup(k) / (self.lam ** (k + 1) * mollifier_mass())

    def mass(self, nodes=200):
        lo, hi = self.support
        x, w = np.polynomial.legendre.leggauss(nodes)
        s = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        return float(np.sum(w * self.derivs(s, 0)[0]) * 0.5 * (hi - lo))

    def moment(self, k):
        """integral of s^k delta(s) ds, exact through the mollifier moments."""
        acc = 0.0
        for j in range(k + 1):
            acc += comb(k, j) * self.tau ** (k - j) * self.lam ** j \
                * mollifier_moment(j)
        return acc


class PlateauWindow:
    """Smooth plateau on [0, t0]: 0 at the ends, exactly 1 on [m, t0-m],
    with optional exclusion notches where the window is forced to zero."""

    def __init__(self, t0, ramp, exclusions=()):
        if not 0.0 < 2.0 * ramp < t0:
            raise ValueError("ramp must satisfy 0 < 2*ramp < t0")
        self.t0 = float(t0)
        self.ramp = float(ramp)
        self.exclusions = [(float(a), float(b)) for a, b in exclusions]
        for a, b in self.exclusions:
            if not (0.0 <= a < b <= t0):
                raise ValueError("exclusion window outside [0, t0]")

    def _factors(self, t):
        m = self.ramp
        fac = [smoothstep_derivs(t / m), None]
        s, s1, s2 = smoothstep_derivs((self.t0 - t) / m)
        fac[1] = (s, -s1, s2)       # chain through (t0 - t)/m handled below
        out = [(fac[0][0], fac[0][1] / m, fac[0][2] / m ** 2),
               (fac[1][0], fac[1][1] / m, fac[1][2] / m ** 2)]
        for a, b in self.exclusions:
            sa, sa1, sa2 = smoothstep_derivs((t - (a - m)) / m)
            sb, sb1, sb2 = smoothstep_derivs(((b + m) - t) / m)
            # notch = 1 - rise*fall; value in [0,1], zero on [a, b]
            v = 1.0 - sa * sb
            v1 = -(sa1 / m * sb - sa * sb1 / m)
            v2 = -(sa2 / m ** 2 * sb - 2.0 * sa1 * sb1 / m ** 2
                   + sa * sb2 / m ** 2)
            out.append((v, v1, v2))
        return out

    def derivs(self, t):
        """(h, h', h'') as arrays over t, by the product rule over factors."""
        t = np.asarray(t, dtype=float)
        fac = self._factors(t)
        h = np.ones_like(t)
        h1 = np.zeros_like(t)
        h2 = np.zeros_like(t)
        for v, v1, v2 in fac:
            h, h1, h2 = (h * v,
                         h1 * v + h * v1,
                         h2 * v + 2.0 * h1 * v1 + h * v2)
        return h, h1, h2

    def __call__(self, t):
        return self.derivs(t)[0]

    def one_minus_mass(self, nodes=800):
        """integral of (1 - h) over [0, t0]; equals ramp when no exclusions."""
        x, w = np.polynomial.legendre.leggauss(nodes)
        s = 0.5 * self.t0 * (x + 1.0)
        return float(np.sum(w * (1.0 - self.derivs(s)[0])) * 0.5 * self.t0)


@dataclass
class BumpProfile:
    """Time-profile data for one tube potential: the bump delta, the plateau
    window h, the transverse cutoff width, and the crossing exclusions."""

    t0: float
    tau: float
    lam: float
    ramp: float
    eps: float
    n: int
    exclusions: list = field(default_factory=list)

    def __post_init__(self):
        self.delta = DeltaBump(self.tau, self.lam)
        self.window = PlateauWindow(self.t0, self.ramp, self.exclusions)
        self.validate()

    def validate(self):
        lo, hi = self.delta.support
        if not (0.0 < lo and hi < self.t0):
            raise ValueError("bump support not strictly inside (0, t0)")
        m = abs(self.delta.mass() - 1.0)
        if m > 1e-10:
            raise ValueError("bump mass off by %.2e" % m)
        h_ends = self.window.derivs(np.array([lo, self.tau, hi]))[0]
        if np.min(h_ends) < 1.0 - 1e-12:
            raise ValueError("plateau window is not identically 1 on the bump")
        for a, b in self.exclusions:
            if not (b + self.window.ramp <= lo or a - self.window.ramp >= hi):
                raise ValueError("exclusion window collides with the bump")
        if self.eps <= 0.0:
            raise ValueError("tube radius must be positive")

    # -- coefficient path ---------------------------------------------------

    def beta_derivs(self, params, s, order=2):
        """beta(w)(s) and time-derivatives up to `order` (max 2).

        beta = h * (a delta + b delta' + c delta'' + d delta'''), shape
        (order+1, len(s), n, n).
        """
        s = np.asarray(s, dtype=float)
        mats = params.as_stack()                    # (4, n, n)
        dk = self.delta.derivs(s, 3 + order)        # (4+order, len(s))
        h, h1, h2 = self.window.derivs(s)
        D = [np.einsum("kij,ks->sij", mats, dk[i:i + 4]) for i in range(order + 1)]
        out = [h[:, None, None] * D[0]]
        if order >= 1:
            out.append(h1[:, None, None] * D[0] + h[:, None, None] * D[1])
        if order >= 2:
            out.append(h2[:, None, None] * D[0] + 2.0 * h1[:, None, None] * D[1]
                       + h[:, None, None] * D[2])
        return np.stack(out)

    def beta_path(self, params, s):
        """beta(w)(s) as (len(s), n, n) (or (n, n) for scalar s)."""
        scalar = np.ndim(s) == 0
        b = self.beta_derivs(params, np.atleast_1d(np.asarray(s, float)), 0)[0]
        return b[0] if scalar else b

    def beta_c_norms(self, params, grid_n=4001):
        """(|B|_C0, |B|_C1, |B|_C2) of the coefficient path in spectral norm."""
        lo, hi = self.delta.support
        pad = self.window.ramp
        s = np.linspace(max(0.0, lo - pad), min(self.t0, hi + pad), grid_n)
        b = self.beta_derivs(params, s, 2)
        norms = np.linalg.norm(b, ord=2, axis=(-2, -1))
        c0 = float(np.max(norms[0]))
        c1 = max(c0, float(np.max(norms[1])))
        c2 = max(c1, float(np.max(norms[2])))
        return c0, c1, c2
