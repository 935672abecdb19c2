"""Tonelli Lagrangians of mechanical-magnetic type on flat tori.

The model family is L(x, v) = (1/2) v^T G(x) v + A(x).v - V(x) with G a
smooth positive-definite metric, A a smooth one-form and V a smooth
potential, all 1-periodic in each coordinate.  The Legendre dual is
H(x, p) = (1/2) (p - A)^T G^{-1} (p - A) + V(x).  Arbitrary Tonelli
Lagrangians of this shape are admitted through the field callbacks; the
preset catalogue in presets.py stays inside the family with closed-form
derivatives.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .fields import ConstantMetric, ZeroOneForm, ZeroPotential


@dataclass
class TorusSpace:
    """Flat torus R^d/Z^d, d = n + 1 >= 2."""

    d: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("configuration dimension must be at least 2")

    @property
    def n(self):
        return self.d - 1

    def wrap(self, x):
        return np.mod(x, 1.0)

    def diff(self, x, y):
        """Shortest representative of x - y on the torus, componentwise."""
        delta = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return delta - np.round(delta)

    def dist(self, x, y):
        return np.linalg.norm(self.diff(x, y), axis=-1)


@dataclass
class PhaseState:
    """Point of TM or T*M; `rep` records which fibre coordinate is stored."""

    x: np.ndarray
    vec: np.ndarray
    rep: str = "tangent"  # "tangent" (velocity) or "cotangent" (momentum)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.vec = np.asarray(self.vec, dtype=float)
        if self.rep not in ("tangent", "cotangent"):
            raise ValueError("rep must be 'tangent' or 'cotangent'")
        if self.x.shape != self.vec.shape:
            raise ValueError("base point and fibre vector must share a dimension")


@dataclass
class LoopPath:
    """Closed loop given by time samples; endpoints must match modulo Z^d.

    `points` are lift coordinates, so points[-1] - points[0] is the integer
    winding class.
    """

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        gap = self.points[-1] - self.points[0]
        if np.max(np.abs(gap - np.round(gap))) > 1e-9:
            raise ValueError("loop endpoints differ by a non-integer vector")

    @property
    def winding(self):
        return np.round(self.points[-1] - self.points[0]).astype(int)

    @property
    def period(self):
        return float(self.times[-1] - self.times[0])


class LagrangianModel:
    """Mechanical-magnetic Tonelli Lagrangian with its Legendre-dual Hamiltonian."""

    def __init__(self, space, metric=None, one_form=None, potential=None, name="model"):
        self.space = space
        self.metric = metric if metric is not None else ConstantMetric(np.eye(space.d))
        self.one_form = one_form if one_form is not None else ZeroOneForm()
        self.potential = potential if potential is not None else ZeroPotential()
        self.name = name

    @property
    def d(self):
        return self.space.d

    # --- Lagrangian side -------------------------------------------------

    def lagrangian(self, x, v):
        G = self.metric.value(x)
        A = self.one_form.value(x)
        kin = 0.5 * np.einsum("...i,...ij,...j->...", v, G, v)
        return kin + np.einsum("...i,...i->...", A, v) - self.potential.value(x)

    def energy(self, x, v):
        """E(x, v) = dL/dv . v - L(x, v); the one-form drops out."""
        G = self.metric.value(x)
        kin = 0.5 * np.einsum("...i,...ij,...j->...", v, G, v)
        return kin + self.potential.value(x)

    def momentum(self, x, v):
        """Legendre transform p = G(x) v + A(x)."""
        G = self.metric.value(x)
        return np.einsum("...ij,...j->...i", G, v) + self.one_form.value(x)

    def velocity(self, x, p):
        """Inverse Legendre transform v = G^{-1}(x) (p - A(x))."""
        Ginv = self.metric.inv(x)
        return np.einsum("...ij,...j->...i", Ginv, p - self.one_form.value(x))

    def hamiltonian(self, x, p):
        Ginv = self.metric.inv(x)
        w = p - self.one_form.value(x)
        return 0.5 * np.einsum("...i,...ij,...j->...", w, Ginv, w) + self.potential.value(x)

    def fenchel_gap(self, x, v, p):
        """H(x,p) + L(x,v) - p.v, nonnegative with equality at p = dL/dv."""
        return self.hamiltonian(x, p) + self.lagrangian(x, v) - np.einsum("...i,...i->...", p, v)

    def to_cotangent(self, s):
        if s.rep == "cotangent":
            return s
        return PhaseState(s.x, self.momentum(s.x, s.vec), "cotangent")

    def to_tangent(self, s):
        if s.rep == "tangent":
            return s
        return PhaseState(s.x, self.velocity(s.x, s.vec), "tangent")

    def state_energy(self, s):
        if s.rep == "tangent":
            return float(self.energy(s.x, s.vec))
        return float(self.hamiltonian(s.x, s.vec))

    # --- Hamiltonian derivative blocks -----------------------------------

    def hamiltonian_blocks(self, x, p):
        """First and second derivatives of H at a single phase point.

        Returns a dict with H_x, H_p (vectors) and H_xx, H_px, H_pp
        (matrices, H_px[i, k] = d^2 H / dp_i dx_k).
        """
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        d = self.d
        A = self.one_form.value(x)
        JA = self.one_form.jac(x)          # JA[k, j] = d A_j / d x_k
        HA = self.one_form.hess(x)         # HA[j, k, l] = d^2 A_j / dx_k dx_l
        w = p - A
        Ginv = self.metric.inv(x)
        v = Ginv @ w

        if getattr(self.metric, "is_constant", False):
            dGinv = np.zeros((d, d, d))
            d2Ginv = np.zeros((d, d, d, d))
        else:
            G = self.metric.value(x)
            dG = self.metric.grad(x)       # dG[k, i, j]
            d2G = self.metric.hess(x)      # d2G[k, l, i, j]
            dGinv = -np.einsum("ia,kab,bj->kij", Ginv, dG, Ginv)
            term = np.einsum("ia,lab,bc,kcd,dj->klij", Ginv, dG, Ginv, dG, Ginv)
            d2Ginv = (-np.einsum("ia,klab,bj->klij", Ginv, d2G, Ginv)
                      + term + np.transpose(term, (1, 0, 2, 3)))

        gradV = self.potential.grad(x)
        hessV = self.potential.hess(x)

        H_p = v
        H_x = gradV + 0.5 * np.einsum("i,kij,j->k", w, dGinv, w) - JA @ v
        H_pp = Ginv
        # H_px[i, k] = d/dx_k (v_i)
        H_px = np.einsum("kij,j->ik", dGinv, w) - np.einsum("ij,kj->ik", Ginv, JA)
        H_xx = (hessV
                + 0.5 * np.einsum("i,klij,j->kl", w, d2Ginv, w)
                - np.einsum("lj,kji,i->kl", JA, dGinv, w)
                - np.einsum("jkl,j->kl", HA, v)
                - np.einsum("kj,jl->kl", JA, H_px))
        H_xx = 0.5 * (H_xx + H_xx.T)
        return {"H_x": H_x, "H_p": H_p, "H_xx": H_xx, "H_px": H_px, "H_pp": H_pp}

    # --- scalar invariants ------------------------------------------------

    def rest_energy(self, grid=64, polish=True):
        """e0 = max_x E(x, 0) = -min_x L(x, 0), located by grid scan plus polish."""
        d = self.d
        axes = [np.linspace(0.0, 1.0, grid, endpoint=False)] * d
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        vals = self.potential.value(mesh)
        k = int(np.argmax(vals))
        x0, best = mesh[k], float(vals[k])
        if polish:
            res = minimize(lambda x: -float(self.potential.value(x)), x0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12})
            if -res.fun > best:
                best, x0 = -float(res.fun), res.x
        return best, self.space.wrap(x0)


def energy(model, state):
    """Energy of a phase state (either representation)."""
    return model.state_energy(state)


def e0(model, grid=64):
    """Max of the energy over the zero section; equals max V for this family."""
    val, _ = model.rest_energy(grid=grid)
    return val


def legendre(model, state):
    """Map a state to the other representation of the same phase point."""
    if state.rep == "tangent":
        return model.to_cotangent(state)
    return model.to_tangent(state)


def hamiltonian_value(model, state):
    s = model.to_cotangent(state)
    return float(model.hamiltonian(s.x, s.vec))


def fenchel_gap(model, x, v, p):
    return float(model.fenchel_gap(np.asarray(x, float), np.asarray(v, float),
                                   np.asarray(p, float)))


def action(model, loop, k=0.0, quad_points=8, tol=1e-8):
    """Action of L + k along the piecewise-cubic interpolant of a loop.

    Composite Gauss-Legendre quadrature per sample interval; the value is
    recomputed at doubled order and a warning is attached when the two
    disagree by more than `tol`.
    """
    t, pts = loop.times, loop.points
    spline = CubicSpline(t, pts, axis=0)

    def quad(m):
        nodes, wts = np.polynomial.legendre.leggauss(m)
        total = 0.0
        for i in range(len(t) - 1):
            a, b = t[i], t[i + 1]
            mid, half = 0.5 * (a + b), 0.5 * (b - a)
            tt = mid + half * nodes
            xx = spline(tt)
            vv = spline(tt, 1)
            total += half * float(np.sum(wts * (model.lagrangian(xx, vv) + k)))
        return total

    val = quad(quad_points)
    check = quad(2 * quad_points)
    if abs(val - check) > tol:
        warnings.warn(f"action quadrature not converged: |delta| = {abs(val - check):.3e}",
                      RuntimeWarning)
    return check


def _loop_from_params(space, base, coeffs, winding, T, samples):
    """Trigonometric loop x(t) = base + winding * (t/T) + Fourier wiggle."""
    d = space.d
    tt = np.linspace(0.0, T, samples)
    phase = tt / T
    pts = base[None, :] + np.outer(phase, winding.astype(float))
    n_modes = coeffs.shape[0] // 2
    for m in range(1, n_modes + 1):
        c = coeffs[2 * (m - 1)]
        s = coeffs[2 * (m - 1) + 1]
        pts += np.outer(np.cos(2 * np.pi * m * phase) - 1.0, c)
        pts += np.outer(np.sin(2 * np.pi * m * phase), s)
    return LoopPath(tt, pts)


def critical_value_estimate(model, winding_classes=None, contractible_only=False,
                            budget=None):
    """Bracket [lower, upper] for the critical value of the action functional.

    The lower end is e0 improved by any loop found with negative (L + k)-action
    (each such loop certifies k below the critical value).  The upper end is
    the smallest k at which minimization of the (L + k)-action over a
    trigonometric loop family with free period finds no negative loop.  Both
    ends refer to the family searched, so the report is a bracket, never a
    point.  With contractible_only the search is restricted to null-homotopic
    loops and brackets the critical value of the abelian-cover lift.
    """
    budget = budget or {}
    n_modes = budget.get("modes", 2)
    restarts = budget.get("restarts", 3)
    samples = budget.get("samples", 48)
    bisect_steps = budget.get("bisect_steps", 12)
    width_tol = budget.get("width_tol", 1e-3)
    rng = np.random.default_rng(budget.get("seed", 0))

    space = model.space
    d = space.d
    lower, x_top = model.rest_energy()

    if contractible_only:
        classes = [np.zeros(d, dtype=int)]
    elif winding_classes is not None:
        classes = [np.asarray(w, dtype=int) for w in winding_classes]
    else:
        classes = [np.zeros(d, dtype=int)]
        for i in range(d):
            for s in (1, -1):
                w = np.zeros(d, dtype=int)
                w[i] = s
                classes.append(w)

    def min_action_at(k):
        best = np.inf
        for w in classes:
            for trial in range(restarts):
                if trial == 0:
                    base = x_top.copy()
                    coeffs0 = np.zeros((2 * n_modes, d))
                else:
                    base = rng.random(d)
                    coeffs0 = 0.1 * rng.standard_normal((2 * n_modes, d))
                z0 = np.concatenate([base, coeffs0.ravel(), [np.log(1.0)]])

                def obj(z, w=w):
                    base = z[:d]
                    coeffs = z[d:-1].reshape(2 * n_modes, d)
                    T = float(np.exp(z[-1]))
                    loop = _loop_from_params(space, base, coeffs, w, T, samples)
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        return action(model, loop, k=k, quad_points=4, tol=np.inf)

                res = minimize(obj, z0, method="Nelder-Mead",
                               options={"maxiter": budget.get("maxiter", 400),
                                        "xatol": 1e-8, "fatol": 1e-10})
                best = min(best, float(res.fun))
        return best

    # expand upward from e0 until no violating loop is found
    k_lo = lower
    k_hi = lower + budget.get("initial_gap", 0.5)
    for _ in range(8):
        if min_action_at(k_hi) >= -1e-12:
            break
        k_lo = k_hi
        k_hi = lower + 2.0 * (k_hi - lower) + 0.5
    else:
        warnings.warn("critical value upper bound not located within expansion budget",
                      RuntimeWarning)

    for _ in range(bisect_steps):
        if k_hi - k_lo <= width_tol:
            break
        mid = 0.5 * (k_lo + k_hi)
        if min_action_at(mid) < -1e-12:
            k_lo = mid
        else:
            k_hi = mid

    return max(lower, k_lo), max(k_hi, lower)


def tonelli_check(model, grid=48, margin=1e-10):
    """Scan a grid for positive definiteness of G and report the worst margin.

    Returns (ok, worst_margin, offenders) where worst_margin is the smallest
    metric eigenvalue seen and offenders lists grid points at which the
    metric fails to be positive definite.
    """
    d = model.d
    axes = [np.linspace(0.0, 1.0, grid, endpoint=False)] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    G = model.metric.value(mesh)
    eigs = np.linalg.eigvalsh(G)
    mins = eigs[..., 0]
    worst = float(np.min(mins))
    bad = mesh[mins <= margin]
    return worst > margin, worst, bad
