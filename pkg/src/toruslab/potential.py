"""Tube potentials: compactly supported fields vanishing to first order
on a central orbit segment.

The field is assembled in an affine chart around a straight orbit segment:
one longitudinal coordinate t (orbit time) and n transverse coordinates
x_perp measured against the metric-orthonormal frame columns.  Because the
chart is affine, ambient gradients and Hessians follow from the chart
derivatives by constant Jacobians — exact to machine precision, which the
downstream derivative checks rely on.
"""

import numpy as np

from .fields import CallablePotential
from .profiles import BumpProfile, alpha_cutoff_derivs, alpha1_derivs

WRAP_MARGIN = 0.499     # chart may not reach this far in any coordinate
STRAIGHT_TOL = 1e-8     # max velocity drift for a segment to count as straight


class TubeChartError(RuntimeError):
    """The orbit segment does not admit the affine tube chart."""


class TubeChart:
    """Affine coordinates (t, x_perp) around a straight orbit segment."""

    def __init__(self, model, frame, t0, eps):
        self.model = model
        self.space = model.space
        self.t0 = float(t0)
        self.eps = float(eps)
        times = np.linspace(0.0, self.t0, 33)
        vs = []
        for t in times:
            s = model.to_tangent(frame.lin.state_at(t))
            vs.append(s.vec)
        vs = np.asarray(vs)
        drift = float(np.max(np.abs(vs - vs[0])))
        if drift > STRAIGHT_TOL:
            raise TubeChartError(
                "segment velocity drifts by %.2e; the affine tube chart "
                "requires a straight segment" % drift)
        e_drift = float(np.max(np.abs(frame.E - frame.E[0])))
        if e_drift > 1e-7:
            raise TubeChartError("transverse frame drifts by %.2e" % e_drift)

        state0 = model.to_tangent(frame.lin.state_at(0.0))
        self.v = vs[0]
        self.x0 = np.asarray(state0.x, dtype=float)
        self.t_mid = 0.5 * self.t0
        self.x_mid = self.x0 + self.t_mid * self.v     # lifted midpoint
        G = model.metric.value(self.x0)
        self.E = frame.E[0]                            # (d, n)
        Gv = G @ self.v
        vGv = float(self.v @ Gv)
        self.jac_t = Gv / vGv                          # dt/dX, shape (d,)
        GE = G @ self.E                                # (d, n)
        self.jac_perp = GE.T @ (np.eye(len(self.v))
                                - np.outer(self.v, self.jac_t))   # (n, d)
        self.n = self.E.shape[1]

        # wrap safety: the chart must never reach the torus cut
        reach = np.abs(self.v) * self.t_mid \
            + np.sum(np.abs(self.E), axis=1) * 0.5 * self.eps
        if float(np.max(reach)) >= WRAP_MARGIN:
            raise TubeChartError(
                "tube reaches %.3f of the unit cell; segment too long or "
                "tube too wide for a single chart" % float(np.max(reach)))

    def coords(self, X):
        """Chart coordinates of ambient configuration point(s)."""
        X = np.asarray(X, dtype=float)
        y = self.space.diff(X, self.x_mid)
        t = self.t_mid + y @ self.jac_t
        if X.ndim == 1:
            xp = self.jac_perp @ y
        else:
            xp = y @ self.jac_perp.T
        return t, xp

    def embed(self, t, xperp):
        """Ambient (wrapped) point of chart coordinates."""
        lift = self.x0 + t * self.v + self.E @ np.asarray(xperp, dtype=float)
        return self.space.wrap(lift)


class PotentialField:
    """u(X) = alpha_eps(x_perp) * (1/2) x_perp^T beta(t) x_perp in the tube
    chart; identically zero outside the tube.  Vanishes with its gradient
    on the central segment, and its on-orbit transverse Hessian equals the
    coefficient path beta exactly."""

    def __init__(self, profile, params, frame, chart):
        if params.n != profile.n or chart.n != profile.n:
            raise ValueError("transverse dimension mismatch")
        self.profile = profile
        self.params = params
        self.frame = frame
        self.chart = chart
        self.n = profile.n

    # -- chart-coordinate value and derivatives -----------------------------

    def chart_derivs(self, t, xperp, order=2):
        """u and its chart derivatives (u, u_t, u_x, u_tt, u_tx, u_xx)."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        b = self.profile.beta_derivs(self.params, t_arr, order)
        B0, B1, B2 = b[0][0], None, None
        if order >= 1:
            B1 = b[1][0]
        if order >= 2:
            B2 = b[2][0]
        x = np.asarray(xperp, dtype=float)
        A, Ag, Ah = alpha_cutoff_derivs(x, self.profile.eps)
        q = 0.5 * float(x @ B0 @ x)
        qx = B0 @ x
        u = A * q
        if order == 0:
            return (u,)
        ut = A * 0.5 * float(x @ B1 @ x)
        ux = Ag * q + A * qx
        if order == 1:
            return u, ut, ux
        utt = A * 0.5 * float(x @ B2 @ x)
        utx = Ag * 0.5 * float(x @ B1 @ x) + A * (B1 @ x)
        uxx = Ah * q + np.outer(Ag, qx) + np.outer(qx, Ag) + A * B0
        return u, ut, ux, utt, utx, uxx

    # -- ambient field API (matches the model potential protocol) -----------

    def value(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            t, xp = self.chart.coords(X)
            b = self.profile.beta_derivs(self.params, t, 0)[0]
            a1 = alpha1_derivs(xp / self.profile.eps)[0]
            A = np.prod(a1, axis=1)
            q = 0.5 * np.einsum("si,sij,sj->s", xp, b, xp)
            return A * q
        t, xp = self.chart.coords(X)
        return float(self.chart_derivs(t, xp, 0)[0])

    def grad(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            return np.stack([self.grad(row) for row in X])
        t, xp = self.chart.coords(X)
        _, ut, ux = self.chart_derivs(t, xp, 1)
        return ut * self.chart.jac_t + self.chart.jac_perp.T @ ux

    def hess(self, X):
        X = np.asarray(X, dtype=float)
        if X.ndim == 2:
            return np.stack([self.hess(row) for row in X])
        t, xp = self.chart.coords(X)
        _, _, _, utt, utx, uxx = self.chart_derivs(t, xp, 2)
        jt = self.chart.jac_t
        jp = self.chart.jac_perp
        cross = np.outer(jt, utx @ jp)
        return utt * np.outer(jt, jt) + cross + cross.T + jp.T @ uxx @ jp

    def as_field(self):
        """Adapter usable as a model potential term."""
        return CallablePotential(self.value, self.grad, self.hess)

    def beta(self, t):
        """Coefficient path beta(w)(t) (the on-orbit transverse Hessian)."""
        return self.profile.beta_path(self.params, t)

    # -- norms ---------------------------------------------------------------

    def chart_c2_norm(self, t_grid=220, x_grid=9):
        """sup over the tube of |u|, chart first and second derivatives."""
        lo, hi = self.profile.delta.support
        ts = np.linspace(max(0.0, lo - 1e-3), min(self.profile.t0, hi + 1e-3),
                         t_grid)
        axes = [np.linspace(-0.5 * self.profile.eps, 0.5 * self.profile.eps,
                            x_grid)] * self.n
        xs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        worst = 0.0
        for t in ts:
            for x in xs:
                u, ut, ux, utt, utx, uxx = self.chart_derivs(t, x, 2)
                worst = max(worst, abs(u), abs(ut), float(np.max(np.abs(ux))),
                            abs(utt), float(np.max(np.abs(utx))),
                            float(np.linalg.norm(uxx, 2)))
        return worst

    def ambient_c2_norm(self, t_grid=220, x_grid=9):
        """sup over the tube of |u|, ambient gradient and Hessian norms."""
        lo, hi = self.profile.delta.support
        ts = np.linspace(max(0.0, lo - 1e-3), min(self.profile.t0, hi + 1e-3),
                         t_grid)
        axes = [np.linspace(-0.5 * self.profile.eps, 0.5 * self.profile.eps,
                            x_grid)] * self.n
        xs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.n)
        worst = 0.0
        for t in ts:
            for x in xs:
                X = self.chart.embed(t, x)
                worst = max(worst, abs(self.value(X)),
                            float(np.max(np.abs(self.grad(X)))),
                            float(np.linalg.norm(self.hess(X), 2)))
        return worst


def build_potential(profile, params, frame, model=None, eps=None):
    """Construct the tube potential for a profile/parameter pair on a frame.

    The chart is validated (straight segment, wrap safety); failures raise
    TubeChartError.  eps defaults to the profile's tube radius.
    """
    model = model if model is not None else frame.model
    eps = profile.eps if eps is None else eps
    if eps != profile.eps:
        profile = BumpProfile(t0=profile.t0, tau=profile.tau, lam=profile.lam,
                              ramp=profile.ramp, eps=eps, n=profile.n,
                              exclusions=list(profile.exclusions))
    chart = TubeChart(model, frame, profile.t0, profile.eps)
    return PotentialField(profile, params, frame, chart)


def perturbed_curvature(path, field):
    """Curvature path of the perturbed system: K + W^T beta W pointwise.

    The transverse Hessian of the tube potential lives in the frame
    coordinates; the stored path gauge W transports it into the curvature
    gauge.  Frames must match.

    Values at the stored sample times are exact sums; the spline between
    samples inherits the sample resolution, which may underresolve a very
    narrow bump — quadrature against the bump should evaluate beta
    analytically rather than through the interpolated path."""
    if field.frame is not path.frame:
        raise ValueError("potential field and curvature path use different frames")
    from .frames import CurvaturePath
    B = field.profile.beta_derivs(field.params, path.times, 0)[0]
    Ks = path.K + np.einsum("tji,tjk,tkl->til", path.W, B, path.W)
    return CurvaturePath(times=path.times, K=Ks, W=path.W, frame=path.frame,
                         validation_error=path.validation_error,
                         asym_residual=path.asym_residual)
