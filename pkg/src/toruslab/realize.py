"""Realizing symplectic targets by tube potentials along an orbit window.

The reduced transverse dynamics over a window [0, t0] is a Hill system
X' = [[0, I], [-K(t), 0]] X.  A tube potential with coefficient path
beta(w) shifts the curvature to K + W^T beta(w) W, so the window transfer
becomes a map F(w) of the parameter vector w.  This module evaluates F,
differentiates it (four interchangeable routes), and inverts it:

  * transfer        F(w) by RK4 over a grid that carries the bump's own
                    refinement and the quadrature nodes exactly.
  * derivative      d_wF(xi) as the variational integral
                    X(t0) * integral X^-1 B_xi X ds  (exact for linear
                    systems, quadrature on the bump support), as a
                    bump-concentrated quadrature after integration by
                    parts (constant-curvature windows), or by central
                    finite differences of F.
  * realize_target  damped Gauss-Newton in w, with the C^2 budget of the
                    built potential enforced and the central orbit
                    verified untouched.
  * push_orbit_hyperbolic / reachable_radius_estimate on top.

The kernel requires a gauge-clean window (the Hill gauge W stays at the
identity), which in practice means a straight central segment — the same
restriction the tube chart imposes on the potential itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .fields import SumPotential
from .flow import integrate, integrate_linearized
from .frames import adapted_frame, extract_curvature
from .ledger import build_profile, cutoff_family_bound
from .models import LagrangianModel
from .orbits import classify_spectrum
from .potential import build_potential
from .spnlib import standard_J, symplectic_defect, symplectic_inverse
from .tsystem import PerturbationParams, assemble_T, random_target

FD_SCALE = 2e-4         # curvature amplitude used by the central difference
FD_MIN_STEP = 1e-11     # below this the difference drowns in roundoff
CHECK_TOL = 1e-3        # fd vs variational disagreement that is an error
GAUGE_TOL = 1e-6        # max |W - I| for the window to count as clean
# Node count is driven by the second-derivative bump component: its
# integrand magnitudes scale like 1/lam^2 and cancel down to an O(1)
# moment, so the quadrature must resolve the cancellation, not just the
# value.  48 nodes leave O(1e-3) relative residue at window widths of
# ~1e-2 and fail entirely near 1e-3; 200 reaches ~1e-9 at both.
GL_NODES = 200
ORBIT_TOL = 1e-8        # central orbit must survive the perturbation


class DerivativeInconsistencyError(RuntimeError):
    """Finite-difference and variational derivatives disagree."""


class FDInfeasibleError(RuntimeError):
    """The bump is too sharp for finite differences at this width."""


class BudgetError(RuntimeError):
    """The C^2 budget cannot be met at any admissible tube radius."""


class NoConvergenceError(RuntimeError):
    """Gauss-Newton ran out of iterations; carries the best iterate."""

    def __init__(self, message, params, error):
        super().__init__(message)
        self.params = params
        self.error = error


# ---------------------------------------------------------------------------
# window kernel


class WindowKernel:
    """Transfer of the reduced window system and its parameter derivatives.

    Holds the time grid (uniform base + bump refinement + quadrature nodes,
    all exact grid members), the base curvature tables, and the profile.
    """

    def __init__(self, model, frame, profile, path=None, base_grid=600,
                 gl_nodes=GL_NODES, bump_refine=24):
        self.model = model
        self.frame = frame
        self.profile = profile
        self.path = extract_curvature(model, frame) if path is None else path
        self.n = profile.n
        if self.path.n != self.n:
            raise ValueError("profile and frame transverse dimensions differ")
        t0 = profile.t0
        if frame.horizon < t0 - 1e-12:
            raise ValueError("frame horizon %.4g shorter than the window %.4g"
                             % (frame.horizon, t0))
        gauge_err = float(np.max(np.abs(
            self.path.W - np.eye(self.n)[None, :, :])))
        if gauge_err > GAUGE_TOL:
            raise RuntimeError(
                "window gauge drifts by %.2e; the kernel (like the tube "
                "chart) needs a straight central segment" % gauge_err)

        lo, hi = profile.delta.support
        lam = profile.lam
        base = np.linspace(0.0, t0, base_grid + 1)
        fine = np.arange(max(0.0, lo - 2.0 * lam),
                         min(t0, hi + 2.0 * lam), lam / bump_refine)
        x, wq = np.polynomial.legendre.leggauss(gl_nodes)
        s_gl = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        self.gl_s = s_gl
        self.gl_w = 0.5 * (hi - lo) * wq
        grid = np.unique(np.concatenate([base, fine, s_gl, [t0]]))
        self.grid = grid
        self.gl_idx = np.searchsorted(grid, s_gl)
        if np.any(grid[self.gl_idx] != s_gl):
            raise RuntimeError("quadrature nodes lost from the grid")
        self._mids = 0.5 * (grid[:-1] + grid[1:])
        # base curvature tables (tau held out of the spline's rough spots:
        # the base path is smooth, so plain spline evaluation is fine)
        self._K_grid = self.path.at(grid)
        self._K_mid = self.path.at(self._mids)
        self._J = standard_J(self.n)

    # -- curvature assembly ---------------------------------------------

    def _beta(self, params, s):
        return self.profile.beta_derivs(params, s, order=0)[0]

    def _K_of(self, params, table, s):
        if params is None or params.norm() == 0.0:
            return table
        return table + self._beta(params, s)

    def _A_blocks(self, K):
        m, n = K.shape[0], self.n
        A = np.zeros((m, 2 * n, 2 * n))
        A[:, :n, n:] = np.eye(n)
        A[:, n:, :n] = -K
        return A

    # -- transfer ----------------------------------------------------------

    def transfer_path(self, params=None):
        """X(t) on the grid, X(0) = I, by RK4 with exact nodal curvature."""
        A_g = self._A_blocks(self._K_of(params, self._K_grid, self.grid))
        A_m = self._A_blocks(self._K_of(params, self._K_mid, self._mids))
        m = len(self.grid)
        n2 = 2 * self.n
        X = np.empty((m, n2, n2))
        X[0] = np.eye(n2)
        hs = np.diff(self.grid)
        for i in range(m - 1):
            h = hs[i]
            x = X[i]
            k1 = A_g[i] @ x
            k2 = A_m[i] @ (x + 0.5 * h * k1)
            k3 = A_m[i] @ (x + 0.5 * h * k2)
            k4 = A_g[i + 1] @ (x + h * k3)
            X[i + 1] = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return X

    def transfer(self, params=None):
        """F(w): the window transfer matrix X(t0)."""
        return self.transfer_path(params)[-1]

    # -- derivatives ---------------------------------------------------------

    def _gl_conjugation(self, X_path, mid):
        """X^-1(s) * [[0,0],[-mid(s),0]] * X(s) summed with the GL weights."""
        n = self.n
        Xs = X_path[self.gl_idx]
        J = self._J
        Xinv = -J @ np.transpose(Xs, (0, 2, 1)) @ J
        B = np.zeros_like(Xs)
        B[:, n:, :n] = -mid
        integrand = Xinv @ B @ Xs
        return np.einsum("s,sij->ij", self.gl_w, integrand)

    def derivative_direct(self, xi, X_path=None, params=None):
        """d_wF(xi) = X(t0) * integral X^-1 B_xi X ds (exact variation)."""
        if X_path is None:
            X_path = self.transfer_path(params)
        beta_xi = self._beta(xi, self.gl_s)
        return X_path[-1] @ self._gl_conjugation(X_path, beta_xi)

    def derivative_ibp(self, xi, X_path=None, params=None):
        """Same integral with the bump derivatives moved onto the transfer.

        After integrating the delta', delta'', delta''' terms by parts the
        whole integrand concentrates on the bump with weight delta(s), and
        the matrix in the middle is the assembled algebra target of xi at
        the frozen curvature K(tau).  Valid when the curvature is constant
        across the bump support and the base parameters vanish."""
        if params is not None and params.norm() > 1e-12:
            raise RuntimeError("integration-by-parts route is only valid at "
                               "the unperturbed base point")
        Ktau = self.path.at(self.profile.tau)
        drift = float(np.max([np.linalg.norm(k - Ktau, ord=2)
                              for k in self.path.at(self.gl_s)]))
        if drift > 1e-6 * (1.0 + np.linalg.norm(Ktau, ord=2)):
            raise RuntimeError(
                "curvature varies by %.2e across the bump; the "
                "integration-by-parts route needs it constant there" % drift)
        if X_path is None:
            X_path = self.transfer_path(params)
        That = -assemble_T(Ktau, xi).as_matrix()
        n = self.n
        Xs = X_path[self.gl_idx]
        J = self._J
        Xinv = -J @ np.transpose(Xs, (0, 2, 1)) @ J
        dens = self.profile.delta.derivs(self.gl_s, 0)[0]
        h = self.profile.window.derivs(self.gl_s)[0]
        if float(np.min(h)) < 1.0 - 1e-12:
            raise RuntimeError("plateau window dips on the bump support")
        integrand = Xinv @ That[None, :, :] @ Xs
        W = np.einsum("s,s,sij->ij", self.gl_w, dens, integrand)
        return X_path[-1] @ W

    def fd_step_for(self, xi):
        """Central-difference step making the curvature bump FD_SCALE high."""
        s_est = self.profile.beta_c_norms(xi)[0]
        if s_est == 0.0:
            return 0.0
        return FD_SCALE / s_est

    def derivative_fd(self, xi, params=None, step=None):
        """Central finite difference of F across the direction xi."""
        r = self.fd_step_for(xi) if step is None else float(step)
        if r == 0.0:
            return np.zeros((2 * self.n, 2 * self.n))
        if r < FD_MIN_STEP:
            raise FDInfeasibleError(
                "step %.2e below %.0e: the bump is too sharp for finite "
                "differences; use the variational route" % (r, FD_MIN_STEP))
        base = (params.to_vector() if params is not None
                else np.zeros(PerturbationParams.dim(self.n)))
        sb = params.star_basis if params is not None else xi.star_basis
        vxi = xi.to_vector()
        up = PerturbationParams.from_vector(base + r * vxi, self.n, sb)
        dn = PerturbationParams.from_vector(base - r * vxi, self.n, sb)
        return (self.transfer(up) - self.transfer(dn)) / (2.0 * r)

    def jacobian(self, params):
        """(F(w), J) with J[:, j] = vec d_wF(e_j), sharing one X path."""
        X_path = self.transfer_path(params)
        dim = PerturbationParams.dim(self.n)
        J = np.empty((4 * self.n * self.n, dim))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = 1.0
            xi = PerturbationParams.from_vector(e, self.n, params.star_basis)
            J[:, j] = self.derivative_direct(xi, X_path=X_path).ravel()
        return X_path[-1], J


# ---------------------------------------------------------------------------
# public derivative entry point


def directional_derivative_F(model, orbit_segment, profile, params_base, xi,
                             fd_step=None, method="check", path=None,
                             kernel=None):
    """d_wF(xi) for the window system of `orbit_segment` (an adapted frame).

    method: "direct" (variational integral), "ibp" (bump-concentrated
    quadrature, base point only), "fd" (central differences), "check"
    (fd and direct, raising DerivativeInconsistencyError beyond 1e-3
    relative disagreement), or "auto" (fd-checked when the bump is wide
    enough to difference, plain direct otherwise).
    """
    k = kernel or WindowKernel(model, orbit_segment, profile, path=path)
    n = k.n
    if params_base is None:
        params_base = PerturbationParams.zeros(n)
    if not isinstance(xi, PerturbationParams):
        xi = PerturbationParams.from_vector(np.asarray(xi, float), n,
                                            params_base.star_basis)
    base = None if params_base.norm() == 0.0 else params_base

    if method == "direct":
        return k.derivative_direct(xi, params=base)
    if method == "ibp":
        return k.derivative_ibp(xi, params=base)
    if method == "fd":
        return k.derivative_fd(xi, params=base, step=fd_step)
    if method == "auto":
        try:
            return directional_derivative_F(model, orbit_segment, profile,
                                            params_base, xi, fd_step=fd_step,
                                            method="check", kernel=k)
        except FDInfeasibleError:
            return k.derivative_direct(xi, params=base)
    if method != "check":
        raise ValueError("unknown method %r" % method)

    Zd = k.derivative_direct(xi, params=base)
    Zf = k.derivative_fd(xi, params=base, step=fd_step)
    scale = max(float(np.linalg.norm(Zd)), 1e-14)
    rel = float(np.linalg.norm(Zf - Zd)) / scale
    if rel > CHECK_TOL:
        raise DerivativeInconsistencyError(
            "finite-difference and variational derivatives disagree by "
            "%.2e relative (> %.0e): frame or step size unfit" %
            (rel, CHECK_TOL))
    return Zd


# ---------------------------------------------------------------------------
# target realization


def _c2_budget(profile, params, k7, eps_start, eps_C2, max_halvings=20):
    """Largest admissible tube radius under the C^2 budget, halving from
    eps_start; raises BudgetError when even radius -> 0 cannot meet it."""
    b0, b1, b2 = profile.beta_c_norms(params)
    if k7 * b0 > eps_C2:
        raise BudgetError(
            "C^2 budget %.3g infeasible: the radius-independent term is "
            "already %.3g" % (eps_C2, k7 * b0))
    eps = float(eps_start)
    for _ in range(max_halvings):
        if k7 * (b0 + eps * b1 + eps ** 2 * b2) <= eps_C2:
            return eps, k7 * (b0 + eps * b1 + eps ** 2 * b2)
        eps *= 0.5
    raise BudgetError(
        "C^2 budget %.3g not met after %d halvings of the tube radius "
        "(bound %.3g at radius %.2e)" %
        (eps_C2, max_halvings, k7 * (b0 + eps * b1 + eps ** 2 * b2), eps))


def _orbit_residual(model, field, frame, t0, samples=41, tol=1e-10):
    """Max phase-space drift of the central segment under the perturbation."""
    pert = LagrangianModel(model.space, model.metric, model.one_form,
                           SumPotential(model.potential, field.as_field()),
                           name=model.name + "+u")
    state0 = frame.lin.state_at(0.0)
    traj = integrate(pert, state0, t0, tol=tol)
    ts = np.linspace(0.0, t0, samples)
    d = model.d
    drift = 0.0
    for t in ts:
        ref = frame.lin.base_at(t)
        cur = traj.at(t)
        dx = model.space.diff(np.asarray(cur[0]), np.asarray(ref[0]))
        dp = np.asarray(cur[1]) - np.asarray(ref[1])
        drift = max(drift, float(np.max(np.abs(dx))),
                    float(np.max(np.abs(dp))))
    return drift, pert


def realize_target(model, orbit_segment, A_target, eps_C2, max_iter=25, *,
                   ledger=None, profile=None, kind="practical", path=None,
                   kernel=None, gn_tol=1e-6, verify_orbit=True):
    """Find a tube potential whose window transfer hits A_target.

    Damped Gauss-Newton on the parameter vector w (Jacobian columns from
    the variational route, one shared transfer path per iterate).  Returns
    (PotentialField, achieved Frobenius error); the field carries a
    `realization` record.  Raises NoConvergenceError (with best iterate),
    BudgetError, or RuntimeError when the central orbit drifts.
    """
    frame = orbit_segment
    if path is None and kernel is None:
        path = extract_curvature(model, frame)
    if profile is None:
        if ledger is None:
            raise ValueError("either a profile or a ledger is required")
        profile = build_profile(ledger, frame.horizon, path=path, kind=kind)
    if kernel is None:
        kernel = WindowKernel(model, frame, profile, path=path)
    else:
        path = kernel.path
    n = kernel.n
    A_target = np.asarray(getattr(A_target, "entries", A_target), float)
    if A_target.shape != (2 * n, 2 * n):
        raise ValueError("target must be a %dx%d matrix" % (2 * n, 2 * n))
    tdef = symplectic_defect(A_target)
    if tdef > 1e-6:
        raise ValueError("target symplectic defect %.2e too large" % tdef)

    # eigenbasis of the frozen curvature keeps the star component honest
    Ktau = kernel.path.at(profile.tau)
    _, Q = np.linalg.eigh(Ktau)
    w = np.zeros(PerturbationParams.dim(n))
    params = PerturbationParams.from_vector(w, n, Q)
    F, J = kernel.jacobian(params)
    err = float(np.linalg.norm(A_target - F))
    best_w, best_err = w.copy(), err
    iterations = 0
    while err > gn_tol and iterations < max_iter:
        dw, *_ = np.linalg.lstsq(J, (A_target - F).ravel(), rcond=None)
        step = 1.0
        for _ in range(9):
            w_try = w + step * dw
            p_try = PerturbationParams.from_vector(w_try, n, Q)
            F_try = kernel.transfer(p_try)
            e_try = float(np.linalg.norm(A_target - F_try))
            if e_try < err:
                break
            step *= 0.5
        else:
            break                       # no descent along this direction
        w, params, err = w_try, p_try, e_try
        if err < best_err:
            best_w, best_err = w.copy(), err
        iterations += 1
        if err > gn_tol:
            F, J = kernel.jacobian(params)
        else:
            F = F_try
    if err > gn_tol:
        raise NoConvergenceError(
            "Gauss-Newton stalled at error %.3e after %d iterations"
            % (best_err, iterations),
            PerturbationParams.from_vector(best_w, n, Q), best_err)

    k7 = ledger.k7 if ledger is not None else cutoff_family_bound(n)
    eps, bound = _c2_budget(profile, params, k7, profile.eps, eps_C2)
    field = build_potential(profile, params, frame, model=model, eps=eps)
    record = {"iterations": iterations, "error": err,
              "w": [float(v) for v in w], "eps": eps,
              "c2_bound": bound, "budget": float(eps_C2)}
    if verify_orbit:
        drift, _ = _orbit_residual(model, field, frame, profile.t0)
        record["orbit_residual"] = drift
        if drift > ORBIT_TOL:
            raise RuntimeError(
                "central orbit drifted by %.2e under the realized "
                "potential (tolerance %g)" % (drift, ORBIT_TOL))
    field.realization = record
    return field, err


# ---------------------------------------------------------------------------
# pushing a closed orbit to hyperbolicity


@dataclass
class PushReport:
    field: object
    error: float
    t0: float
    kick: float
    trace_before: float
    trace_target: float
    trace_after: float
    class_before: str
    class_after: str
    orbit_residual: float
    monodromy_before: np.ndarray
    monodromy_after: np.ndarray


def _kick_to_trace(M0, target_trace):
    """Shear factor driving trace(M) to target_trace (2x2 blocks only)."""
    lower, upper = M0[0, 1], M0[1, 0]
    if abs(lower) >= abs(upper):
        if abs(lower) < 1e-12:
            raise RuntimeError("monodromy has no shear-sensitive entry")
        s = (np.trace(M0) - target_trace) / lower
        return np.array([[1.0, 0.0], [-s, 1.0]]) @ M0, float(s)
    s = (target_trace - np.trace(M0)) / upper
    return np.array([[1.0, s], [0.0, 1.0]]) @ M0, float(s)


def push_orbit_hyperbolic(model, orbit, eps_C2, *, ledger, t0=None,
                          target_trace=-2.2, kind="practical", max_iter=60,
                          n_grid=800, gn_tol=1e-6):
    """Make a closed orbit's transverse monodromy hyperbolic.

    The full-period reduced monodromy factors through the window as
    M = X_rest * F(w) (the potential vanishes outside the window, and the
    orbit itself is untouched), so pushing the monodromy to a target is a
    window realization with A = X_rest^-1 * M_target.  For n = 1 the
    target is the trace-`target_trace` shear of the current monodromy;
    for larger blocks the shear is escalated until the pushed matrix
    classifies hyperbolic.  The report carries the re-linearized spectrum
    under the perturbed dynamics.
    """
    T = orbit.period
    k0 = ledger.k0
    if t0 is None:
        t0 = min(2.0 * k0, 0.75 * T)
    if not (k0 - 1e-12 <= t0 <= 2.0 * k0 + 1e-12):
        raise ValueError("window length %.4g outside [k0, 2*k0]" % t0)
    if t0 >= T:
        raise ValueError("window must be shorter than the period")

    frame = adapted_frame(model, orbit.lin, n_grid=n_grid)
    path = extract_curvature(model, frame)
    profile = build_profile(ledger, t0, path=path, kind=kind)
    kernel = WindowKernel(model, frame, profile, path=path)

    A_t0 = frame.anchor_reduced(t0)
    M0 = frame.anchor_reduced(T)
    F0 = kernel.transfer()
    gauge_gap = float(np.linalg.norm(F0 - A_t0))
    if gauge_gap > 1e-6:
        raise RuntimeError("window transfer and anchor reduction disagree "
                           "by %.2e; frame not clean enough" % gauge_gap)

    n = kernel.n
    if n == 1:
        M_target, s = _kick_to_trace(M0, target_trace)
    else:
        U = np.zeros((2 * n, 2 * n))
        U[n:, :n] = -np.eye(n)
        s = 0.1
        for _ in range(40):
            M_target = expm(s * U) @ M0
            if classify_spectrum(M_target).kind == "hyperbolic":
                break
            s *= 2.0
        else:
            raise RuntimeError("no shear strength made the target "
                               "hyperbolic")
    X_rest = M0 @ symplectic_inverse(A_t0)
    A_target = symplectic_inverse(X_rest) @ M_target

    field, err = realize_target(
        model, frame, A_target, eps_C2, max_iter=max_iter, ledger=ledger,
        profile=profile, kernel=kernel, gn_tol=gn_tol, verify_orbit=False)

    # independent verification: relinearize the full period under L + u
    drift, pert = _orbit_residual(model, field, frame, T)
    lin_w = integrate_linearized(pert, orbit.initial, T, tol=1e-11)
    frame_w = adapted_frame(pert, lin_w, n_grid=n_grid)
    M_w = frame_w.anchor_reduced(T)
    cls_before = classify_spectrum(M0)
    cls_after = classify_spectrum(M_w)
    report = PushReport(
        field=field, error=err, t0=float(t0), kick=s,
        trace_before=float(np.trace(M0)),
        trace_target=float(np.trace(M_target)),
        trace_after=float(np.trace(M_w)),
        class_before=cls_before.kind, class_after=cls_after.kind,
        orbit_residual=drift,
        monodromy_before=M0, monodromy_after=M_w)
    if drift > ORBIT_TOL:
        raise RuntimeError("central orbit drifted by %.2e under the push"
                           % drift)
    return report


# ---------------------------------------------------------------------------
# reachable-radius estimation


def reachable_floor(ledger, profile, eps_C2, samples=64, seed=0):
    """Analytic lower bound k6 * min(budget-limited |w|, rho) for the
    reachable radius at this profile."""
    rng = np.random.default_rng(seed)
    dim = PerturbationParams.dim(ledger.n)
    b0_max = 0.0
    for _ in range(samples):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        xi = PerturbationParams.from_vector(v, ledger.n)
        b0_max = max(b0_max, profile.beta_c_norms(xi)[0])
    w_budget = eps_C2 / (ledger.k7 * b0_max)
    return ledger.k6 * min(w_budget, ledger.rho)


def reachable_radius_estimate(model, orbit_segment, eps_C2, trials=6, *,
                              ledger, kind="ledger", seed=0, path=None,
                              max_iter=12, bisect_iters=12, r_init=1e-7,
                              return_details=False):
    """Bisected estimate of the radius of targets realizable under the
    C^2 budget: min over random tangent directions U of the largest
    ||F0 expm(rU) - F0|| that realize_target still reaches.  Reports 0.0
    when nothing is reachable (including eps_C2 = 0).

    The returned radius is a minimum over directions, so doubling it is
    only guaranteed to fail along the binding direction; with
    return_details=True the result is (radius, details) where details
    carries per-direction radii, the direction matrices, and the index
    of the binding one.
    """
    if eps_C2 <= 0.0:
        return (0.0, {"radii": [], "directions": [], "argmin": None}) \
            if return_details else 0.0
    frame = orbit_segment
    if path is None:
        path = extract_curvature(model, frame)
    profile = build_profile(ledger, frame.horizon, path=path, kind=kind)
    kernel = WindowKernel(model, frame, profile, path=path)
    F0 = kernel.transfer()
    rng = np.random.default_rng(seed)

    def reach(r, U):
        target = F0 @ expm(r * U)
        try:
            realize_target(model, frame, target, eps_C2, max_iter=max_iter,
                           ledger=ledger, profile=profile, kernel=kernel,
                           verify_orbit=False)
            return True
        except (NoConvergenceError, BudgetError):
            return False

    radii, dirs = [], []
    for _ in range(trials):
        U = random_target(kernel.n, rng).as_matrix()
        U /= np.linalg.norm(U)
        dirs.append(U)
        r = r_init
        if not reach(r, U):
            radii.append(0.0)
            continue
        while reach(2.0 * r, U) and r < 1e3:
            r *= 2.0
        lo, hi = r, 2.0 * r
        for _ in range(bisect_iters):
            mid = 0.5 * (lo + hi)
            if reach(mid, U):
                lo = mid
            else:
                hi = mid
        radii.append(float(np.linalg.norm(F0 @ expm(lo * U) - F0)))
    radius = float(min(radii)) if radii else 0.0
    if return_details:
        argmin = int(np.argmin(radii)) if radii else None
        return radius, {"radii": radii, "directions": dirs, "argmin": argmin}
    return radius
