"""Hamiltonian flow integration and linearization.

States are integrated in cotangent coordinates on the universal cover
(no wrapping during integration; winding is recovered afterwards).  The
linearized flow co-integrates the full 2d x 2d Jacobi propagator, whose
symplectic defect is the primary accuracy diagnostic.
"""

import numpy as np
from scipy.integrate import solve_ivp

from .models import PhaseState
from .spnlib import symplectic_defect


def vector_field(model, state):
    """Hamiltonian vector field at a state, in the state's representation."""
    s = model.to_cotangent(state)
    blocks = model.hamiltonian_blocks(s.x, s.vec)
    xdot, pdot = blocks["H_p"], -blocks["H_x"]
    if state.rep == "cotangent":
        return xdot, pdot
    vdot = blocks["H_px"] @ xdot + blocks["H_pp"] @ pdot
    return xdot, vdot


def _rhs(model):
    d = model.d

    def f(t, y):
        x, p = y[:d], y[d:]
        blocks = model.hamiltonian_blocks(x, p)
        return np.concatenate([blocks["H_p"], -blocks["H_x"]])

    return f


def _rhs_linearized(model):
    d = model.d

    def f(t, y):
        x, p = y[:d], y[d:2 * d]
        M = y[2 * d:].reshape(2 * d, 2 * d)
        b = model.hamiltonian_blocks(x, p)
        jac = np.block([[b["H_px"], b["H_pp"]],
                        [-b["H_xx"], -b["H_px"].T]])
        dM = jac @ M
        return np.concatenate([b["H_p"], -b["H_x"], dM.ravel()])

    return f


class FlowTrajectory:
    """Dense solution of the flow through one initial state."""

    def __init__(self, model, sol, y0, horizon):
        self.model = model
        self.sol = sol
        self.y0 = y0
        self.horizon = horizon
        d = model.d
        e_start = model.hamiltonian(y0[:d], y0[d:])
        checks = np.linspace(0.0, horizon, 33)
        ys = sol.sol(checks)
        e_all = model.hamiltonian(ys[:d].T, ys[d:].T)
        self.energy_drift = float(np.max(np.abs(e_all - e_start)))
        self.energy = float(e_start)

    def state_at(self, t):
        y = self.sol.sol(t)
        d = self.model.d
        return PhaseState(y[:d], y[d:], "cotangent")

    def at(self, t):
        """Lifted (x, p) arrays at scalar or vector times."""
        y = self.sol.sol(t)
        d = self.model.d
        return y[:d], y[d:]


def integrate(model, state, horizon, tol=1e-10, max_step=np.inf):
    """Integrate the flow; returns a FlowTrajectory with dense output."""
    s = model.to_cotangent(state)
    y0 = np.concatenate([s.x, s.vec])
    sol = solve_ivp(_rhs(model), (0.0, horizon), y0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2, dense_output=True, max_step=max_step)
    if not sol.success:
        raise RuntimeError(f"flow integration failed: {sol.message}")
    return FlowTrajectory(model, sol, y0, horizon)


class LinearizedFlow:
    """Base trajectory plus the Jacobi propagator M(t) with M(0) = I."""

    def __init__(self, model, sol, horizon):
        self.model = model
        self.sol = sol
        self.horizon = horizon
        self.d = model.d

    def base_at(self, t):
        y = self.sol.sol(t)
        d = self.d
        return y[:d], y[d:2 * d]

    def state_at(self, t):
        x, p = self.base_at(t)
        return PhaseState(x, p, "cotangent")

    def propagator_at(self, t):
        y = self.sol.sol(t)
        d = self.d
        return y[2 * d:].reshape(2 * d, 2 * d)

    def symplectic_defect_at(self, t):
        return symplectic_defect(self.propagator_at(t))

    @property
    def monodromy(self):
        return self.propagator_at(self.horizon)


def integrate_linearized(model, state, horizon, tol=1e-10, defect_tol=1e-7):
    """Co-integrate base flow and full linearization.

    Raises if the terminal symplectic defect exceeds defect_tol, the primary
    signal that the tolerance was too loose for the requested horizon.
    """
    s = model.to_cotangent(state)
    d = model.d
    y0 = np.concatenate([s.x, s.vec, np.eye(2 * d).ravel()])
    sol = solve_ivp(_rhs_linearized(model), (0.0, horizon), y0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2, dense_output=True)
    if not sol.success:
        raise RuntimeError(f"linearized integration failed: {sol.message}")
    lin = LinearizedFlow(model, sol, horizon)
    defect = lin.symplectic_defect_at(horizon)
    if defect > defect_tol:
        raise RuntimeError(f"symplectic defect {defect:.2e} exceeds {defect_tol:.1e}; "
                           "tighten the integration tolerance")
    return lin


def integrate_symplectic(model, state, horizon, dt=1e-3):
    """Fixed-step Stormer-Verlet for separable presets (constant G and A).

    Intended for long entropy runs where uniform energy behaviour matters
    more than per-step accuracy.  Raises for position-dependent metrics or
    one-forms, which break the kick-drift splitting.
    """
    if not getattr(model.metric, "is_constant", False):
        raise NotImplementedError("symplectic stepper requires a constant metric")
    probe = model.one_form.jac(np.zeros(model.d))
    if np.any(probe != 0.0):
        raise NotImplementedError("symplectic stepper requires a closed constant one-form")
    s = model.to_cotangent(state)
    x = s.x.copy()
    p = s.vec.copy()
    A = model.one_form.value(x)
    Ginv = model.metric.inv(x)
    steps = int(np.ceil(horizon / dt))
    h = horizon / steps
    xs = np.empty((steps + 1, model.d))
    ps = np.empty((steps + 1, model.d))
    xs[0], ps[0] = x, p
    for k in range(steps):
        p = p - 0.5 * h * model.potential.grad(x)
        x = x + h * (Ginv @ (p - A))
        p = p - 0.5 * h * model.potential.grad(x)
        xs[k + 1], ps[k + 1] = x, p
    times = np.linspace(0.0, horizon, steps + 1)
    return times, xs, ps


def sample_energy_level(model, c, n_samples, rng):
    """Sample states on E^{-1}(c): uniform base point, uniform direction,
    speed scaled to the energy.  Requires c above the rest energy."""
    d = model.d
    states = []
    while len(states) < n_samples:
        x = rng.random(d)
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        G = model.metric.value(x)
        gap = c - float(model.potential.value(x))
        if gap <= 0:
            continue
        speed = np.sqrt(2.0 * gap / float(u @ G @ u))
        states.append(PhaseState(x, speed * u, "tangent"))
    return states


def _first_self_intersection(model, traj, horizon, n_grid):
    """First time the projected configuration curve meets itself on the torus.

    For d = 2 the polyline is tested for genuine segment crossings with
    lattice shifts; in higher dimension near-approaches below a resolution
    threshold count, which is conservative in the right direction.
    """
    space = model.space
    d = model.d
    tt = np.linspace(0.0, horizon, n_grid)
    xs = traj.at(tt)[0].T  # (n_grid, d) lifted
    seg_a = xs[:-1]
    seg_b = xs[1:]
    n_seg = len(seg_a)
    steps = np.linalg.norm(seg_b - seg_a, axis=1)
    best = np.inf

    # retracing check (closed orbits re-cover their own track without ever
    # crossing it transversally): flag proximity with parallel heading.
    # candidates are gated by traveled arclength, not index, so the orbit's
    # own continuation never trips the threshold at variable speed
    thresh = 1.5 * float(np.max(steps))
    dirs = (seg_b - seg_a) / steps[:, None]
    arc = np.concatenate(([0.0], np.cumsum(steps)))
    for i in range(n_seg):
        if tt[i] >= best:
            break
        js = np.nonzero(arc[:n_seg] - arc[i] > 4.0 * thresh)[0]
        if len(js) == 0:
            continue
        dd = space.dist(xs[js], xs[i])
        if d == 2:
            cross = np.abs(dirs[i, 0] * dirs[js - 1, 1] - dirs[i, 1] * dirs[js - 1, 0])
            hit = js[(dd < thresh) & (cross < 0.2)]
        else:
            hit = js[dd < thresh]
        if len(hit):
            best = min(best, float(tt[hit[0]]))

    if d == 2:
        shifts = np.array([[i, j] for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=float)
        for i in range(n_seg):
            if tt[i] >= best:
                break
            p, r = seg_a[i], seg_b[i] - seg_a[i]
            js = np.arange(i + 2, n_seg)
            if len(js) == 0:
                continue
            # candidate lattice alignment from midpoints
            mid_i = p + 0.5 * r
            mid_j = seg_a[js] + 0.5 * (seg_b[js] - seg_a[js])
            base_shift = np.round(mid_i - mid_j)
            for shift in shifts:
                q = seg_a[js] + base_shift + shift
                s = seg_b[js] - seg_a[js]
                denom = r[0] * s[:, 1] - r[1] * s[:, 0]
                dp = q - p
                with np.errstate(divide="ignore", invalid="ignore"):
                    u = (dp[:, 0] * s[:, 1] - dp[:, 1] * s[:, 0]) / denom
                    v = (dp[:, 0] * r[1] - dp[:, 1] * r[0]) / denom
                hit = (np.abs(denom) > 1e-14) & (u >= 0) & (u <= 1) & (v >= 0) & (v <= 1)
                if np.any(hit):
                    jhits = js[hit]
                    t_cross = tt[jhits] + v[hit] * (tt[jhits + 1] - tt[jhits])
                    best = min(best, float(np.min(t_cross)))
    return best


def injectivity_time(model, c, sample_budget=24, horizon=4.0, n_grid=800, seed=0,
                     extra_states=()):
    """Estimate (tau_inj, k0) from sampled orbits on the energy level.

    tau_inj is the smallest first self-intersection time of the projected
    orbits found over the samples (capped at the search horizon), and
    k0 = tau_inj / 4, so projected orbit segments of length 2*k0 keep a
    factor-two injectivity margin.  ``extra_states`` lets the caller force
    specific phase points (e.g. a closed orbit under study, whose closure
    time bounds tau from above) into the sample set.
    """
    if c <= e0_cache(model):
        raise ValueError("energy must exceed the rest energy e0")
    rng = np.random.default_rng(seed)
    states = list(extra_states) + sample_energy_level(model, c, sample_budget, rng)
    tau = horizon
    for s in states:
        traj = integrate(model, s, horizon, tol=1e-9)
        t_self = _first_self_intersection(model, traj, horizon, n_grid)
        tau = min(tau, t_self)
    if not np.isfinite(tau) or tau <= 0:
        raise RuntimeError("self-intersection scan degenerate; enlarge horizon or grid")
    return float(tau), float(tau / 4.0)


_E0_CACHE = {}


def e0_cache(model):
    key = id(model)
    if key not in _E0_CACHE:
        _E0_CACHE[key] = model.rest_energy()[0]
    return _E0_CACHE[key]
