"""Closed orbits on energy levels: shooting, action minimization,
linearized Poincare maps, and spectral classification.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize

from .flow import integrate, integrate_linearized
from .frames import adapted_frame
from .models import PhaseState, LoopPath
from .spnlib import symplectic_defect, is_root_of_unity


class NonReturnError(RuntimeError):
    pass


class ShootingError(RuntimeError):
    pass


@dataclass
class SymplecticMatrix:
    entries: np.ndarray
    defect: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    @property
    def shape(self):
        return self.entries.shape


@dataclass
class SpectralClass:
    kind: str                      # hyperbolic | q-elliptic | parabolic | mixed
    eigenvalues: np.ndarray
    q: int
    angles: np.ndarray             # rotation numbers of elliptic pairs, in (0, 1/2)
    margin: float
    flags: dict = field(default_factory=dict)

    def __str__(self):
        if self.kind == "q-elliptic":
            return f"{self.q}-elliptic"
        return self.kind


@dataclass
class ClosedOrbit:
    model: object
    initial: PhaseState            # cotangent representation
    period: float
    energy: float
    winding: np.ndarray
    residual: float
    dP: np.ndarray                 # 2n x 2n transverse monodromy block
    spectral: SpectralClass
    degenerate: bool = False
    lin: object = None             # LinearizedFlow over one period
    frame: object = None

    def loop(self, samples=256):
        tt = np.linspace(0.0, self.period, samples + 1)
        xs = self.lin.sol.sol(tt)[: self.model.d].T
        return LoopPath(tt, xs)

    def segment_frame(self, t0, n_grid=800):
        """Adapted frame over the sub-segment [0, t0] of this orbit."""
        lin = integrate_linearized(self.model, self.initial, t0, tol=1e-11)
        return adapted_frame(self.model, lin, n_grid=n_grid)

    def to_record(self):
        ev = self.spectral.eigenvalues
        return {
            "x": [float(a) for a in np.asarray(self.initial.x) % 1.0],
            "p": [float(a) for a in self.initial.vec],
            "period": float(self.period),
            "energy": float(self.energy),
            "winding": [int(w) for w in self.winding],
            "residual": float(self.residual),
            "trace": float(np.trace(self.dP)),
            "eigenvalues": [[float(l.real), float(l.imag)] for l in ev],
            "class": str(self.spectral),
            "q": int(self.spectral.q),
            "degenerate": bool(self.degenerate),
        }


@dataclass
class PoincareSection:
    anchor: PhaseState             # cotangent
    energy: float
    half_width: float = 0.45

    def value(self, model, x, p):
        """Signed section coordinate: displacement against the flow direction."""
        b = model.hamiltonian_blocks(np.asarray(self.anchor.x, float),
                                     np.asarray(self.anchor.vec, float))
        n_vec = np.concatenate([b["H_p"], -b["H_x"]])
        dx = model.space.diff(x, np.asarray(self.anchor.x, float))
        dp = p - np.asarray(self.anchor.vec, float)
        return float(np.concatenate([dx, dp]) @ n_vec)

    def distance(self, model, x, p):
        dx = model.space.diff(x, np.asarray(self.anchor.x, float))
        dp = p - np.asarray(self.anchor.vec, float)
        return float(np.sqrt(np.sum(dx ** 2) + np.sum(dp ** 2)))


def poincare_return(model, section, start, max_time=10.0, tol=1e-11):
    """First return of the flow to the section; (state, return_time)."""
    s = model.to_cotangent(start)
    if abs(model.hamiltonian(s.x, s.vec) - section.energy) > 1e-6:
        raise ValueError("start state is off the section energy level")
    traj = integrate(model, s, max_time, tol=tol)
    d = model.d
    # escape the section neighborhood first, then look for a directed crossing
    nt = max(400, int(max_time * 400))
    tt = np.linspace(0.0, max_time, nt)
    ys = traj.sol.sol(tt)
    sig = np.array([section.value(model, ys[:d, k], ys[d:, k]) for k in range(nt)])
    escaped = False
    esc_tol = 1e-4
    for k in range(1, nt):
        if not escaped:
            if abs(sig[k]) > esc_tol:
                escaped = True
            continue
        if sig[k - 1] < 0.0 <= sig[k]:
            f = lambda t: section.value(model, *traj.at(t))
            t_cross = brentq(f, tt[k - 1], tt[k], xtol=1e-12)
            x, p = traj.at(t_cross)
            if section.distance(model, x, p) <= section.half_width:
                return PhaseState(x, p, "cotangent"), float(t_cross)
    raise NonReturnError(f"no section return within t={max_time}")


def vector_pair(model, s):
    b = model.hamiltonian_blocks(np.asarray(s.x, float), np.asarray(s.vec, float))
    return b["H_p"], -b["H_x"]


def _energy_project(model, z, c, iters=2):
    d = model.d
    z = z.copy()
    for _ in range(iters):
        x, p = z[:d], z[d:]
        b = model.hamiltonian_blocks(x, p)
        g = np.concatenate([b["H_x"], b["H_p"]])
        e = model.hamiltonian(x, p) - c
        z = z - (e / float(g @ g)) * g
    return z


def find_closed_orbit_shooting(model, c, seed, winding_hint=None, period_hint=None,
                               max_iter=30, tol=1e-11, classify=True):
    """Newton shooting for a closed orbit on E^-1(c).

    Unknowns are the full lifted phase point and the period; the residual
    stacks periodicity (with integer winding), the energy constraint, and a
    phase anchor.  Rank-deficient systems (continua of orbits) are solved in
    the least-squares sense and flagged degenerate.
    """
    if c <= model.rest_energy()[0] - 1e-12:
        raise ValueError("energy must exceed the rest energy e0")
    d = model.d
    s = model.to_cotangent(seed)
    z = np.concatenate([np.asarray(s.x, float), np.asarray(s.vec, float)])
    z = _energy_project(model, z, c, iters=4)

    if period_hint is not None:
        T = float(period_hint)
    else:
        b = model.hamiltonian_blocks(z[:d], z[d:])
        speed = np.linalg.norm(b["H_p"])
        T = (np.linalg.norm(winding_hint) / speed) if winding_hint is not None else 1.0 / speed
    winding = None if winding_hint is None else np.asarray(winding_hint, int)
    z_anchor = z.copy()
    b0 = model.hamiltonian_blocks(z[:d], z[d:])
    xh_anchor = np.concatenate([b0["H_p"], -b0["H_x"]])

    res_norm = np.inf
    lin = None
    for it in range(max_iter):
        lin = integrate_linearized(model, PhaseState(z[:d], z[d:], "cotangent"), T, tol=tol)
        zT = np.concatenate(lin.base_at(T))
        if winding is None:
            winding = np.round(zT[:d] - z[:d]).astype(int)
        r1 = zT - z
        r1[:d] -= winding
        r2 = model.hamiltonian(z[:d], z[d:]) - c
        r3 = float((z - z_anchor) @ xh_anchor)
        res = np.concatenate([r1, [r2, r3]])
        res_norm = np.linalg.norm(res)
        if res_norm < 1e-10:
            break
        bT = model.hamiltonian_blocks(zT[:d], zT[d:])
        xh_T = np.concatenate([bT["H_p"], -bT["H_x"]])
        bz = model.hamiltonian_blocks(z[:d], z[d:])
        dE = np.concatenate([bz["H_x"], bz["H_p"]])
        Jac = np.zeros((2 * d + 2, 2 * d + 1))
        Jac[:2 * d, :2 * d] = lin.monodromy - np.eye(2 * d)
        Jac[:2 * d, 2 * d] = xh_T
        Jac[2 * d, :2 * d] = dE
        Jac[2 * d + 1, :2 * d] = xh_anchor
        step, *_ = np.linalg.lstsq(Jac, -res, rcond=None)
        # damped update
        scale = 1.0
        for _ in range(6):
            z_new = z + scale * step[:2 * d]
            T_new = T + scale * step[2 * d]
            if T_new > 1e-3:
                lin_try = integrate(model, PhaseState(z_new[:d], z_new[d:], "cotangent"),
                                    T_new, tol=1e-9)
                zT_try = np.concatenate(lin_try.at(T_new))
                r_try = zT_try - z_new
                r_try[:d] -= winding
                if np.linalg.norm(r_try) < max(res_norm, 1e-9) * 1.5:
                    break
            scale *= 0.5
        z = z + scale * step[:2 * d]
        T = T + scale * step[2 * d]
        z = _energy_project(model, z, c)
    else:
        if res_norm > 1e-8:
            raise ShootingError(f"shooting stagnated at residual {res_norm:.2e}")

    lin = integrate_linearized(model, PhaseState(z[:d], z[d:], "cotangent"), T, tol=tol)
    zT = np.concatenate(lin.base_at(T))
    r1 = zT - z
    r1[:d] -= winding
    residual = float(np.linalg.norm(r1))
    if residual > 1e-8:
        raise ShootingError(f"closed-orbit residual {residual:.2e} exceeds 1e-8")
    frame = adapted_frame(model, lin)
    dP = frame.anchor_reduced(T)
    degher = float(np.linalg.svd(dP - np.eye(dP.shape[0]), compute_uv=False)[-1])
    degenerate = degher < 1e-6
    if degenerate:
        warnings.warn("closed orbit is non-isolated (dP - I nearly singular)")
    spectral = classify_spectrum(dP) if classify else None
    return ClosedOrbit(model, PhaseState(z[:d] % 1.0, z[d:], "cotangent"),
                       float(T), float(model.hamiltonian(z[:d], z[d:])),
                       winding, residual, dP, spectral,
                       degenerate=degenerate, lin=lin, frame=frame)


def find_closed_orbit_action(model, c, winding, loop_budget=None, classify=True):
    """Free-period action minimization over a trigonometric loop family in a
    fixed nonzero homotopy class, polished by shooting."""
    winding = np.asarray(winding, int)
    if not np.any(winding):
        raise ValueError("winding must be nonzero for action minimization")
    budget = {"modes": 2, "samples": 96, "restarts": 2, "maxiter": 400, "seed": 0}
    budget.update(loop_budget or {})
    d = model.d
    rng = np.random.default_rng(budget["seed"])
    modes, nsamp = budget["modes"], budget["samples"]
    n_coeff = 2 * modes * d

    def unpack(theta):
        base = theta[:d]
        coeffs = theta[d:d + n_coeff].reshape(modes, 2, d)
        T = float(np.exp(theta[-1]))
        return base, coeffs, T

    def objective(theta):
        base, coeffs, T = unpack(theta)
        if not (1e-2 < T < 1e3):
            return 1e6
        tt = np.linspace(0.0, T, nsamp, endpoint=False)
        w = 2 * np.pi / T
        xs = base + np.outer(tt / T, winding)
        vs = np.tile(winding / T, (nsamp, 1)).astype(float)
        for k in range(modes):
            ck, sk = coeffs[k, 0], coeffs[k, 1]
            ang = (k + 1) * w * tt
            xs = xs + np.outer(np.cos(ang) - 1.0, ck) + np.outer(np.sin(ang), sk)
            vs = vs + np.outer(-(k + 1) * w * np.sin(ang), ck) \
                    + np.outer((k + 1) * w * np.cos(ang), sk)
        lag = model.lagrangian(xs, vs)
        return float(np.mean(lag + c) * T)

    best = None
    for r in range(budget["restarts"]):
        theta0 = np.zeros(d + n_coeff + 1)
        theta0[:d] = rng.random(d)
        if r > 0:
            theta0[d:d + n_coeff] = 0.05 * rng.standard_normal(n_coeff)
        speed_guess = np.sqrt(max(2 * (c - model.rest_energy()[0]), 1e-4))
        theta0[-1] = np.log(np.linalg.norm(winding) / speed_guess)
        out = minimize(objective, theta0, method="Nelder-Mead",
                       options={"maxiter": budget["maxiter"] * len(theta0),
                                "xatol": 1e-10, "fatol": 1e-12})
        if best is None or out.fun < best.fun:
            best = out
    base, coeffs, T = unpack(best.x)
    if T < 1e-2 or np.linalg.norm(winding) / T > 1e3:
        warnings.warn("action minimizer nearly collapsed; c may be below the "
                      "critical value for this class")
    # initial state of the minimizing loop -> shooting polish
    w = 2 * np.pi / T
    x0 = base.copy()
    v0 = winding / T
    for k in range(modes):
        ck, sk = coeffs[k, 0], coeffs[k, 1]
        v0 = v0 + (k + 1) * w * sk
    seed = PhaseState(x0, v0, "tangent")
    return find_closed_orbit_shooting(model, c, seed, winding_hint=winding,
                                      period_hint=T, classify=classify)


def linearized_poincare(model, orbit):
    """Transverse monodromy block in the adapted frame, as a SymplecticMatrix."""
    if orbit.residual > 1e-7:
        raise ValueError("orbit residual too large for a trustworthy Poincare map")
    frame = orbit.frame or adapted_frame(model, orbit.lin)
    dP = frame.anchor_reduced(orbit.period)
    defect = symplectic_defect(dP)
    if defect > 1e-7:
        raise RuntimeError(f"reduced monodromy defect {defect:.2e} exceeds 1e-7")
    return SymplecticMatrix(dP, defect)


def section_return_map_fd(model, orbit, h=1e-7):
    """Independent dP pipeline: finite differences of the Poincare return map
    on the frame's transverse basis at the orbit's initial point."""
    frame = orbit.frame or adapted_frame(model, orbit.lin)
    Phi0 = frame.Phi[0]
    n = frame.n
    d = model.d
    cols_idx = frame._nidx
    section = PoincareSection(orbit.initial, orbit.energy, half_width=0.45)
    z0 = np.concatenate([np.asarray(orbit.initial.x, float), orbit.initial.vec])
    out = np.zeros((2 * n, 2 * n))
    basis = Phi0[:, cols_idx]
    # dual rows: symplectic inverse selects frame coordinates
    Phi0_inv = np.linalg.inv(Phi0)
    for j in range(2 * n):
        acc = []
        for sgn in (+1.0, -1.0):
            z = z0 + sgn * h * basis[:, j]
            z = _energy_project(model, z, orbit.energy)
            state, t_ret = poincare_return(model, section,
                                           PhaseState(z[:d], z[d:], "cotangent"),
                                           max_time=3.0 * orbit.period)
            zr = np.concatenate([np.asarray(state.x, float), state.vec])
            dz = zr - z0
            dz[:d] = model.space.diff(zr[:d], z0[:d])
            acc.append(dz)
        diff = (acc[0] - acc[1]) / (2 * h)
        out[:, j] = (Phi0_inv @ diff)[cols_idx]
    return out


def classify_spectrum(A, tol=1e-7, root_order=12):
    """Spectral taxonomy of a symplectic matrix.

    hyperbolic: no unit-modulus eigenvalue; q-elliptic: every unit-modulus
    eigenvalue is non-real and none is a root of unity up to `root_order`;
    parabolic: unit-modulus ones are all roots of unity; mixed: the rest.
    """
    A = np.asarray(getattr(A, "entries", A), float)
    lam = np.linalg.eigvals(A)
    on_circle = np.abs(np.abs(lam) - 1.0) < tol
    unit = lam[on_circle]
    off = lam[~on_circle]
    if unit.size == 0:
        margin = float(np.min(np.abs(np.abs(lam) - 1.0)))
        return SpectralClass("hyperbolic", lam, 0, np.array([]), margin)
    is_real = np.abs(unit.imag) < tol
    roots = np.array([is_root_of_unity(l, root_order, tol) for l in unit])
    nonreal_clean = ~is_real & ~roots
    angles = np.angle(unit[nonreal_clean & (unit.imag > 0)]) / (2 * np.pi)
    q = int(np.sum(nonreal_clean)) // 2
    if np.all(nonreal_clean):
        margin = _root_margin(unit, root_order)
        return SpectralClass("q-elliptic", lam, q, np.sort(angles), margin)
    if np.all(roots | is_real):
        # real unit-modulus eigenvalues are +-1, themselves roots of unity
        margin = float(np.max(np.abs(np.abs(unit) - 1.0)))
        return SpectralClass("parabolic", lam, q, np.sort(angles), margin)
    return SpectralClass("mixed", lam, q, np.sort(angles), 0.0)


def _root_margin(unit, root_order):
    worst = np.inf
    for l in unit:
        th = np.angle(l) / (2 * np.pi)
        for k in range(1, root_order + 1):
            worst = min(worst, abs(k * th - round(k * th)) / k)
    return float(worst)


def is_4_elementary(spectral, tol=1e-7):
    """No resonance sum(m_i * a_i) in Z with 1 <= sum|m_i| <= 4 among the
    elliptic rotation numbers."""
    if spectral.kind != "q-elliptic":
        raise ValueError("4-elementary test requires a q-elliptic spectrum")
    a = np.asarray(spectral.angles, float)
    qn = len(a)
    if qn == 0:
        return False
    from itertools import product
    for m in product(range(-4, 5), repeat=qn):
        s = sum(abs(k) for k in m)
        if not (1 <= s <= 4):
            continue
        val = float(np.dot(m, a))
        if abs(val - round(val)) <= tol:
            return False
    return True
