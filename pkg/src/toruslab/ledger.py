"""Quantitative constants attached to an energy level.

The perturbation machinery needs a small ledger of bounds before it can
promise anything: sup norms of curvature and transfer matrices along the
level, an injectivity scale for orbit segments, a modulus of continuity for
the transfer path, and the floor constants derived from them.  Everything
here is *sampled* — suprema over a finite draw of orbit segments, inflated
by a uniform safety factor — and the ledger records, per constant, how each
number was obtained.  Nothing is certified; the point is a reproducible,
self-consistent set of numbers the realization step can be audited against.

Constants, in dependency order:

  k0          injectivity scale: quarter of the smallest observed first
              self-intersection time; segments of length <= 2*k0 stay
              embedded with a factor-two margin.
  k1          >= sup ||K(t)|| along sampled segments, plus the declared
              neighborhood radius.
  k2          >= sup ||X(t)|| of the reduced transfer over [0, 2*k0]
              (symplectic, so inverse norms match).
  k3(lam)     modulus of continuity of t -> X(t) at lag lam, measured as
              a Lipschitz slope.
  lambda      bump half-width, halved until 2*k2*k3(lam) <= 0.5/k2^2.
  a0          from the genericity functional: Phi_n > 2*a0^2.
  k4, k5      eigenvalue-gap and solver-stability constants (closed form).
  rho         amplitude radius spending a fixed fraction of the remaining
              contraction margin on the bump.
  k6          the derivative floor (k2^-2 - 2 k2 k3 - rho k2^2 |delta|_0)
              / (k2 k5); positive by construction.
  k7          cutoff-family bound: C^2 norm of a built tube potential is
              at most k7 * (|B|_0 + eps |B|_1 + eps^2 |B|_2).
  eps1        largest tube radius accepted by the chart on the sampled
              straight segments (curved segments admit no chart).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .flow import e0_cache, injectivity_time, sample_energy_level
from .frames import FrameQualityWarning, adapted_frame, extract_curvature
from .genericity import h_n, phi_n_estimate
from .potential import TubeChart, TubeChartError
from .profiles import BumpProfile, DeltaBump, alpha1_norms, mollifier_mass

SAFETY = 1.1            # uniform inflation of every sampled supremum
K1_FLOOR = 1e-3         # curvature bound never reported as zero
BUDGET_FRACTION = 0.45  # slice of the contraction margin spent on the bump
MAX_HALVINGS = 60
EPS1_FLOOR = 1e-6


class InfeasibleLedgerError(RuntimeError):
    """The sampled bounds leave no feasible bump width or amplitude."""


# ---------------------------------------------------------------------------
# ledger record


@dataclass(frozen=True)
class ConstantsLedger:
    """Measured and derived constants for one (model, energy) pair."""

    n: int
    energy: float
    neighborhood_radius: float
    k0: float
    k1: float
    k2: float
    k3_slope: float
    lambda_width: float
    a0: float
    k4: float
    k5: float
    k6: float
    k7: float
    rho: float
    delta_c0: float
    eps1: float
    provenance: dict = field(default_factory=dict, repr=False)

    def k3(self, lam=None):
        """Modulus of continuity of the transfer path at lag lam."""
        return self.k3_slope * (self.lambda_width if lam is None else lam)

    def margin(self, lam=None):
        """Contraction margin 1/k2^2 - 2 k2 k3(lam); positive when feasible."""
        return 1.0 / self.k2 ** 2 - 2.0 * self.k2 * self.k3(lam)

    def check(self):
        """Assert the ledger invariants; raise InfeasibleLedgerError if violated."""
        bad = []
        if not self.k2 > 1.0:
            bad.append("k2 <= 1")
        if not self.margin() > 0.0:
            bad.append("contraction margin not positive")
        if not self.k6 > 0.0:
            bad.append("k6 not positive")
        for name in ("k0", "k1", "k2", "lambda_width", "a0", "k4", "k5",
                     "k7", "rho", "delta_c0", "eps1"):
            if not getattr(self, name) > 0.0:
                bad.append("%s not positive" % name)
        if bad:
            raise InfeasibleLedgerError("; ".join(bad))
        return self

    def to_dict(self):
        out = {
            "n": self.n,
            "energy": self.energy,
            "neighborhood_radius": self.neighborhood_radius,
            "k0": self.k0, "k1": self.k1, "k2": self.k2,
            "k3_slope": self.k3_slope, "lambda_width": self.lambda_width,
            "a0": self.a0, "k4": self.k4, "k5": self.k5, "k6": self.k6,
            "k7": self.k7, "rho": self.rho, "delta_c0": self.delta_c0,
            "eps1": self.eps1,
            "provenance": self.provenance,
        }
        return out

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True,
                          default=float)


# ---------------------------------------------------------------------------
# closed-form pieces


def cutoff_family_bound(n):
    """k7 such that |u|_C2 <= k7 (|B|_0 + eps |B|_1 + eps^2 |B|_2).

    Derived from the product rule applied to u = alpha_eps * (1/2) x^T B x
    in the tube chart: the cutoff contributes its scaled sup norms
    (A0, A1, A2), the quadratic form contributes |x| <= eps/2 sqrt(n)
    factors, and each mixed term lands in one of the three budget slots.
    """
    a0n, a1n, a2n = alpha1_norms()
    rn = math.sqrt(n)
    zero_order = a0n + rn * a1n + n * max(a1n ** 2, a2n) / 8.0
    first_order = n * a1n / 8.0 + rn / 2.0
    second_order = n / 8.0
    return float(max(zero_order, first_order, second_order))


def gap_floor(n, a0, k1):
    """k4: guaranteed eigenvalue-gap floor at a genericity witness."""
    if n == 1:
        # no eigenvalue pairs: the solver never divides by a gap
        return a0
    m = n * (n - 1) // 2
    return a0 / (2.0 * k1) ** (m - 1)


def solver_stability(n, k1, k4):
    """k5: conditioning constant of the coefficient-recovery map."""
    if n == 1:
        return 1.0 + k1
    return max(1.0 / k4, 1.0 + 4.0 * k1 / k4, 1.0 + k1)


def bump_c0_norm(lam):
    """Sup norm of the normalized bump of half-width lam."""
    return DeltaBump(0.0, lam).c0_norm(0)


# ---------------------------------------------------------------------------
# estimation sweep


def _transfer_stats(frame):
    """(sup ||X||, Lipschitz slope of t -> X(t)) on the frame's grid."""
    X, _ = frame.reduced_transfer()
    norms = np.linalg.norm(X, ord=2, axis=(1, 2))
    dt = frame.times[1] - frame.times[0]
    diffs = np.linalg.norm(X[1:] - X[:-1], ord=2, axis=(1, 2))
    return float(np.max(norms)), float(np.max(diffs) / dt)


def _max_chart_radius(model, frame, t0, hi=4.0, iters=24):
    """Largest tube radius the chart accepts on this frame, by bisection.

    Returns 0.0 when even tiny tubes are rejected (curved segment, or the
    window already wraps the torus)."""
    def accepts(eps):
        try:
            TubeChart(model, frame, t0, eps)
            return True
        except TubeChartError:
            return False

    if not accepts(EPS1_FLOOR):
        return 0.0
    if accepts(hi):
        return float(hi)
    lo = EPS1_FLOOR
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if accepts(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)


def estimate_constants(model, c, neighborhood_radius=0.0, sample_budget=12,
                       seed=0, extra_states=(), n_grid=400, tol=1e-10,
                       injectivity_budget=24, phi_floor=1e-8):
    """Sample the energy level and assemble the constants ledger.

    ``extra_states`` forces specific phase points into every sweep — pass
    the closed orbits under study so their closure times bound k0 and their
    transfer growth is reflected in k2.  Raises InfeasibleLedgerError when
    no bump width satisfies the contraction margin, or when the genericity
    estimate vanishes (a0 undefined).
    """
    if c <= e0_cache(model):
        raise ValueError("energy must exceed the rest energy e0")
    n = model.space.n
    rng = np.random.default_rng(seed)
    prov = {}

    # -- injectivity scale --------------------------------------------------
    tau_inj, k0 = injectivity_time(model, c, sample_budget=injectivity_budget,
                                   seed=seed, extra_states=extra_states)
    prov["k0"] = {"value": k0, "how": "quarter of the smallest first "
                  "self-intersection time over %d sampled orbits"
                  % (injectivity_budget + len(extra_states))}

    # -- sup norms along segments of length 2*k0 ----------------------------
    states = list(extra_states) + sample_energy_level(model, c, sample_budget,
                                                      rng)
    horizon = 2.0 * k0
    sup_K = 0.0
    sup_X = 1.0
    slope = 0.0
    used = 0
    failures = 0
    chart_radii = []
    chart_note = "segment length 2*k0"
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FrameQualityWarning)
        for s in states:
            try:
                fr = adapted_frame(model, s, horizon=horizon, n_grid=n_grid,
                                   tol=tol)
                path = extract_curvature(model, fr)
                xs, xl = _transfer_stats(fr)
            except (RuntimeError, np.linalg.LinAlgError):
                failures += 1
                continue
            used += 1
            sup_K = max(sup_K, path.sup_norm())
            sup_X = max(sup_X, xs)
            slope = max(slope, xl)
            r2 = _max_chart_radius(model, fr, horizon)
            if r2 > 0.0:
                chart_radii.append(r2)
            else:
                # retry at the shorter admissible window before giving up
                r1 = _max_chart_radius(model, fr, k0)
                if r1 > 0.0:
                    chart_radii.append(r1)
                    chart_note = "segment length k0 (length 2*k0 wraps)"
    if used < 3:
        raise RuntimeError(
            "constants sweep: only %d of %d segments usable" % (used,
                                                                len(states)))
    if failures > len(states) / 3:
        raise RuntimeError(
            "constants sweep: %d of %d segments failed frame extraction"
            % (failures, len(states)))

    k1 = max(SAFETY * (sup_K + neighborhood_radius), K1_FLOOR)
    k2 = SAFETY * sup_X
    k3_slope = SAFETY * slope
    prov["k1"] = {"value": k1, "how": "%.2f * (sup |K| + radius %g) over %d "
                  "segments, floor %g" % (SAFETY, neighborhood_radius, used,
                                          K1_FLOOR), "samples": used}
    prov["k2"] = {"value": k2, "how": "%.2f * sup |X(t)|, t in [0, 2 k0], "
                  "over %d segments" % (SAFETY, used), "samples": used}
    prov["k3"] = {"value": k3_slope, "how": "%.2f * max finite-difference "
                  "slope of t -> X(t); k3(lam) = slope * lam" % SAFETY,
                  "samples": used}

    # -- bump width: halve until the contraction margin survives -------------
    lam = k0 / 8.0
    target = 0.5 / k2 ** 2
    for _ in range(MAX_HALVINGS):
        if 2.0 * k2 * (k3_slope * lam) <= target:
            break
        lam *= 0.5
    else:
        raise InfeasibleLedgerError(
            "no bump width down to %g satisfies the contraction margin "
            "(k2=%.3g, k3 slope=%.3g)" % (lam, k2, k3_slope))
    margin = 1.0 / k2 ** 2 - 2.0 * k2 * k3_slope * lam
    prov["lambda"] = {"value": lam, "how": "k0/8 halved until 2 k2 k3(lam) "
                      "<= 0.5/k2^2"}

    # -- genericity floor ----------------------------------------------------
    phi = phi_n_estimate(model, c, theta_samples=max(6, sample_budget // 2),
                         t_grid=48, k0=k0, seed=seed + 1, tol=tol)
    if not phi.value > phi_floor:
        raise InfeasibleLedgerError(
            "genericity estimate %.3g below floor %g; a0 undefined"
            % (phi.value, phi_floor))
    a0 = math.sqrt(phi.value / 2.0) / SAFETY
    prov["a0"] = {"value": a0, "how": "sqrt(Phi_hat/2)/%.2f from the "
                  "eigenvalue-gap functional over %d sampled orbits"
                  % (SAFETY, phi.samples), "samples": phi.samples}

    k4 = gap_floor(n, a0, k1)
    k5 = solver_stability(n, k1, k4)
    prov["k4"] = {"value": k4, "how": "a0 (n=1: solver never divides by a "
                  "gap)" if n == 1 else "a0 / (2 k1)^(m-1), m = n(n-1)/2"}
    prov["k5"] = {"value": k5, "how": "1 + k1 (n=1)" if n == 1 else
                  "max(1/k4, 1 + 4 k1/k4, 1 + k1)"}

    # -- amplitude radius and the derivative floor ---------------------------
    delta_c0 = bump_c0_norm(lam)
    rho = BUDGET_FRACTION * margin / (k2 ** 2 * delta_c0)
    k6 = (margin - rho * k2 ** 2 * delta_c0) / (k2 * k5)
    prov["rho"] = {"value": rho, "how": "%.2f of the contraction margin "
                   "spent on the bump: margin/(k2^2 |delta|_0)"
                   % BUDGET_FRACTION}
    prov["k6"] = {"value": k6, "how": "(1/k2^2 - 2 k2 k3 - rho k2^2 "
                  "|delta|_0) / (k2 k5)"}

    k7 = cutoff_family_bound(n)
    prov["k7"] = {"value": k7, "how": "closed-form cutoff-family bound from "
                  "the measured sup norms of the transverse cutoff"}

    # -- tube radius ---------------------------------------------------------
    if chart_radii:
        eps1 = float(min(chart_radii))
        prov["eps1"] = {"value": eps1, "how": "min over %d chart-eligible "
                        "segments of the bisected acceptance radius, %s"
                        % (len(chart_radii), chart_note),
                        "samples": len(chart_radii)}
    else:
        eps1 = EPS1_FLOOR
        prov["eps1"] = {"value": eps1, "how": "floor: no sampled segment "
                        "admits a tube chart (all curved or wrapping)"}

    ledger = ConstantsLedger(
        n=n, energy=float(c), neighborhood_radius=float(neighborhood_radius),
        k0=k0, k1=k1, k2=k2, k3_slope=k3_slope, lambda_width=lam, a0=a0,
        k4=k4, k5=k5, k6=k6, k7=k7, rho=rho, delta_c0=delta_c0, eps1=eps1,
        provenance=prov)
    return ledger.check()


# ---------------------------------------------------------------------------
# profile construction


def select_bump_time(path, k0, grid_n=481):
    """Bump center: argmax of the eigenvalue-gap functional h_n(K(t)) over
    [k0/4, 3*k0/4]; ties resolved to the smallest time.  For n = 1 the
    functional is constant and the window's left endpoint is returned."""
    ts = np.linspace(k0 / 4.0, 3.0 * k0 / 4.0, grid_n)
    if path.n == 1:
        return float(ts[0])
    vals = np.array([h_n(path.at(t)) for t in ts])
    return float(ts[int(np.argmax(vals))])


def build_profile(ledger, t0, tau=None, path=None, kind="ledger", eps=None,
                  exclusions=()):
    """Assemble a bump profile on [0, t0] from the ledger's numbers.

    kind="ledger" uses the certified width and amplitude-matched ramp —
    the profile the floor constant k6 is derived for.  kind="practical"
    widens the bump to k0/8 and the ramp to lam/4 so finite differences
    across the bump stay resolvable; it keeps the ledger amplitude but
    certifies nothing (the contraction margin is generally negative at
    that width).  ``tau`` defaults to the gap-functional rule when
    ``path`` is given, else to k0/4."""
    if not ledger.k0 <= t0 <= 2.0 * ledger.k0 + 1e-12:
        raise ValueError("segment length must lie in [k0, 2*k0]")
    if tau is None:
        tau = select_bump_time(path, ledger.k0) if path is not None \
            else ledger.k0 / 4.0
    rho = ledger.rho
    if kind == "ledger":
        lam = ledger.lambda_width
    elif kind == "practical":
        lam = ledger.k0 / 8.0
    else:
        raise ValueError("kind must be 'ledger' or 'practical'")
    room = min(tau - lam, t0 - tau - lam)
    if room <= 0.0:
        raise ValueError("bump of width %.3g does not fit at tau=%.3g "
                         "inside (0, %.3g)" % (lam, tau, t0))
    # certified ramp tracks the amplitude radius (the window correction has
    # to stay inside the same budget); the practical ramp only needs to be
    # smooth on the bump's own scale
    ramp = min(0.9 * rho, 0.9 * room) if kind == "ledger" \
        else min(lam / 4.0, 0.9 * room)
    profile = BumpProfile(t0=float(t0), tau=float(tau), lam=float(lam),
                          ramp=float(ramp), eps=float(
                              ledger.eps1 if eps is None else eps),
                          n=ledger.n, exclusions=list(exclusions))
    profile.rho = rho   # amplitude radius travels with the profile
    return profile
