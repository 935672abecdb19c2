"""Preset model catalogue.

Every preset is periodic by construction and carries closed-form
derivatives, so the flow, linearization and curvature machinery is exact
up to integration error.  The magnetic preset uses a constant one-form
(0.05 dx2 by default): it is closed but not exact on the torus, which
separates the contractible critical value from the full one while keeping
all fields 1-periodic.
"""

import numpy as np

from .fields import ConstantMetric, ConstantOneForm, TrigPotential
from .models import LagrangianModel, PhaseState, TorusSpace


def free_torus(d=2):
    """Geodesic flow of the flat metric; every orbit is a straight line."""
    return LagrangianModel(TorusSpace(d), name=f"free-torus-d{d}")


def pendulum_torus(eps=0.1):
    """d = 2, V = eps cos(2 pi x1); x2 is cyclic.

    At energy c > eps the vertical lines x1 = 0 and x1 = 1/2 carry relative
    equilibria: a hyperbolic one over the potential maximum and an elliptic
    one over the minimum.  Their Floquet data is closed-form, which makes
    this the main oracle model.
    """
    V = TrigPotential([(eps, (1, 0), 0.0)])
    m = LagrangianModel(TorusSpace(2), potential=V, name=f"pendulum-torus-eps{eps}")
    m.eps = eps
    return m


def two_wave(eps1=0.1, eps2=0.2):
    """d = 3, V = eps1 cos(2 pi x1) + eps2 cos(2 pi x2).

    Two incommensurate transverse wells break the curvature eigenvalue
    degeneracy along generic orbits, the regime the n = 2 genericity
    functionals probe.
    """
    V = TrigPotential([(eps1, (1, 0, 0), 0.0), (eps2, (0, 1, 0), 0.0)])
    m = LagrangianModel(TorusSpace(3), potential=V, name=f"two-wave-{eps1}-{eps2}")
    m.eps = (eps1, eps2)
    return m


def magnetic(strength=0.05):
    """d = 2, A = strength * dx2, V = 0.

    The form is closed (constant) so the Euler-Lagrange flow is free motion,
    but loops winding in x2 acquire action -strength per revolution, pushing
    the full critical value above the contractible one.
    """
    A = ConstantOneForm(np.array([0.0, strength]))
    m = LagrangianModel(TorusSpace(2), one_form=A, name=f"magnetic-{strength}")
    m.strength = strength
    return m


def skewed_free(G=None):
    """Constant non-diagonal metric, zero potential; exercises G-orthonormal frames."""
    if G is None:
        G = np.array([[1.0, 0.3], [0.3, 1.0]])
    m = LagrangianModel(TorusSpace(len(G)), metric=ConstantMetric(G), name="skewed-free")
    return m


CATALOG = {
    "free-torus": free_torus,
    "pendulum-torus": pendulum_torus,
    "two-wave": two_wave,
    "magnetic": magnetic,
    "skewed-free": skewed_free,
}


def orbit_seed_states(model, c, n_extra=0, rng=None):
    """Good starting states for closed-orbit shooting at energy c.

    Cyclic-coordinate presets get their vertical lines over the potential
    critical points (closed by symmetry, one seed per critical x1-slice);
    everything else gets axis-aligned directions from the origin.  Extra
    random energy-level samples can be appended for wider searches.
    """
    d = model.d
    seeds = []

    def state_at(x, direction):
        V = float(model.potential.value(x))
        if c <= V:
            return None
        G = model.metric.value(x)
        quad = float(direction @ G @ direction)
        v = np.sqrt(2.0 * (c - V) / quad) * direction
        return PhaseState(np.array(x, dtype=float), v, "tangent")

    pot = getattr(model, "potential", None)
    if pot is not None and getattr(pot, "waves", None) is not None:
        used = np.nonzero(np.any(pot.waves != 0, axis=0))[0]
        cyclic = [j for j in range(d) if j not in used]
        # critical slices of each cosine wave: argument 0 and pi; travel
        # along a cyclic coordinate so the slice is a relative equilibrium
        for wave, phase in zip(pot.waves, pot.phases):
            k = np.nonzero(wave)[0]
            if len(k) == 1 and abs(phase) < 1e-12 and cyclic:
                j = int(k[0])
                for x1 in (0.0, 0.5 / abs(wave[j])):
                    x = np.zeros(d)
                    x[j] = x1
                    direction = np.zeros(d)
                    direction[cyclic[0]] = 1.0
                    s = state_at(x, direction)
                    if s is not None and not any(
                            np.allclose(s.x, t.x) and np.allclose(s.vec, t.vec)
                            for t in seeds if t is not None):
                        seeds.append(s)
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        s = state_at(np.zeros(d), e)
        if s is not None and not any(
                np.allclose(s.x, t.x) and np.allclose(s.vec, t.vec)
                for t in seeds if t is not None):
            seeds.append(s)
    if n_extra:
        from .flow import sample_energy_level
        rng = rng or np.random.default_rng(0)
        seeds.extend(sample_energy_level(model, c, n_extra, rng))
    return [s for s in seeds if s is not None]


def build_preset(name, **kwargs):
    if name == "cat-suspension":
        from .suspension import CatSuspension
        return CatSuspension(**kwargs)
    if name not in CATALOG:
        raise KeyError(f"unknown preset '{name}'; available: {sorted(CATALOG)} + ['cat-suspension']")
    return CATALOG[name](**kwargs)
