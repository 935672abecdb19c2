"""Synthetic suspension flows with known entropy.

The entropy estimators need a validation target whose topological entropy
is a closed-form number, and no Tonelli preset provides one.  A unit-roof
suspension of a hyperbolic toral automorphism does: the flow's entropy
equals the map's, which is the log of the leading eigenvalue.  These
flows are *not* Lagrangian -- they plug into the entropy module through
the same minimal trajectory interface as an energy level and nothing
else.
"""

from dataclasses import dataclass

import numpy as np

CAT_MATRIX = np.array([[2, 1], [1, 1]], dtype=np.int64)


def _mobius(m):
    """Moebius function via trial factorization (m is desk-scale)."""
    if m == 1:
        return 1
    mu, k, prev = 1, 2, 0
    while k * k <= m:
        if m % k == 0:
            m //= k
            if m % k == 0:
                return 0
            mu = -mu
        else:
            k += 1
    return -mu if m > 1 else mu


class CatSuspension:
    """Unit-roof suspension of the toral automorphism [[2, 1], [1, 1]].

    Phase points are (x1, x2, s) with x on the 2-torus and roof
    coordinate s in [0, 1); time t pushes s up, and each wrap applies the
    matrix to x.  Entropy of the flow equals log of the leading
    eigenvalue (3 + sqrt 5)/2.
    """

    name = "cat-suspension"
    synthetic = True          # not a Tonelli model: no metric, no energy
    dim = 3

    def __init__(self, matrix=None):
        A = CAT_MATRIX if matrix is None else np.asarray(matrix, dtype=np.int64)
        if A.shape != (2, 2) or round(float(np.linalg.det(A))) != 1:
            raise ValueError("suspension base must be a 2x2 unimodular integer matrix")
        ev = np.abs(np.linalg.eigvals(A.astype(float)))
        if np.any(np.abs(ev - 1.0) < 1e-9):
            raise ValueError("suspension base must be hyperbolic")
        self.A = A
        self.expansion = float(ev.max())

    @property
    def entropy(self):
        return float(np.log(self.expansion))

    # --- trajectory interface used by the entropy estimators -----------

    def seed_grid(self, budget, region=None, rng=None):
        """Deterministic product grid on T^2 x [0,1), at most `budget` points."""
        m = max(2, int(np.floor(budget ** (1.0 / 3.0))))
        ax = np.arange(m) / m
        pts = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), axis=-1)
        return pts.reshape(-1, 3)

    def grid_spacing(self, budget):
        m = max(2, int(np.floor(budget ** (1.0 / 3.0))))
        return 1.0 / m

    def advance(self, pts, t):
        """Flow for time t >= 0, vectorized over pts of shape (..., 3)."""
        pts = np.asarray(pts, dtype=float)
        x, s = pts[..., :2], pts[..., 2]
        tot = s + t
        k = np.floor(tot).astype(np.int64)
        out_x = np.empty_like(x)
        for kv in np.unique(k):
            Ak = np.linalg.matrix_power(self.A, int(kv)).astype(float)
            sel = k == kv
            out_x[sel] = x[sel] @ Ak.T
        out = np.empty_like(pts)
        out[..., :2] = np.mod(out_x, 1.0)
        out[..., 2] = tot - k
        return out

    def distance(self, P, Q):
        """max(torus distance on x, circle distance on s), broadcastable."""
        P, Q = np.asarray(P, dtype=float), np.asarray(Q, dtype=float)
        dx = P[..., :2] - Q[..., :2]
        dx -= np.round(dx)
        ds = P[..., 2] - Q[..., 2]
        ds = np.abs(ds - np.round(ds))
        return np.maximum(np.linalg.norm(dx, axis=-1), ds)

    @property
    def diameter(self):
        return float(np.hypot(0.5, 0.5))

    def max_speed(self):
        # roof motion has unit speed; x only jumps at the gluing
        return 1.0

    # --- periodic-orbit census -----------------------------------------

    def fixed_point_count(self, m):
        """#Fix(A^m) = |det(A^m - I)| = trace(A^m) - 2 for hyperbolic A."""
        Am = np.linalg.matrix_power(self.A, int(m))
        return int(round(abs(np.linalg.det(Am.astype(float) - np.eye(2)))))

    def prime_orbit_count(self, m):
        """Closed orbits of the map with least period exactly m."""
        total = sum(_mobius(m // k) * self.fixed_point_count(k)
                    for k in range(1, m + 1) if m % k == 0)
        assert total % m == 0
        return total // m

    def orbit_registry(self, T_max):
        """Registry of (period, multiplicity) records up to flow period T_max.

        Unit roof: a least-period-m point of the map closes at flow time m.
        """
        T_max = int(np.floor(T_max))
        return [{"period": float(m), "count": self.prime_orbit_count(m)}
                for m in range(1, T_max + 1)]


@dataclass
class EnergyLevelFlow:
    """Adapter exposing one energy level of a Lagrangian model through the
    trajectory interface the entropy estimators consume.

    States are (x, p) rows; the metric is the product of torus distance on
    x and Euclidean distance on p, which is flow-equivalent to any other
    choice for entropy purposes.
    """

    model: object
    c: float
    rk_step: float = 0.02

    def __post_init__(self):
        e0 = self.model.rest_energy()[0]
        if self.c <= e0:
            raise ValueError(f"energy level c={self.c} does not project onto the "
                             f"whole torus (needs c > e0={e0:.6g})")
        self.dim = 2 * self.model.d

    def seed_grid(self, budget, region=None, rng=None):
        """Product grid: torus positions x unit velocity directions.

        d = 2 levels get a regular angle grid; higher d falls back to a
        seeded direction sample so the grid stays deterministic.
        """
        d = self.model.d
        rng = rng or np.random.default_rng(0)
        n_dir = max(4, int(round((budget / 4) ** (1.0 / (2 * d - 1)) if d > 2 else
                                 (budget ** (1.0 / 3.0)))))
        n_x = max(2, int(np.floor((budget / n_dir) ** (1.0 / d))))
        ax = np.arange(n_x) / n_x
        mesh = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
        if d == 2:
            th = 2.0 * np.pi * np.arange(n_dir) / n_dir
            dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        else:
            dirs = rng.standard_normal((n_dir, d))
            dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
        pts = []
        for u in dirs:
            x = mesh
            # speed fixed by the energy: E = |v|_G^2/2 + V(x) = c
            vsq = 2.0 * (self.c - self.model.potential.value(x))
            keep = vsq > 1e-12
            x = x[keep]
            G = self.model.metric.value(x)
            quad = np.einsum("i,...ij,j->...", u, G, u)
            v = np.sqrt(vsq[keep] / quad)[:, None] * u
            p = self.model.momentum(x, v)
            pts.append(np.concatenate([x, p], axis=-1))
        self._n_x, self._n_dir = n_x, n_dir
        return np.concatenate(pts, axis=0)

    def grid_spacing(self, budget):
        self.seed_grid(budget)
        return 1.0 / self._n_x

    def max_speed(self):
        return float(np.sqrt(2.0 * self.c) * 1.5)

    def _rhs(self, states):
        d = self.model.d
        x, p = states[..., :d], states[..., d:]
        v = self.model.velocity(x, p)
        pdot = -self.model.potential.grad(x)
        return np.concatenate([v, pdot], axis=-1)

    def advance(self, pts, t):
        """Fixed-step RK4 batch integration for time t (constant metric
        and one-form assumed, which covers every catalogued preset)."""
        y = np.array(pts, dtype=float)
        n_steps = max(1, int(np.ceil(t / self.rk_step)))
        h = t / n_steps
        for _ in range(n_steps):
            k1 = self._rhs(y)
            k2 = self._rhs(y + 0.5 * h * k1)
            k3 = self._rhs(y + 0.5 * h * k2)
            k4 = self._rhs(y + h * k3)
            y += (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        d = self.model.d
        y[..., :d] = np.mod(y[..., :d], 1.0)
        return y

    def distance(self, P, Q):
        d = self.model.d
        dx = P[..., :d] - Q[..., :d]
        dx -= np.round(dx)
        dp = P[..., d:] - Q[..., d:]
        return np.maximum(np.linalg.norm(dx, axis=-1), np.linalg.norm(dp, axis=-1))

    @property
    def diameter(self):
        return float(max(0.5 * np.sqrt(self.model.d), 2.0 * np.sqrt(2.0 * self.c)))

    def orbit_registry(self, T_max, max_winding=None):
        """Winding-class registry for potential-free models: one orbit
        family per lattice class, period |w|_G / sqrt(2c)."""
        d = self.model.d
        G = self.model.metric.value(np.zeros(d))
        speed = np.sqrt(2.0 * self.c)
        R = max_winding or int(np.ceil(T_max * speed / np.sqrt(np.linalg.eigvalsh(G).min()))) + 1
        ax = np.arange(-R, R + 1)
        W = np.stack(np.meshgrid(*([ax] * d), indexing="ij"), axis=-1).reshape(-1, d)
        W = W[np.any(W != 0, axis=1)]
        lens = np.sqrt(np.einsum("wi,ij,wj->w", W, G, W))
        periods = lens / speed
        keep = periods <= T_max
        out = {}
        for T in np.round(periods[keep], 12):
            out[T] = out.get(T, 0) + 1
        return [{"period": float(T), "count": int(k)} for T, k in sorted(out.items())]
