"""Uniform hyperbolicity of periodic families of symplectic matrices.

A periodic family is a finite collection of periodic sequences
xi : Z -> Sp(n).  The checker tests the defining exponential bounds of a
uniformly hyperbolic family directly: it builds candidate invariant
splittings from each sequence's monodromy, propagates them along the
sequence, and measures every restricted product norm against K*lambda^m.
"""

from dataclasses import dataclass, field

import numpy as np

from .spnlib import symplectic_defect, symplectic_inverse, project_symplectic

UNIT_BAND = 1e-7          # |ln|eig|| below this counts as unit modulus
REL_TOL = 1e-9            # non-strict bound: allow equality up to this


def _as_matrix_list(seq):
    mats = [np.asarray(getattr(m, "entries", m), dtype=float) for m in seq]
    for m in mats:
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError("family entries must be square 2n x 2n matrices")
        if symplectic_defect(m) > 1e-6:
            raise ValueError("family entry is not symplectic (defect %.2e)"
                             % symplectic_defect(m))
    return mats


@dataclass
class PeriodicFamily:
    """Indexed set of periodic Sp(n) sequences with a common norm bound."""

    sequences: list
    bound: float = 0.0

    def __post_init__(self):
        self.sequences = [_as_matrix_list(s) for s in self.sequences]
        if not self.sequences or any(len(s) == 0 for s in self.sequences):
            raise ValueError("family needs at least one non-empty sequence")
        sup = max(np.linalg.norm(m, 2) for s in self.sequences for m in s)
        if self.bound <= 0.0:
            self.bound = float(sup)
        elif sup >= self.bound:
            raise ValueError("sequence norm %.3g exceeds declared bound" % sup)

    @classmethod
    def single(cls, matrices):
        return cls(sequences=[list(matrices)])


@dataclass
class HyperbolicityReport:
    ok: bool
    K: float
    lam: float
    worst_ratio: float            # max over checks of norm / (K lam^m)
    margin: float                 # 1 - worst_ratio (negative on failure)
    m_max: int
    per_sequence: list = field(default_factory=list)

    def __str__(self):
        state = "uniformly hyperbolic" if self.ok else "FAILS"
        return ("%s at (K=%.4g, lambda=%.4g): worst ratio %.6g over m <= %d"
                % (state, self.K, self.lam, self.worst_ratio, self.m_max))


def _monodromy_splitting(mats):
    """Stable/unstable real orthonormal bases from the cycle product.

    Returns (Vs, Vu, reason); reason is None on success.
    """
    prod = np.eye(mats[0].shape[0])
    for m in mats:
        prod = m @ prod
    evals, evecs = np.linalg.eig(prod)
    mods = np.abs(evals)
    if np.any(np.abs(np.log(mods)) < UNIT_BAND):
        return None, None, "monodromy has unit-modulus eigenvalue"
    n = prod.shape[0] // 2

    def real_span(mask):
        cols = evecs[:, mask]
        raw = np.hstack([cols.real, cols.imag])
        q, r = np.linalg.qr(raw)
        keep = np.abs(np.diag(r)) > 1e-10
        return q[:, keep]

    vs = real_span(mods < 1.0)
    vu = real_span(mods > 1.0)
    if vs.shape[1] != n or vu.shape[1] != n:
        return None, None, ("splitting ranks (%d, %d) != (%d, %d)"
                            % (vs.shape[1], vu.shape[1], n, n))
    return vs, vu, None


def _propagate(mats, basis):
    """Orthonormal bases at every index 0..p, pushed forward by the sequence."""
    out = [basis]
    for m in mats:
        q, _ = np.linalg.qr(m @ out[-1])
        out.append(q)
    return out


def check_uniform_hyperbolicity(family, K, lam, m_max=None):
    """Verify the exponential dichotomy bounds of a periodic family.

    For every sequence, every start index i and every word length
    m <= m_max (default four periods), requires

        || xi_{i+m-1} ... xi_i restricted to E^s_i ||      <= K lam^m
        || (xi_{i+m-1} ... xi_i)^{-1} on E^u_{i+m} ||      <= K lam^m

    with equality allowed up to a 1e-9 relative tolerance.  A monodromy
    with unit-modulus spectrum yields ok=False in the report rather than
    an exception.
    """
    if not isinstance(family, PeriodicFamily):
        family = PeriodicFamily.single(family)
    if not (0.0 < lam < 1.0):
        raise ValueError("lambda must lie in (0, 1)")
    if K <= 0.0:
        raise ValueError("K must be positive")

    worst = 0.0
    rows = []
    all_ok = True
    m_cap = 0
    for s_idx, mats in enumerate(family.sequences):
        p = len(mats)
        mm = 4 * p if m_max is None else int(m_max)
        m_cap = max(m_cap, mm)
        vs, vu, reason = _monodromy_splitting(mats)
        if reason is not None:
            rows.append({"sequence": s_idx, "ok": False, "reason": reason})
            all_ok = False
            continue
        stab = _propagate(mats, vs)
        unst = _propagate(mats, vu)
        invs = [symplectic_inverse(m) for m in mats]
        seq_worst, witness = 0.0, None
        for i in range(p):
            prod = np.eye(mats[0].shape[0])
            prod_inv = np.eye(mats[0].shape[0])
            for m in range(1, mm + 1):
                j = (i + m - 1) % p
                prod = mats[j] @ prod
                prod_inv = prod_inv @ invs[j]
                budget = K * lam ** m
                s_norm = np.linalg.norm(prod @ stab[i], 2)
                u_norm = np.linalg.norm(prod_inv @ unst[(i + m) % p], 2)
                ratio = max(s_norm, u_norm) / budget
                if ratio > seq_worst:
                    seq_worst, witness = ratio, (i, m)
        ok = seq_worst <= 1.0 + REL_TOL
        all_ok = all_ok and ok
        worst = max(worst, seq_worst)
        rows.append({"sequence": s_idx, "ok": ok, "worst_ratio": seq_worst,
                     "witness": witness,
                     "stable_basis": stab[0], "unstable_basis": unst[0]})
    return HyperbolicityReport(ok=all_ok, K=float(K), lam=float(lam),
                               worst_ratio=float(worst),
                               margin=float(1.0 - worst), m_max=m_cap,
                               per_sequence=rows)


def _spectrally_hyperbolic(family):
    for mats in family.sequences:
        prod = np.eye(mats[0].shape[0])
        for m in mats:
            prod = m @ prod
        mods = np.abs(np.linalg.eigvals(prod))
        if np.any(np.abs(np.log(mods)) < UNIT_BAND):
            return False
    return True


@dataclass
class StabilityProbeReport:
    epsilon: float
    trials: int
    fraction_hyperbolic: float
    destabilizing_eps: object    # smallest perturbation size that broke it, or None
    baseline_hyperbolic: bool


def stable_hyperbolicity_probe(family, epsilon, trials=1000, seed=0):
    """Monte-Carlo probe of spectral hyperbolicity under entrywise noise.

    Each trial perturbs every matrix entrywise by uniform(-epsilon, epsilon),
    re-projects to the symplectic group, and tests whether every sequence
    monodromy still has no unit-modulus eigenvalue.  Non-hyperbolic input is
    allowed: the report simply records a low surviving fraction and the
    smallest perturbation size seen to fail.
    """
    if not isinstance(family, PeriodicFamily):
        family = PeriodicFamily.single(family)
    rng = np.random.default_rng(seed)
    base_ok = _spectrally_hyperbolic(family)
    if epsilon == 0.0 or trials <= 0:
        return StabilityProbeReport(float(epsilon), int(trials),
                                    1.0 if base_ok else 0.0, None, base_ok)
    hits = 0
    destab = None
    for _ in range(int(trials)):
        size = 0.0
        pert = []
        for mats in family.sequences:
            new = []
            for m in mats:
                noise = rng.uniform(-epsilon, epsilon, size=m.shape)
                pm = project_symplectic(m + noise)
                size = max(size, float(np.max(np.abs(pm - m))))
                new.append(pm)
            pert.append(new)
        if _spectrally_hyperbolic(PeriodicFamily(pert)):
            hits += 1
        elif destab is None or size < destab:
            destab = size
    return StabilityProbeReport(float(epsilon), int(trials),
                                hits / float(trials), destab, base_ok)
