"""Order-3 Birkhoff normal form of planar area-preserving maps (q = 1).

Works on degree-3 Taylor jets at an elliptic fixed point, given as a pair
of 4x4 coefficient arrays (coeff[i, j] multiplies x^i y^j).  The reduction
runs entirely inside the truncated polynomial algebra C[z, zbar]/deg>3 and
performs the coordinate changes by actual composition, so every eliminated
coefficient is checked to vanish rather than assumed to.
"""

from dataclasses import dataclass

import numpy as np

DEG = 3          # truncation degree of the jet algebra
RES_TOL = 1e-6   # |lambda^k - 1| below this (k <= 4) is a resonance


class ResonanceError(RuntimeError):
    """Eigenvalue too close to a low-order root of unity for the reduction."""


# ---------------------------------------------------------------------------
# truncated C[z, zbar] algebra on (DEG+1) x (DEG+1) coefficient arrays

def _pzero():
    return np.zeros((DEG + 1, DEG + 1), dtype=complex)


def _pmul(a, b):
    out = _pzero()
    for i in range(DEG + 1):
        for j in range(DEG + 1 - i):
            if a[i, j] == 0:
                continue
            for k in range(DEG + 1 - i - j):
                for l in range(DEG + 1 - i - j - k):
                    out[i + k, j + l] += a[i, j] * b[k, l]
    return out


def _conj_flip(a):
    # conjugate of sum c_ij z^i zbar^j is sum conj(c_ij) z^j zbar^i
    return np.conj(a).T.copy()


def _psubst(c, pz, pzb):
    """Evaluate sum c[i,j] * pz^i * pzb^j in the truncated algebra."""
    one = _pzero()
    one[0, 0] = 1.0
    zp = [one]
    zbp = [one]
    for _ in range(DEG):
        zp.append(_pmul(zp[-1], pz))
        zbp.append(_pmul(zbp[-1], pzb))
    out = _pzero()
    for i in range(DEG + 1):
        for j in range(DEG + 1 - i):
            if c[i, j] != 0:
                out += c[i, j] * _pmul(zp[i], zbp[j])
    return out


def _compose(f, g):
    """f(g, conj(g)) for maps represented by their z-component array."""
    return _psubst(f, g, _conj_flip(g))


def _invert(phi):
    """Inverse of z + h(z, zbar) (h of degree >= 2) in the truncated algebra."""
    ident = _pzero()
    ident[1, 0] = 1.0
    h = phi - ident
    psi = ident.copy()
    for _ in range(DEG):
        psi = ident - _compose(h, psi)
    return psi


# ---------------------------------------------------------------------------

@dataclass
class TwistData:
    rotation: float            # a1, rotation number in [0, 1)
    twist: float               # beta11, coefficient of |z|^2 in the angle
    weakly_monotonous: bool    # |beta11| above tolerance
    eigenvalue: complex
    residual: float            # size of coefficients the normal form should kill


def _complex_chart(M):
    """Left eigenvector chart z = l1 x + l2 y with Im(l1 conj(l2)) = -1."""
    evals, evecs = np.linalg.eig(M.T)
    idx = int(np.argmax(np.abs(evals.imag)))
    lam = evals[idx]
    ell = evecs[:, idx]
    nu = float(np.imag(ell[0] * np.conj(ell[1])))
    if abs(nu) < 1e-12:
        raise ValueError("degenerate eigenvector chart")
    if nu > 0:                       # orientation pins which eigenvalue is lambda
        lam, ell, nu = np.conj(lam), np.conj(ell), -nu
    ell = ell / np.sqrt(-nu)
    return lam, ell


def birkhoff_twist_q1(jet, twist_tol=1e-8):
    """Rotation number and twist coefficient of a 1-elliptic map jet.

    jet: pair (X, Y) of 4x4 arrays, coeff[i, j] multiplying x^i y^j, the
    degree-3 Taylor expansion at the fixed point of an area-preserving map.
    Returns TwistData with the angle map phi(z) = a1 + beta11 |z|^2 of the
    order-3 normal form  z -> exp(2 pi i phi) z.
    """
    xc, yc = (np.asarray(j, dtype=float) for j in jet)
    if xc.shape != (DEG + 1, DEG + 1) or yc.shape != (DEG + 1, DEG + 1):
        raise ValueError("jet arrays must be 4x4 (degree-3 coefficients)")
    if abs(xc[0, 0]) > 1e-12 or abs(yc[0, 0]) > 1e-12:
        raise ValueError("jet must fix the origin")
    M = np.array([[xc[1, 0], xc[0, 1]], [yc[1, 0], yc[0, 1]]])
    if abs(np.linalg.det(M) - 1.0) > 1e-6:
        raise ValueError("linear part is not area-preserving")
    if abs(M[0, 1] - M[1, 0]) < 1e-12 and abs(M[0, 0] - M[1, 1]) < 1e-12 \
            and abs(M[0, 1]) < 1e-12:
        # scalar multiple of identity: real spectrum
        raise ValueError("fixed point is not 1-elliptic")
    tr = M[0, 0] + M[1, 1]
    if abs(tr) >= 2.0 - 1e-9:
        raise ValueError("fixed point is not 1-elliptic (|trace| >= 2)")

    lam, ell = _complex_chart(M)
    for k in range(1, 5):
        if abs(lam ** k - 1.0) < RES_TOL:
            raise ResonanceError("eigenvalue within %g of a %d-th root of unity"
                                 % (RES_TOL, k))

    # rewrite the jet in the complex chart: F_z = l1 X + l2 Y with
    # (x, y) expressed through (z, zbar)
    L = np.array([[ell[0], ell[1]], [np.conj(ell[0]), np.conj(ell[1])]])
    Linv = np.linalg.inv(L)
    px, py = _pzero(), _pzero()
    px[1, 0], px[0, 1] = Linv[0, 0], Linv[0, 1]
    py[1, 0], py[0, 1] = Linv[1, 0], Linv[1, 1]
    fz = ell[0] * _psubst(xc.astype(complex), px, py) \
        + ell[1] * _psubst(yc.astype(complex), px, py)
    if abs(fz[0, 1]) > 1e-9 or abs(fz[1, 0] - lam) > 1e-9:
        raise RuntimeError("complex diagonalization failed")

    # eliminate non-resonant terms degree by degree via actual conjugation
    for deg in (2, 3):
        ident = _pzero()
        ident[1, 0] = 1.0
        h = _pzero()
        for j in range(deg + 1):
            k = deg - j
            if deg == 3 and (j, k) == (2, 1):
                continue         # resonant: stays in the normal form
            den = lam ** j * np.conj(lam) ** k - lam
            if abs(den) < 1e-8:
                raise ResonanceError("small divisor at monomial (%d, %d)" % (j, k))
            h[j, k] = fz[j, k] / den
        phi = ident + h
        fz = _compose(_invert(phi), _compose(fz, phi))
        band = [abs(fz[j, deg - j]) for j in range(deg + 1)
                if not (deg == 3 and j == 2)]
        if max(band) > 1e-9:
            raise RuntimeError("normal-form elimination left residue %.2e"
                               % max(band))

    residual = float(sum(abs(fz[i, j]) for i in range(DEG + 1)
                         for j in range(DEG + 1 - i)
                         if (i, j) not in ((1, 0), (2, 1))))
    c21 = fz[2, 1]
    beta = float(np.imag(c21 * np.conj(lam)) / (2.0 * np.pi))
    a1 = float(np.angle(lam) / (2.0 * np.pi) % 1.0)
    return TwistData(rotation=a1, twist=beta,
                     weakly_monotonous=bool(abs(beta) > twist_tol),
                     eigenvalue=complex(lam), residual=residual)


def rotation_jet(omega, c):
    """Degree-3 jet of the time-1 map of the planar flow with angular
    velocity omega + c r^2 (r^2 = x^2 + y^2): the standard twist example."""
    xc, yc = np.zeros((4, 4)), np.zeros((4, 4))
    cw, sw = np.cos(omega), np.sin(omega)
    xc[1, 0], xc[0, 1] = cw, -sw
    yc[1, 0], yc[0, 1] = sw, cw
    for (i, j) in ((3, 0), (1, 2)):
        xc[i, j] = -c * sw
        yc[i, j] = c * cw
    for (i, j) in ((2, 1), (0, 3)):
        xc[i, j] = -c * cw
        yc[i, j] = -c * sw
    return xc, yc
