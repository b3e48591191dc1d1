"""Meshfree calculus on complex point clouds.

Derivatives and interpolation come from moving weighted least-squares fits:
at every evaluation point, nearby cloud samples are fitted by monomials
zeta^a zetabar^b of total degree <= p_fit, augmented with pure-z powers up
to p_holo.  The augmentation makes the operators near-exact on holomorphic
functions (which continue analytically across the cloud), while keeping
order-p_fit consistency on general smooth fields; this is what separates
the dbar kernel from the rest of its spectrum.
"""

from __future__ import annotations

from math import factorial

import numpy as np
from scipy.spatial import cKDTree

from .mobius import hyp_dist

#: derivative slots extracted from every fit
DERIV_SLOTS = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2))


def monomial_exponents(p_fit, p_holo):
    exps = [(a, t - a) for t in range(p_fit + 1) for a in range(t, -1, -1)]
    exps += [(a, 0) for a in range(p_fit + 1, p_holo + 1)]
    return exps


class CloudCalculus:
    """Weighted least-squares fit machinery over a sample cloud.

    Parameters
    ----------
    positions : complex array of sample positions.
    k_stencil : neighbors per fit.
    p_fit, p_holo : symmetric / holomorphic-augmentation fit degrees.
    hyperbolic : use hyperbolic distance for neighbor ordering and weights
        (True on the surface, False on flat charts).
    """

    def __init__(self, positions, k_stencil=72, p_fit=6, p_holo=14,
                 hyperbolic=True):
        self.positions = np.asarray(positions)
        self.k_stencil = int(min(k_stencil, len(self.positions)))
        self.p_fit = p_fit
        self.p_holo = p_holo
        self.hyperbolic = hyperbolic
        self.exponents = monomial_exponents(p_fit, p_holo)
        self._slots = {e: i for i, e in enumerate(self.exponents)}
        self.tree = cKDTree(np.c_[self.positions.real, self.positions.imag])

    def _distance(self, z, z0):
        if self.hyperbolic:
            return hyp_dist(z, z0)
        return np.abs(z - z0)

    def fit_rows(self, points, derivs=DERIV_SLOTS):
        """Stencil rows at the given evaluation points.

        Returns (cols, rows) where cols is (n, k) sample indices and rows is
        a dict mapping each (a, b) in ``derivs`` to an (n, k) coefficient
        array: d^{a+b} f / dz^a dzbar^b (ζ-monomial fit, scaled back).
        """
        points = np.asarray(points)
        n = len(points)
        k = self.k_stencil
        nm = len(self.exponents)
        cols = np.zeros((n, k), dtype=np.int64)
        rows = {d: np.zeros((n, k), dtype=complex) for d in derivs}
        fact = {d: float(factorial(d[0]) * factorial(d[1])) for d in derivs}
        qk = min(3 * k, len(self.positions))
        for i, z0 in enumerate(points):
            _, jj = self.tree.query([z0.real, z0.imag], k=qk)
            jj = np.atleast_1d(jj)
            zz = self.positions[jj]
            dh = self._distance(zz, z0)
            order = np.argsort(dh, kind="stable")[:k]
            jj = jj[order]
            zz = self.positions[jj]
            dh = dh[order]
            s = np.max(np.abs(zz - z0))
            if s == 0.0:
                raise ValueError("degenerate stencil at %r" % z0)
            zeta = (zz - z0) / s
            V = np.empty((k, nm), dtype=complex)
            for m, (a, b) in enumerate(self.exponents):
                V[:, m] = zeta ** a * np.conj(zeta) ** b
            w = np.exp(-(dh / (dh.max() * 0.8)) ** 2)
            U, S, Vh = np.linalg.svd(V * w[:, None], full_matrices=False)
            Sinv = np.where(S > S[0] * 1e-13, 1.0 / S, 0.0)
            pinv = (Vh.conj().T * Sinv) @ U.conj().T
            cols[i] = jj
            for d in derivs:
                if d in self._slots:
                    rows[d][i] = pinv[self._slots[d]] * w * fact[d] / s ** sum(d)
        return cols, rows
