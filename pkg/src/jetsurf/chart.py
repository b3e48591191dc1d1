"""Standalone disk chart: a uniform grid with least-squares calculus.

Charts host the pointwise jet algebra tests and the chart-level actions of
diffeomorphisms (where mu_2 may move freely).  Derivatives are meshfree
least-squares fits, exact on polynomials up to the fit degree; boundary
nodes get one-sided fits with the same polynomial exactness.
"""

from __future__ import annotations

import numpy as np

from .calculus import CloudCalculus


class DiskChart:
    """Uniform grid covering the disk |z| < radius."""

    def __init__(self, radius=1.0, n=25, p_fit=6, k_stencil=None):
        self.radius = float(radius)
        ax = np.linspace(-radius, radius, n)
        X, Y = np.meshgrid(ax, ax, indexing="ij")
        Z = (X + 1j * Y).ravel()
        self.z = Z[np.abs(Z) <= radius + 1e-12]
        self.h = 2 * radius / (n - 1)
        nmon = (p_fit + 1) * (p_fit + 2) // 2
        if k_stencil is None:
            k_stencil = int(1.9 * nmon)
        self.calculus = CloudCalculus(self.z, k_stencil=k_stencil, p_fit=p_fit,
                                      p_holo=p_fit, hyperbolic=False)
        cols, rows = self.calculus.fit_rows(self.z, derivs=((1, 0), (0, 1)))
        import scipy.sparse as sp
        n_pts = len(self.z)
        ridx = np.repeat(np.arange(n_pts), cols.shape[1])
        self._dz = sp.csr_matrix((rows[(1, 0)].ravel(), (ridx, cols.ravel())),
                                 shape=(n_pts, n_pts))
        self._dzbar = sp.csr_matrix((rows[(0, 1)].ravel(), (ridx, cols.ravel())),
                                    shape=(n_pts, n_pts))

    @property
    def n_points(self):
        return len(self.z)

    def slice_dz(self, values, ttype=None):
        return self._dz @ values

    def slice_dzbar(self, values, ttype=None):
        return self._dzbar @ values

    def sample(self, func):
        """Sample a callable f(z) on the grid."""
        return np.asarray(func(self.z), dtype=complex)

    def poly_field(self, coeffs):
        """Polynomial sum c[a,b] z^a zbar^b from a 2d coefficient array."""
        coeffs = np.asarray(coeffs, dtype=complex)
        out = np.zeros(self.n_points, dtype=complex)
        for a in range(coeffs.shape[0]):
            for b in range(coeffs.shape[1]):
                if coeffs[a, b]:
                    out += coeffs[a, b] * self.z ** a * np.conj(self.z) ** b
        return out

    def random_poly_field(self, rng, degree=2, amplitude=1.0):
        """Random polynomial field (the exactness class of the stencils)."""
        c = (rng.standard_normal((degree + 1, degree + 1))
             + 1j * rng.standard_normal((degree + 1, degree + 1)))
        for a in range(degree + 1):
            for b in range(degree + 1):
                if a + b > degree:
                    c[a, b] = 0.0
        return self.poly_field(amplitude * c)

    def interpolate(self, values, points):
        """Evaluate a grid field at arbitrary points by local fits."""
        points = np.asarray(points, dtype=complex)
        cols, rows = self.calculus.fit_rows(points.ravel(), derivs=((0, 0),))
        out = np.sum(rows[(0, 0)] * values[cols], axis=1)
        return out.reshape(points.shape)


class ChartMap:
    """Samples of a chart diffeomorphism f with its complex derivatives.

    ``fz_of_z``, ``dzf``, ``dzbf`` are arrays over the chart grid holding
    f(z), df/dz, df/dzbar; derivatives of conj(f) follow by conjugation.
    """

    def __init__(self, chart, fz_of_z, dzf, dzbf):
        self.chart = chart
        self.f = np.asarray(fz_of_z, dtype=complex)
        self.dzf = np.asarray(dzf, dtype=complex)
        self.dzbf = np.asarray(dzbf, dtype=complex)
        self.jac = np.abs(self.dzf) ** 2 - np.abs(self.dzbf) ** 2
        if np.any(self.jac <= 0):
            raise ValueError("chart map must be orientation preserving")

    @classmethod
    def from_callable(cls, chart, f, df=None, eps=None):
        """Sample f; derivatives from ``df(z) -> (df/dz, df/dzbar)`` or by
        high-order differences on the grid field."""
        fz = np.asarray(f(chart.z), dtype=complex)
        if df is not None:
            dzf, dzbf = df(chart.z)
        else:
            dzf = chart.slice_dz(fz)
            dzbf = chart.slice_dzbar(fz)
        return cls(chart, fz, dzf, dzbf)

    def compose_field(self, values):
        """values o f on the grid (interpolation at f(z))."""
        return self.chart.interpolate(values, self.f)
