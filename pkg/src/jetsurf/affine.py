"""Degree-3 Hitchin holonomy via hyperbolic affine spheres.

From a harmonic cubic coefficient mu_3 the Pick differential
phi = conj(mu_3) g^2 / 12 is formed; the Blaschke metric h = e^u g solves
the structure equation derived from the affine-sphere integrability
constraints with shape operator -Id and vanishing transverse form:

    Delta_0 u = 2 lam (e^u - 1) - 4 |phi|^2 lam^{-2} e^{-2u},

where Delta_0 = 4 d/dz d/dzbar and g = lam |dz|^2 is hyperbolic.  (In a
conformal coordinate with h = e^psi |dz|^2 this is the classical
psi_{z zbar} = e^psi/2 - |phi|^2 e^{-2 psi}; substituting
psi = u + log lam and Delta_0 log lam = 2 lam gives the form above, and
phi = 0, u = 0 reproduces the hyperbolic metric.)  The developing frame
(f_z, f_zbar, f) of the affine sphere with center 0 obeys the first-order
system

    d/dz    (f_z, f_zbar, f) = U (f_z, f_zbar, f),   U = [[psi_z, phi e^-psi, 0],
                                                          [0, 0, e^psi/2],
                                                          [1, 0, 0]]
    d/dzbar (f_z, f_zbar, f) = V (f_z, f_zbar, f),   V = [[0, 0, e^psi/2],
                                                          [conj(phi) e^-psi, psi_zbar, 0],
                                                          [0, 1, 0]]

whose zero-curvature condition is exactly the structure equation plus
holomorphy of phi.  Holonomy matrices are extracted by transporting the
frame from the basepoint 0 to gamma(0) through the unrolled cover.
"""

from __future__ import annotations

import numpy as np

from .harmonize import harmonic_representative, harmonicity_residual, harmonicity_scale
from .jets import HigherStructure
from .mobius import (dlog_metric_density, metric_density, mob_apply,
                     mob_deriv, mob_inverse)
from .mesh import inside_octagon
from .surface import TensorField


class PickData:
    """Holomorphic cubic differential and its base surface."""

    def __init__(self, surface, phi: TensorField):
        if phi.type != (3, 0):
            raise ValueError("Pick differential must be a (3,0) tensor")
        self.surface = surface
        self.phi = phi

    def holomorphy_residual(self):
        n = self.phi.norm()
        if n == 0:
            return 0.0
        return self.surface.dbar_raw(self.phi).norm() / n


class BlaschkeMetric:
    """Conformal factor u with h = e^u g and the Newton residual trace."""

    def __init__(self, surface, u_prim, residuals):
        self.surface = surface
        self.u = u_prim
        self.residuals = residuals

    @property
    def final_residual(self):
        return self.residuals[-1]


class Holonomy:
    """Canonical generator images rho(A1), rho(B1), rho(A2), rho(B2)."""

    def __init__(self, matrices, base_letters, reports):
        self.matrices = matrices
        self.base_letters = base_letters
        self.reports = reports

    def relation_defect(self):
        A1, B1, A2, B2 = (self.matrices[k] for k in ("A1", "B1", "A2", "B2"))
        P = np.eye(3)
        for X, Y in ((A1, B1), (A2, B2)):
            P = P @ X @ Y @ np.linalg.inv(X) @ np.linalg.inv(Y)
        return float(np.linalg.norm(P - np.eye(3)))

    def det_defect(self):
        return max(abs(np.linalg.det(M) - 1.0) for M in self.matrices.values())

    def trace_table(self):
        """Traces of generators and the 12 ordered length-2 words."""
        names = ["A1", "B1", "A2", "B2"]
        out = {n: float(np.trace(self.matrices[n])) for n in names}
        for i in names:
            for j in names:
                if i == j:
                    continue
                out[i + "*" + j] = float(np.trace(self.matrices[i] @ self.matrices[j]))
        return out

    def invariant_form_fit(self):
        """Least-squares symmetric form Q with rho^T Q rho = Q; returns
        (Q, relative residual, signature)."""
        rows = []
        mats = list(self.matrices.values())
        basis = []
        for i in range(3):
            for j in range(i, 3):
                E = np.zeros((3, 3))
                E[i, j] = E[j, i] = 1.0
                basis.append(E)
        for M in mats:
            for E in basis:
                rows.append((M.T @ E @ M - E).ravel())
        A = np.array(rows).reshape(len(mats), len(basis), 9)
        A = np.transpose(A, (0, 2, 1)).reshape(-1, len(basis))
        _, s, Vh = np.linalg.svd(A)
        coef = Vh[-1]
        Q = sum(c * E for c, E in zip(coef, basis))
        Q /= np.linalg.norm(Q)
        resid = max(np.linalg.norm(M.T @ Q @ M - Q) for M in mats)
        sig = tuple(int(x) for x in np.sign(np.linalg.eigvalsh(Q)))
        return Q, float(resid), sig


def pick_differential(I: HigherStructure, harmonicity_tol=None) -> PickData:
    """phi = conj(mu_3) g^2 / 12 from a degree-3 harmonic structure."""
    surf = I.base
    if not I.is_surface_based():
        raise ValueError("Pick differentials need the Bolza base")
    if harmonicity_tol is None:
        harmonicity_tol = max(1e-6, 30.0 * harmonicity_scale(surf, 3))
    res = harmonicity_residual(I, 3)
    if res > harmonicity_tol:
        raise ValueError("mu_3 is not harmonic (residual %.2e)" % res)
    lam = metric_density(surf.mesh.verts)
    phi = TensorField(surf, (3, 0), np.conj(I.mu[3]) * lam ** 2 / 12.0)
    return PickData(surf, phi)


def wang_solve(p: PickData, tol=1e-8, max_iter=40) -> BlaschkeMetric:
    """Damped Newton solve of the Blaschke-metric structure equation."""
    surf = p.surface
    mesh = surf.mesh
    L = surf.laplacian_rows().real.toarray()
    lam = surf.metric
    Q = np.abs(p.phi.prim) ** 2 / lam ** 2

    def F(u):
        return L @ u - 2 * lam * (np.exp(u) - 1.0) + 4 * Q * np.exp(-2 * u)

    u = np.zeros(mesh.n_primary)
    residuals = [float(np.abs(F(u)).max() / lam.max())]
    for _ in range(max_iter):
        if residuals[-1] < tol:
            return BlaschkeMetric(surf, u, residuals)
        r = F(u)
        Jm = L - np.diag(2 * lam * np.exp(u) + 8 * Q * np.exp(-2 * u))
        du = np.linalg.solve(Jm, -r)
        step = 1.0
        base_res = np.abs(r).max()
        for _ in range(20):
            cand = u + step * du
            if np.abs(F(cand)).max() < base_res * (1 - 0.25 * step):
                break
            step *= 0.5
        else:
            raise RuntimeError("Newton line search failed; residuals %s"
                               % residuals)
        u = u + step * du
        residuals.append(float(np.abs(F(u)).max() / lam.max()))
        if residuals[-1] < tol:
            return BlaschkeMetric(surf, u, residuals)
    raise RuntimeError("Newton did not reach tolerance; residuals %s" % residuals)


class _CoverEvaluator:
    """Evaluates psi, psi_z and phi at arbitrary points of the disk by
    folding into the fundamental octagon and transporting."""

    def __init__(self, p: PickData, h: BlaschkeMetric):
        self.surface = p.surface
        self.phi_vals = p.phi.values
        u_full = TensorField.from_primary(self.surface, (0, 0), h.u).values
        self.u_vals = u_full.real
        self.gens = self.surface.group.gens

    def fold(self, z, max_steps=200):
        """Return (w, M) with w in the octagon and z = M(w)."""
        from .mesh import SIDE_CIRCLES
        w = complex(z)
        M = np.eye(2, dtype=complex)
        for _ in range(max_steps):
            violated = -1
            depth = 0.0
            for k, (c, r) in enumerate(SIDE_CIRCLES):
                d = r - abs(w - c)
                if d > depth + 1e-15:
                    depth = d
                    violated = k
            if violated < 0:
                return w, M
            # w lies beyond side `violated`; pull back by its pairing
            g_back = self.gens[(violated + 4) % 8]
            w = complex(mob_apply(g_back, w))
            M = M @ self.gens[violated]
        raise RuntimeError("point folding did not terminate")

    def coefficients(self, points):
        """(psi, psi_z, phi) arrays at arbitrary disk points."""
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        ws = np.empty(len(points), dtype=complex)
        dginv = np.empty(len(points), dtype=complex)
        for i, z in enumerate(points):
            w, M = self.fold(z)
            ws[i] = w
            Minv = mob_inverse(M)
            dginv[i] = mob_deriv(Minv, z)
        cols, rows = self.surface.calculus.fit_rows(ws, derivs=((0, 0), (1, 0)))
        src = self.surface.cloud_src[cols]
        prim_u = self.u_vals[self.surface.mesh.prim]
        prim_phi = self.phi_vals[self.surface.mesh.prim]
        uv = prim_u[src]
        u = np.sum(rows[(0, 0)] * uv, axis=1).real
        u_z_w = np.sum(rows[(1, 0)] * uv, axis=1)
        fac = self.surface.cloud_dg[cols] ** (-3)
        pv = prim_phi[src] * fac
        phi_w = np.sum(rows[(0, 0)] * pv, axis=1)
        lam = metric_density(points)
        psi = u + np.log(lam)
        psi_z = u_z_w * dginv + dlog_metric_density(points)
        phi = phi_w * dginv ** 3
        return psi, psi_z, phi


def _frame_matrices(psi, psi_z, phi):
    ep = np.exp(psi)
    em = np.exp(-psi)
    U = np.array([[psi_z, phi * em, 0.0],
                  [0.0, 0.0, ep / 2.0],
                  [1.0, 0.0, 0.0]], dtype=complex)
    V = np.array([[0.0, 0.0, ep / 2.0],
                  [np.conj(phi) * em, np.conj(psi_z), 0.0],
                  [0.0, 1.0, 0.0]], dtype=complex)
    return U, V


def _refine_path(path, factor):
    """Insert ``factor``-fold subdivisions into every polyline segment."""
    out = [path[0]]
    for a, b in zip(path[:-1], path[1:]):
        for j in range(1, factor + 1):
            out.append(a + (b - a) * j / factor)
    return np.asarray(out)


def develop_frame(p: PickData, h: BlaschkeMetric, path, steps=None,
                  stabilize_tol=1e-8, max_halvings=6, _ev=None):
    """Transport matrix of the developing-frame system along a polyline.

    ``path`` is a sequence of complex points in the disk (the unrolled
    cover); the rows (f_z, f_zbar, f) satisfy R(end) = T R(start).  The
    subdivision is doubled until the transport stabilizes.
    """
    path = np.asarray(path, dtype=complex)
    if len(path) < 2:
        return np.eye(3, dtype=complex)
    ev = _ev if _ev is not None else _CoverEvaluator(p, h)

    def rk4_transport(factor):
        pts = _refine_path(path, factor)
        # coefficient batch at nodes and midpoints
        mids = 0.5 * (pts[:-1] + pts[1:])
        allpts = np.concatenate([pts, mids])
        psi, psi_z, phi = ev.coefficients(allpts)
        npts = len(pts)

        def A(idx, dz):
            U, V = _frame_matrices(psi[idx], psi_z[idx], phi[idx])
            return U * dz + V * np.conj(dz)

        T = np.eye(3, dtype=complex)
        for s in range(npts - 1):
            dz = pts[s + 1] - pts[s]
            k1 = A(s, dz)
            k2 = A(npts + s, dz)
            k4 = A(s + 1, dz)
            m1 = k1 @ T
            m2 = k2 @ (T + 0.5 * m1)
            m3 = k2 @ (T + 0.5 * m2)
            m4 = k4 @ (T + m3)
            T = T + (m1 + 2 * m2 + 2 * m3 + m4) / 6.0
        return T

    if steps is not None:
        return rk4_transport(steps)
    factor = 1
    T_prev = rk4_transport(factor)
    for _ in range(max_halvings):
        factor *= 2
        T = rk4_transport(factor)
        if np.linalg.norm(T - T_prev) < stabilize_tol * np.linalg.norm(T):
            return T
        T_prev = T
    return T_prev


def _initial_frame(psi0):
    e = np.exp(psi0 / 2.0)
    fz = np.array([e / 2.0, -1j * e / 2.0, 0.0], dtype=complex)
    return np.array([fz, np.conj(fz), [0.0, 0.0, 1.0]], dtype=complex)


def holonomy(p: PickData, h: BlaschkeMetric, n_path=128,
             stabilize_tol=1e-10) -> Holonomy:
    """Holonomy of the developed affine sphere on the canonical generators.

    The frame is transported from z0 = 0 to g_k(0) for the four base
    letters g_0..g_3; A_gamma follows from frame matching, and the
    canonical generators are assembled as matrix words.
    """
    surf = p.surface
    ev = _CoverEvaluator(p, h)
    psi0 = float(ev.coefficients(np.array([0j]))[0][0])
    R0 = _initial_frame(psi0)
    R0_inv = np.linalg.inv(R0)
    base = {}
    reports = {}
    for kgen in range(4):
        g = surf.group.gens[kgen]
        z1 = mob_apply(g, 0j)
        path = np.linspace(0.0 + 0.0j, z1, n_path)
        T = develop_frame(p, h, path, stabilize_tol=stabilize_tol, _ev=ev)
        D = np.diag([mob_deriv(g, 0j), np.conj(mob_deriv(g, 0j)), 1.0])
        At = R0_inv @ D @ T @ R0
        A = At.T
        imag = float(np.abs(A.imag).max())
        A = A.real
        det = float(np.linalg.det(A))
        reports["g%d" % kgen] = {"imag_part": imag, "det": det}
        base["g%d" % kgen] = A

    from .group import CANONICAL_WORDS

    def word_matrix(word):
        M = np.eye(3)
        for ell in word:
            G = base["g%d" % (abs(ell) - 1)]
            M = M @ (G if ell > 0 else np.linalg.inv(G))
        return M

    mats = {name: word_matrix(w) for name, w in CANONICAL_WORDS.items()}
    return Holonomy(mats, base, reports)


def hitchin_map(I: HigherStructure, steps=64, tol=1e-8) -> Holonomy:
    """Full degree-3 pipeline: harmonic representative, Pick differential,
    Blaschke metric, holonomy."""
    if I.degree != 3:
        raise ValueError("the holonomy pipeline is the degree-3 map")
    rep = harmonic_representative(I, steps=steps)
    p = pick_differential(rep)
    h = wang_solve(p, tol=tol)
    return holonomy(p, h)
