"""Hodge decomposition of k-Beltrami differentials.

mu = harmonic + dbar(w) with the harmonic part the Petersson-orthogonal
projection onto span{conj(q_i)/g^(k-1)} (q_i the holomorphic basis) and the
potential w recovered by least squares over the resolved smooth subspace.
The discrete dbar image is orthogonal to the harmonic space by
construction (see surface.dbar_op), so round trips and the orthogonality
<harmonic, dbar w> hold to solver precision rather than mesh accuracy.
"""

from __future__ import annotations

import numpy as np

from .surface import BolzaSurface, TensorField


class HodgeSplit:
    """Result of the decomposition mu = harmonic + dbar w at degree k."""

    def __init__(self, harmonic, potential, degree, residual):
        self.harmonic = harmonic
        self.potential = potential
        self.degree = degree
        self.residual = residual

    def reconstruct(self):
        surf = self.harmonic.surface
        return self.harmonic + surf.dbar_op(self.potential)


class HodgeSolver:
    """Cached per-(surface, k) machinery for projections and lsq solves."""

    def __init__(self, surface: BolzaSurface, k: int, tol=1e-8):
        if k < 2:
            raise ValueError("hodge degree must be >= 2")
        self.surface = surface
        self.k = k
        self.tol = tol
        self.frame = surface.harmonic_frame(k)
        self.potentials = surface.smooth_space((1 - k, 0))
        images = [surface.dbar_op(w) for w in self.potentials]
        a, b = (1 - k, 1)
        wt = np.sqrt(surface.metric ** (1 - a - b) * surface.quad_weights)
        A = np.array([im.prim * wt for im in images]).T
        U, S, Vh = np.linalg.svd(A, full_matrices=False)
        keep = S > S[0] * 1e-10
        self._wt = wt
        self._U = U[:, keep]
        self._S = S[keep]
        self._Vh = Vh[keep]
        self._pot_rank = int(keep.sum())

    # -- operations -------------------------------------------------------

    def harmonic_projection(self, mu: TensorField) -> TensorField:
        self._check_type(mu)
        vals = np.zeros_like(mu.values)
        for h in self.frame:
            vals += self.surface.inner(mu, h) * h.values
        return TensorField(self.surface, mu.type, vals)

    def solve_dbar_potential(self, r: TensorField, pre_project=True,
                             full=True):
        """Least-squares w with dbar w = r; r should be orthogonal to the
        harmonic space (projected off first unless disabled).

        The solve runs in two stages: an exact projection onto the resolved
        dbar image (the span of images of the smooth potential frame), then
        an iterative least-squares top-up on the full vertex operator for
        whatever the resolved span misses.  Returns
        (w, residual_norm_relative); the kernel of dbar on (1-k, 0) is
        trivial at genus 2, so the solution is unique.
        """
        self._check_type(r)
        if pre_project:
            r = r - self.harmonic_projection(r)
        rhs = r.prim * self._wt
        scale = np.linalg.norm(rhs) + 1e-300
        coeff = (self._Vh.conj().T * (1.0 / self._S)) @ (self._U.conj().T @ rhs)
        vals = np.zeros(self.surface.mesh.n_vertices, dtype=complex)
        for c, w in zip(coeff, self.potentials):
            vals += c * w.values
        rem = rhs - self._U @ (self._U.conj().T @ rhs)
        resid = float(np.linalg.norm(rem) / scale)
        if full and resid > 1e-10:
            x = self._full_lsq(rem)
            vals = vals + x
            w_field = TensorField(self.surface, (1 - self.k, 0), vals)
            w_field.sync_ghosts()
            final = (r - self.surface.dbar_op(w_field)).prim * self._wt
            resid = float(np.linalg.norm(final) / scale)
            return w_field, resid
        w_field = TensorField(self.surface, (1 - self.k, 0), vals)
        return w_field, resid

    def _full_pinv(self):
        """Dense SVD pseudoinverse of the weighted corrected dbar on all
        primary potential DOFs (built once per degree, cached)."""
        if hasattr(self, "_pinv_parts"):
            return self._pinv_parts
        surf = self.surface
        k = self.k
        M = surf._op_matrix((0, 1), (1 - k, 0)).toarray()
        w_in = np.sqrt(surf.quad_weights) * surf.metric ** (k / 2.0)
        A = (self._wt[:, None] * M) / w_in[None, :]
        Ht = np.array([h.prim * self._wt for h in self.frame]).T
        A -= Ht @ (Ht.conj().T @ A)
        U, S, Vh = np.linalg.svd(A, full_matrices=False)
        keep = S > S[0] * 1e-8
        self._pinv_parts = (U[:, keep], S[keep], Vh[keep], w_in)
        return self._pinv_parts

    def _full_lsq(self, rhs_weighted):
        """Pseudoinverse solve of the weighted corrected dbar; returns
        full-vertex potential values."""
        U, S, Vh, w_in = self._full_pinv()
        x = (Vh.conj().T * (1.0 / S)) @ (U.conj().T @ rhs_weighted)
        x = x / w_in
        out = np.zeros(self.surface.mesh.n_vertices, dtype=complex)
        out[self.surface.mesh.prim] = x
        mesh = self.surface.mesh
        a, b = (1 - self.k, 0)
        out = out[mesh.nclass] * mesh.nfac ** (-a) * np.conj(mesh.nfac) ** (-b)
        return out

    def decompose(self, mu: TensorField) -> HodgeSplit:
        self._check_type(mu)
        harm = self.harmonic_projection(mu)
        rest = mu - harm
        w, rel = self.solve_dbar_potential(rest, pre_project=False)
        recon = harm + self.surface.dbar_op(w)
        res = (mu - recon).norm() / max(mu.norm(), 1e-300)
        return HodgeSplit(harm, w, self.k, res)

    def project_model(self, values):
        """Orthogonal projection of a (1-k,1) vertex field onto the modeled
        space (harmonic frame) + (resolved dbar image); the Galerkin
        truncation used by surface flows."""
        mu = TensorField(self.surface, (1 - self.k, 1), values)
        harm = self.harmonic_projection(mu)
        rhs = (mu - harm).prim * self._wt
        img = self._U @ (self._U.conj().T @ rhs)
        e_part = TensorField.from_primary(self.surface, mu.type, img / self._wt)
        return (harm + e_part).values

    def _check_type(self, t):
        if t.type != (1 - self.k, 1):
            raise ValueError("expected a type (%d, 1) field" % (1 - self.k))


_solver_cache = {}


def get_solver(surface, k, tol=1e-8) -> HodgeSolver:
    key = (id(surface), k)
    if key not in _solver_cache:
        _solver_cache[key] = HodgeSolver(surface, k, tol)
    return _solver_cache[key]


def harmonic_projection(surface, mu, k):
    return get_solver(surface, k).harmonic_projection(mu)


def solve_dbar_potential(surface, r, k, tol=1e-6):
    w, rel = get_solver(surface, k).solve_dbar_potential(r)
    if rel > tol:
        raise RuntimeError(
            "dbar potential solve left relative residual %.2e (input is not "
            "in the resolved dbar image)" % rel)
    return w

def hodge_decompose(surface, mu, k) -> HodgeSplit:
    return get_solver(surface, k).decompose(mu)


def pressure_restriction_pairing(surface, q1: TensorField, q2: TensorField) -> complex:
    """Fiberwise pressure-metric pairing of holomorphic differentials,
    without the overall constant: integral of q1 conj(q2) / g^(k-1) when
    the degrees agree, zero for distinct degrees (orthogonality)."""
    if q1.type[1] != 0 or q2.type[1] != 0:
        raise ValueError("holomorphic differentials expected")
    if q1.type != q2.type:
        return 0.0 + 0.0j
    return surface.inner(q1, q2)
