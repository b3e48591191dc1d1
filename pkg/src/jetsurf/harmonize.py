"""Canonical harmonic representatives of structure orbits.

Every structure in natural coordinates is moved inside its orbit under
2-stationary flows to the unique one whose mu_k are harmonic k-Beltrami
differentials: ascending in k, split mu_k = harmonic + dbar(w) and flow by
the autonomous real Hamiltonian -w - conj(w), which subtracts dbar(w) from
mu_k exactly and touches only the levels above k.
"""

from __future__ import annotations

import numpy as np

from .flows import HamiltonianJet, flow_endpoint, homogeneous_real
from .hodge import get_solver
from .jets import NEGATIVE, HigherStructure, JetField
from .surface import TensorField


def harmonicity_residual(I: HigherStructure, k: int) -> float:
    """Dimensionless dbar-residual of conj(mu_k) g^(k-1): the norm of the
    dbar image relative to the field norm and the dbar operator scale
    (the same normalization the kernel cutoff uses)."""
    surf = I.base
    lam = 4.0 / (1 - np.abs(surf.mesh.verts) ** 2) ** 2
    q = TensorField(surf, (k, 0), np.conj(I.mu[k]) * lam ** (k - 1))
    nq = q.norm()
    if nq == 0.0:
        return 0.0
    smax = surf.basis_report(k)["sigma_max"]
    return surf.dbar_raw(q).norm() / (nq * smax)


def harmonicity_scale(surface, k) -> float:
    """Residual level of the computed holomorphic basis itself; harmonic
    fields cannot be certified below this scale."""
    rep = surface.basis_report(k)
    basis, _ = surface.holomorphic_basis(k)
    return max(surface.dbar_raw(q).norm() / (q.norm() * rep["sigma_max"])
               for q in basis)


def energy(I: HigherStructure, k: int) -> float:
    """Petersson energy of mu_k: integral |mu_k|^2 g^(k-1)."""
    if not 2 <= k <= I.degree:
        raise ValueError("energy level out of range")
    surf = I.base
    mu = TensorField(surf, (1 - k, 1), I.mu[k])
    return float(surf.petersson_pairing(mu, mu, k).real)


def harmonic_representative(I: HigherStructure, tol=1e-7, max_passes=3,
                            steps=64) -> HigherStructure:
    """The unique harmonic structure in the 2-stationary flow orbit of I.

    Ascending k = 3..n passes; repeats until the harmonicity residuals
    stabilize.  Raises if a repeat pass fails to decrease a residual that
    is still above tolerance.
    """
    if not I.is_surface_based():
        raise ValueError("harmonic representatives live on the Bolza mesh")
    if I.normalization != NEGATIVE:
        I = I.flip_normalization()
    surf = I.base
    n = I.degree
    cur = I.copy()
    history = []
    for pass_no in range(max_passes):
        for k in range(3, n + 1):
            solver = get_solver(surf, k)
            mu = TensorField(surf, (1 - k, 1), cur.mu[k])
            split = solver.decompose(mu)
            dbar_part = mu - split.harmonic
            if dbar_part.norm() <= 1e-14 * max(mu.norm(), 1e-30):
                continue
            H = -homogeneous_real(surf, k - 1, split.potential.values, n - 1)
            cur = flow_endpoint(cur, HamiltonianJet.autonomous(H), steps)
        resid = max(harmonicity_residual(cur, k) for k in range(3, n + 1))
        history.append(resid)
        if resid <= tol:
            break
        if len(history) >= 2 and history[-1] > 0.5 * history[-2]:
            raise RuntimeError(
                "harmonicity residual stalled above tolerance: %s" % history)
    return cur


def orbit_perturb(I: HigherStructure, seed, amplitude=0.2, n_pieces=3,
                  steps=64) -> HigherStructure:
    """Flow I by a seeded pseudo-random piecewise 2-stationary Hamiltonian.

    The output lies in the same orbit by construction.  Degree-k slices use
    the resolved smooth coefficient spaces; mixed slices (which act purely
    nonlinearly) are included at half amplitude.
    """
    if amplitude == 0.0:
        return I.copy()
    surf = I.base
    n = I.degree
    rng = np.random.default_rng(seed)
    pieces = []
    for _ in range(n_pieces):
        J = JetField(surf, n - 1)
        for k in range(2, n):
            c = surf.random_smooth_field((-k, 0), rng, amplitude).values
            J.coeffs[k, 0] += c
            J.coeffs[0, k] += np.conj(c)
            for a in range(1, k):
                b = k - a
                if a < b:
                    continue
                m = surf.random_smooth_field((-a, -b), rng, 0.5 * amplitude).values
                if a == b:
                    J.coeffs[a, b] += m.real
                else:
                    J.coeffs[a, b] += m
                    J.coeffs[b, a] += np.conj(m)
        pieces.append((1.0 / n_pieces, J))
    H = HamiltonianJet(pieces)
    return flow_endpoint(I, H, steps)
