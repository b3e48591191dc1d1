"""Discrete fundamental octagon of the Bolza surface.

The mesh is a D8-symmetric point cloud in the closed octagon: "onion" rows
equidistant from the boundary sides (so that boundary pairing is exact by
construction) plus concentric rings filling the middle.  Vertices on sides
4..7 and seven of the eight corner copies are ghosts: each stores the index
of its primary partner and the Moebius derivative used in automorphy
transport.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.spatial import Delaunay

from .group import FuchsianGroup
from .mobius import hyp_dist, mob_apply, mob_deriv, mob_inverse

#: euclidean radius of the octagon corners
CORNER_RADIUS = 2.0 ** -0.25
#: hyperbolic inradius (= half the side-pairing translation length)
APOTHEM = float(np.arccosh(1.0 + np.sqrt(2.0)))


def _side_circle(k):
    """Center and radius of the circle carrying the side-k geodesic."""
    v1 = CORNER_RADIUS * np.exp(1j * (k * np.pi / 4 - np.pi / 8))
    v2 = CORNER_RADIUS * np.exp(1j * (k * np.pi / 4 + np.pi / 8))
    A = np.array([[2 * v1.real, 2 * v1.imag], [2 * v2.real, 2 * v2.imag]])
    b = np.array([abs(v1) ** 2 + 1, abs(v2) ** 2 + 1])
    cx, cy = np.linalg.solve(A, b)
    c = cx + 1j * cy
    return c, float(np.sqrt(abs(c) ** 2 - 1))


SIDE_CIRCLES = [_side_circle(k) for k in range(8)]


def inside_octagon(z, margin=0.0):
    """True where z lies in the octagon (biased outward by ``margin``)."""
    z = np.asarray(z)
    ok = np.ones(z.shape, dtype=bool)
    for c, r in SIDE_CIRCLES:
        ok &= np.abs(z - c) >= r + margin
    return ok


def dist_to_boundary(z):
    """Hyperbolic distance to the nearest side geodesic."""
    d = np.full(np.shape(z), np.inf)
    for c, r in SIDE_CIRCLES:
        s = (np.abs(z - c) ** 2 - r ** 2) / (r * (1 - np.abs(z) ** 2))
        d = np.minimum(d, np.abs(np.arcsinh(s)))
    return d


def _hypercycle_circle(t):
    """Circle of points at hyperbolic distance t inward from side 0."""
    c0, r0 = SIDE_CIRCLES[0]
    s = np.sinh(t)
    c = c0 / (1 + s * r0)
    rad2 = abs(c) ** 2 - (abs(c0) ** 2 - r0 ** 2 - s * r0) / (1 + s * r0)
    return c, float(np.sqrt(rad2))


def _row_points(t, delta):
    """Nodes on the side-0 offset row at distance t, clipped to the wedge
    |arg z| <= pi/8.  Uniform hyperbolic arclength, conjugation-symmetric,
    ray endpoints snapped to the exact diagonal."""
    c, r = _hypercycle_circle(t)

    def argz(th):
        return np.angle(c + r * np.exp(1j * th))

    th_hi = brentq(lambda th: argz(th) - np.pi / 8, np.pi / 2 + 1e-9, np.pi,
                   xtol=1e-14)

    def rhs(_s, th):
        z = c + r * np.exp(1j * th[0])
        return [-(1 - abs(z) ** 2) / (2 * r)]

    hit = lambda _s, th: th[0] - th_hi
    hit.terminal = True
    sol = solve_ivp(rhs, [0, 30.0], [np.pi], rtol=1e-12, atol=1e-14, events=hit)
    if not sol.t_events[0].size:
        return None, 0.0
    s_end = float(sol.t_events[0][0])
    n_half = max(1, int(round(s_end / delta)))
    svals = np.linspace(0.0, s_end, n_half + 1)
    sol2 = solve_ivp(rhs, [0, s_end], [np.pi], rtol=1e-12, atol=1e-14,
                     t_eval=svals)
    zs = c + r * np.exp(1j * sol2.y[0])
    zs[-1] = np.abs(zs[-1]) * np.exp(1j * np.pi / 8)
    pts = np.concatenate([np.conj(zs[1:][::-1]), zs])
    return pts, 2 * s_end


class SurfaceMesh:
    """Vertex cloud of the fundamental octagon with boundary identifications.

    Attributes
    ----------
    verts : complex array, all vertices (primaries and ghosts).
    triangles : (T,3) int array of a Delaunay triangulation inside the octagon.
    nclass : int array; nclass[v] is the primary representative of v.
    nfac : complex array; derivative gamma'(rep position) of the deck map
        sending the representative to v (1 for primaries).  A tensor of type
        (a, b) satisfies value[v] = value[rep] * nfac[v]**(-a) * conj(nfac[v])**(-b).
    prim : indices of primary vertices; prim_of[v] is the primary position.
    pairings : list of (ghost vertex, primary vertex, generator letter) for
        the side identifications (corner copies carry letter -1).
    """

    def __init__(self, group: FuchsianGroup, resolution: int):
        if resolution < 6:
            raise ValueError("resolution too small to triangulate the octagon")
        self.group = group
        self.resolution = int(resolution)
        self.delta = APOTHEM / resolution
        self._build_vertices()
        self._build_classes()
        self._build_triangles()

    # -- construction -----------------------------------------------------

    def _build_vertices(self):
        delta = self.delta
        ph = np.exp(1j * np.pi / 4)
        rows = []
        m = 0
        while True:
            t = m * delta
            if t > APOTHEM - 0.75 * delta:
                break
            pts, length = _row_points(t, delta)
            if pts is None or length < 1.2 * delta:
                break
            rows.append(pts)
            m += 1
        self._onion_levels = len(rows)
        t_max = (len(rows) - 1) * delta

        seen = {}
        verts = []

        def add(z):
            key = (round(z.real, 8), round(z.imag, 8))
            for kk in (key,
                       (round(z.real + 2e-9, 8), round(z.imag, 8)),
                       (round(z.real - 2e-9, 8), round(z.imag, 8)),
                       (round(z.real, 8), round(z.imag + 2e-9, 8)),
                       (round(z.real, 8), round(z.imag - 2e-9, 8))):
                if kk in seen:
                    return seen[kk]
            seen[key] = len(verts)
            verts.append(z)
            return len(verts) - 1

        side_rows = {}
        for m, pts in enumerate(rows):
            for k in range(8):
                side_rows[(m, k)] = [add(p * ph ** k) for p in pts]
        add(0j)
        j = 1
        while True:
            rho = j * delta
            re = np.tanh(rho / 2)
            n = max(8, 8 * int(round(2 * np.pi * np.sinh(rho) / (8 * delta))))
            ring = re * np.exp(1j * (2 * np.pi * np.arange(n) / n
                                     + (np.pi / n) * (j % 2)))
            keep = dist_to_boundary(ring) > t_max + 0.6 * delta
            if not keep.any():
                break
            for p in ring[keep]:
                add(p)
            j += 1
        self.verts = np.array(verts)
        self.side_nodes = [side_rows[(0, k)] for k in range(8)]

    def _build_classes(self):
        N = len(self.verts)
        nclass = np.arange(N)
        nfac = np.ones(N, dtype=complex)
        pairings = []
        Mb = len(self.side_nodes[0]) - 1
        for k in range(4, 8):
            gi = mob_inverse(self.group.gens[k - 4])
            for i, vi in enumerate(self.side_nodes[k]):
                partner = self.side_nodes[k - 4][Mb - i]
                if vi == partner:
                    continue
                q = self.verts[partner]
                if abs(mob_apply(gi, q) - self.verts[vi]) > 1e-9:
                    raise AssertionError("boundary pairing mismatch")
                nclass[vi] = partner
                nfac[vi] = mob_deriv(gi, q)
                pairings.append((vi, partner, k - 4))
        # resolve chains (corners get mapped via two side maps)
        for _ in range(6):
            moved = False
            for v in range(N):
                c = nclass[v]
                if nclass[c] != c:
                    nfac[v] = nfac[v] * nfac[c]
                    nclass[v] = nclass[c]
                    moved = True
            if not moved:
                break
        # identify all corner copies with a single representative
        corners = [i for i in range(N)
                   if abs(abs(self.verts[i]) - CORNER_RADIUS) < 1e-9]
        if len(corners) != 8:
            raise AssertionError("expected 8 corner copies, found %d" % len(corners))
        rep0 = min(int(nclass[c]) for c in corners)
        ball = self.group.ball(2.6 * APOTHEM + 1.0)
        for c in corners:
            if int(nclass[c]) == rep0:
                continue
            hit = False
            for M in ball:
                if abs(mob_apply(M, self.verts[rep0]) - self.verts[c]) < 1e-9:
                    nclass[c] = rep0
                    nfac[c] = mob_deriv(M, self.verts[rep0])
                    pairings.append((c, rep0, -1))
                    hit = True
                    break
            if not hit:
                raise AssertionError("corner identification failed")
        self.nclass = nclass
        self.nfac = nfac
        self.pairings = pairings
        self.prim = np.where(nclass == np.arange(N))[0]
        prim_of = -np.ones(N, dtype=int)
        prim_of[self.prim] = np.arange(len(self.prim))
        self.prim_of = prim_of

    def _build_triangles(self):
        tri = Delaunay(np.c_[self.verts.real, self.verts.imag]).simplices
        bc = self.verts[tri].mean(axis=1)
        self.triangles = tri[inside_octagon(bc)]
        p0, p1, p2 = (self.verts[self.triangles[:, j]] for j in range(3))
        self.tri_area_euclid = 0.5 * np.abs(np.imag(np.conj(p1 - p0) * (p2 - p0)))

    # -- basic queries ------------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.verts)

    @property
    def n_primary(self):
        return len(self.prim)

    def lumped_euclid_weights(self):
        """Per-primary euclidean area weights, ghost cells folded onto their
        representatives with the type-(1,1) density transport factor."""
        w = np.zeros(self.n_vertices)
        for j in range(3):
            np.add.at(w, self.triangles[:, j], self.tri_area_euclid / 3.0)
        folded = np.zeros(self.n_vertices)
        for v in range(self.n_vertices):
            folded[self.nclass[v]] += w[v] / abs(self.nfac[v]) ** 2
        return folded[self.prim]

    def transport_factor(self, v, a, b):
        """Factor f with value[v] = value[rep] * f for tensor type (a, b)."""
        g = self.nfac[v]
        return g ** (-a) * np.conj(g) ** (-b)
