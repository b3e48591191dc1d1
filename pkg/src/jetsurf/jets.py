"""Truncated jet algebra on cotangent fibers and higher complex structures.

A jet is a complex polynomial in the fiber variables (p, pbar) with zero
constant term, truncated at a fixed total degree.  JetField attaches one
jet per base point (Bolza mesh or disk chart); its (a,b) coefficient slice
is a tensor field of type (-a,-b).  An n-complex structure is the ideal
generated pointwise by -pbar + mu_2 p + ... + mu_n p^(n-1) (positive
normalization) or pbar + mu_2 p + ... (negative normalization, the
internal default).
"""

from __future__ import annotations

import numpy as np

NEGATIVE = "negative"
POSITIVE = "positive"


def _degree_mask(D):
    m = np.zeros((D + 1, D + 1), dtype=bool)
    for a in range(D + 1):
        for b in range(D + 1):
            m[a, b] = 1 <= a + b <= D
    return m


class JetPoly:
    """Pointwise truncated jet: sum c[a,b] p^a pbar^b, 1 <= a+b <= D."""

    __slots__ = ("degree_cap", "coeffs")

    def __init__(self, degree_cap, coeffs=None):
        D = int(degree_cap)
        if D < 1:
            raise ValueError("degree cap must be >= 1")
        self.degree_cap = D
        if coeffs is None:
            self.coeffs = np.zeros((D + 1, D + 1), dtype=complex)
        else:
            c = np.zeros((D + 1, D + 1), dtype=complex)
            arr = np.asarray(coeffs, dtype=complex)
            c[:arr.shape[0], :arr.shape[1]] = arr
            c[~_degree_mask(D)] = 0.0
            self.coeffs = c

    def copy(self):
        return JetPoly(self.degree_cap, self.coeffs)

    def __add__(self, other):
        self._check(other)
        return JetPoly(self.degree_cap, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return JetPoly(self.degree_cap, self.coeffs - other.coeffs)

    def __mul__(self, s):
        return JetPoly(self.degree_cap, self.coeffs * s)

    __rmul__ = __mul__

    def __neg__(self):
        return JetPoly(self.degree_cap, -self.coeffs)

    def norm(self):
        return float(np.abs(self.coeffs).max())

    def vanish_order(self):
        """Largest m with all terms of total degree < m zero."""
        D = self.degree_cap
        for t in range(1, D + 1):
            for a in range(t + 1):
                if abs(self.coeffs[a, t - a]) > 0:
                    return t
        return D + 1

    def _check(self, other):
        if other.degree_cap != self.degree_cap:
            raise ValueError("degree cap mismatch")

    def __repr__(self):
        terms = []
        D = self.degree_cap
        for a in range(D + 1):
            for b in range(D + 1 - a):
                c = self.coeffs[a, b]
                if abs(c) > 0:
                    terms.append("(%s) p^%d pbar^%d" % (c, a, b))
        return "JetPoly[D=%d](%s)" % (D, " + ".join(terms) or "0")


def jet_mul(f: JetPoly, g: JetPoly) -> JetPoly:
    """Truncated product of jets (degrees add, terms beyond the cap drop)."""
    if f.degree_cap != g.degree_cap:
        raise ValueError("degree cap mismatch")
    D = f.degree_cap
    full = np.zeros((2 * D + 1, 2 * D + 1), dtype=complex)
    fc, gc = f.coeffs, g.coeffs
    for a in range(D + 1):
        for b in range(D + 1 - a):
            if fc[a, b] == 0:
                continue
            full[a:a + D + 1, b:b + D + 1] += fc[a, b] * gc
    return JetPoly(D, full[:D + 1, :D + 1])


def jet_conj(f: JetPoly) -> JetPoly:
    """Conjugation: coefficients conjugated, (a,b) indices swapped."""
    return JetPoly(f.degree_cap, np.conj(f.coeffs).T)


class JetField:
    """Jet-valued field: coeffs[a, b] is a complex array over base points."""

    __slots__ = ("base", "degree_cap", "coeffs")

    def __init__(self, base, degree_cap, coeffs=None):
        D = int(degree_cap)
        self.base = base
        self.degree_cap = D
        n = base.n_points
        if coeffs is None:
            self.coeffs = np.zeros((D + 1, D + 1, n), dtype=complex)
        else:
            c = np.asarray(coeffs, dtype=complex)
            if c.shape != (D + 1, D + 1, n):
                raise ValueError("bad jet field coefficient shape")
            self.coeffs = c.copy()
            mask = _degree_mask(D)
            self.coeffs[~mask] = 0.0

    def copy(self):
        return JetField(self.base, self.degree_cap, self.coeffs)

    def at(self, i) -> JetPoly:
        return JetPoly(self.degree_cap, self.coeffs[:, :, i])

    def set_slice(self, a, b, values):
        if not 1 <= a + b <= self.degree_cap:
            raise ValueError("slice outside the jet truncation")
        self.coeffs[a, b] = values
        return self

    def slice(self, a, b):
        return self.coeffs[a, b]

    def slice_type(self, a, b):
        """Tensor type of the (a,b) coefficient slice."""
        return (-a, -b)

    def conj(self) -> JetField:
        return JetField(self.base, self.degree_cap,
                        np.conj(np.swapaxes(self.coeffs, 0, 1)))

    def homogeneous_part(self, k) -> JetField:
        out = JetField(self.base, self.degree_cap)
        for a in range(k + 1):
            b = k - a
            if b <= self.degree_cap and a <= self.degree_cap:
                out.coeffs[a, b] = self.coeffs[a, b]
        return out

    def is_real(self, tol=1e-12):
        return self.distance(self.conj()) <= tol * max(self.norm(), 1e-300)

    def symmetrize_real(self) -> JetField:
        """(H + conj(H))/2: the real Hamiltonian with the same analytic part."""
        c = self.conj()
        return JetField(self.base, self.degree_cap, 0.5 * (self.coeffs + c.coeffs))

    def __add__(self, other):
        self._check(other)
        return JetField(self.base, self.degree_cap, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return JetField(self.base, self.degree_cap, self.coeffs - other.coeffs)

    def __mul__(self, s):
        return JetField(self.base, self.degree_cap, self.coeffs * s)

    __rmul__ = __mul__

    def __neg__(self):
        return JetField(self.base, self.degree_cap, -self.coeffs)

    def norm(self):
        return float(np.abs(self.coeffs).max())

    def distance(self, other):
        self._check(other)
        return float(np.abs(self.coeffs - other.coeffs).max())

    def _check(self, other):
        if other.base is not self.base or other.degree_cap != self.degree_cap:
            raise ValueError("jet field base/cap mismatch")


def jet_field_mul(f: JetField, g: JetField) -> JetField:
    """Pointwise truncated product of jet fields."""
    if f.base is not g.base or f.degree_cap != g.degree_cap:
        raise ValueError("jet field base/cap mismatch")
    D = f.degree_cap
    out = JetField(f.base, D)
    fc, gc = f.coeffs, g.coeffs
    for a in range(D + 1):
        for b in range(D + 1 - a):
            w = fc[a, b]
            if not np.any(w):
                continue
            amax = D - a
            for m in range(amax + 1):
                for n in range(min(D - b, amax - m) + 1):
                    if a + m + b + n > D:
                        continue
                    v = gc[m, n]
                    if np.any(v):
                        out.coeffs[a + m, b + n] += w * v
    out.coeffs[~_degree_mask(D)] = 0.0
    return out


def jet_poisson(F: JetField, G: JetField) -> JetField:
    """Field-level Poisson bracket of jet fields.

    Expansion of {w p^k pbar^l, a p^m pbar^n}:
        [m a dw/dz - k w da/dz] p^(k+m-1) pbar^(l+n)
      + [n a dw/dzbar - l w da/dzbar] p^(k+m) pbar^(l+n-1),
    truncated at the common degree cap.
    """
    if F.base is not G.base or F.degree_cap != G.degree_cap:
        raise ValueError("jet field base/cap mismatch")
    base = F.base
    D = F.degree_cap
    out = JetField(base, D)

    def derivs(J):
        dz = {}
        dzb = {}
        for a in range(D + 1):
            for b in range(D + 1 - a):
                vals = J.coeffs[a, b]
                if np.any(vals):
                    dz[(a, b)] = base.slice_dz(vals, (-a, -b))
                    dzb[(a, b)] = base.slice_dzbar(vals, (-a, -b))
        return dz, dzb

    Fdz, Fdzb = derivs(F)
    Gdz, Gdzb = derivs(G)
    for k in range(D + 1):
        for l in range(D + 1 - k):
            w = F.coeffs[k, l]
            w_on = (k, l) in Fdz
            for m in range(D + 1):
                for n in range(D + 1 - m):
                    a_ = G.coeffs[m, n]
                    a_on = (m, n) in Gdz
                    if not (w_on or a_on):
                        continue
                    # p-part: lands in degree (k+m-1, l+n)
                    if k + m >= 1 and (k + m - 1) + (l + n) <= D:
                        term = np.zeros_like(w)
                        if m and w_on:
                            term += m * a_ * Fdz[(k, l)]
                        if k and a_on:
                            term -= k * w * Gdz[(m, n)]
                        out.coeffs[k + m - 1, l + n] += term
                    # pbar-part: lands in degree (k+m, l+n-1)
                    if l + n >= 1 and (k + m) + (l + n - 1) <= D:
                        term = np.zeros_like(w)
                        if n and w_on:
                            term += n * a_ * Fdzb[(k, l)]
                        if l and a_on:
                            term -= l * w * Gdzb[(m, n)]
                        out.coeffs[k + m, l + n - 1] += term
    out.coeffs[~_degree_mask(D)] = 0.0
    return out


class HigherStructure:
    """n-complex structure in centered or natural coordinates.

    mu[k] (k = 2..n) are the coefficient arrays of the local generator
    -pbar + mu_2 p + ... + mu_n p^(n-1)  (positive normalization) or
    +pbar + mu_2 p + ...                 (negative normalization).
    On the Bolza surface the coordinates are natural: mu_2 is identically
    zero and the base hyperbolic octagon carries Sigma.
    """

    def __init__(self, base, degree, normalization=NEGATIVE, mu=None):
        if degree < 2:
            raise ValueError("structure degree must be >= 2")
        if normalization not in (NEGATIVE, POSITIVE):
            raise ValueError("normalization flag must be negative/positive")
        self.base = base
        self.degree = int(degree)
        self.normalization = normalization
        n_pts = base.n_points
        self.mu = {}
        for k in range(2, self.degree + 1):
            if mu is not None and k in mu and mu[k] is not None:
                arr = np.asarray(mu[k], dtype=complex)
                if arr.shape != (n_pts,):
                    raise ValueError("mu_%d has wrong shape" % k)
                self.mu[k] = arr.copy()
            else:
                self.mu[k] = np.zeros(n_pts, dtype=complex)
        if self.is_surface_based() and np.abs(self.mu[2]).max() > 0:
            raise ValueError("natural coordinates on the surface need mu_2 = 0")
        if np.abs(self.mu[2]).max() >= 1.0:
            raise ValueError("|mu_2| must stay below 1")

    def is_surface_based(self):
        return hasattr(self.base, "mesh")

    def copy(self):
        return HigherStructure(self.base, self.degree, self.normalization,
                               {k: v.copy() for k, v in self.mu.items()})

    def sign(self):
        """Sign s in the reduction pbar == s (mu_2 p + ... + mu_n p^{n-1})."""
        return 1.0 if self.normalization == POSITIVE else -1.0

    def flip_normalization(self):
        """Equivalent structure in the other normalization (mu_k negate)."""
        other = POSITIVE if self.normalization == NEGATIVE else NEGATIVE
        return HigherStructure(self.base, self.degree, other,
                               {k: -v for k, v in self.mu.items()})

    def generator(self) -> JetField:
        """The local generator as a jet field of degree n-1."""
        D = self.degree - 1
        G = JetField(self.base, D)
        s0 = -1.0 if self.normalization == POSITIVE else 1.0
        G.coeffs[0, 1] = s0
        for k in range(2, self.degree + 1):
            if k - 1 <= D:
                G.coeffs[k - 1, 0] += self.mu[k]
        return G

    def distance(self, other):
        if other.degree != self.degree or other.base is not self.base:
            raise ValueError("structure mismatch")
        return max(float(np.abs(self.mu[k] - other.mu[k]).max())
                   for k in range(2, self.degree + 1))

    def max_mu2(self):
        return float(np.abs(self.mu[2]).max())


def project_structure(I: HigherStructure, k: int) -> HigherStructure:
    """Forget mu_{k+1}..mu_n; the projection pi_k to degree-k structures."""
    if not 2 <= k <= I.degree:
        raise ValueError("projection degree out of range")
    return HigherStructure(I.base, k, I.normalization,
                           {j: I.mu[j] for j in range(2, k + 1)})


def ideal_reduce(H: JetField, I: HigherStructure):
    """Normalized form of a jet field modulo the structure ideal.

    Substitutes pbar == s (mu_2 p + ... + mu_n p^{n-1}) until no pbar
    remains; returns [w_1, ..., w_D] coefficient arrays, w_k of tensor type
    (-k, 0).  The result is the unique normalized form of H mod I.
    """
    if H.base is not I.base:
        raise ValueError("jet field and structure must share a base")
    if I.max_mu2() >= 1.0:
        raise ValueError("|mu_2| >= 1 somewhere; structure is degenerate")
    D = H.degree_cap
    s = I.sign()
    work = H.coeffs.copy()
    for b in range(D, 0, -1):
        for a in range(0, D + 1 - b):
            c = work[a, b].copy()
            if not np.any(c):
                continue
            work[a, b] = 0.0
            # c p^a pbar^b -> c p^a pbar^{b-1} * s * sum_k mu_k p^{k-1}
            for k in range(2, I.degree + 1):
                a2 = a + k - 1
                if a2 + (b - 1) <= D:
                    work[a2, b - 1] += s * c * I.mu[k]
    out = [work[k, 0] for k in range(1, D + 1)]
    return out


def reduce_to_jetfield(H: JetField, I: HigherStructure) -> JetField:
    """ideal_reduce wrapped back into a jet field (pure p-powers)."""
    w = ideal_reduce(H, I)
    out = JetField(H.base, H.degree_cap)
    for k, wk in enumerate(w, start=1):
        out.coeffs[k, 0] = wk
    return out


def _eliminate_pbar(coeffs, D, n_pts):
    """Given generator coefficients (with pbar-coefficient alpha nowhere 0),
    return r[j] (j=1..D) with pbar == sum_j r_j p^j modulo the ideal."""
    alpha = coeffs[0, 1].copy()
    if np.abs(alpha).min() < 1e-14:
        raise ValueError("degenerate generator: pbar coefficient vanishes")
    R = -coeffs / alpha
    R[0, 1] = 0.0
    # split R into pure-p part and pbar-carrying part; iterate substitution
    for _ in range(2 * D + 4):
        mixed = False
        out = np.zeros_like(R)
        for a in range(D + 1):
            for b in range(D + 1 - a):
                c = R[a, b]
                if not np.any(c):
                    continue
                if b == 0:
                    out[a, 0] += c
                    continue
                mixed = True
                # substitute one pbar: c p^a pbar^b = c p^a pbar^{b-1} * (R)
                for a2 in range(D + 1):
                    for b2 in range(D + 1 - a2):
                        r2 = R[a2, b2]
                        if not np.any(r2):
                            continue
                        aa, bb = a + a2, b - 1 + b2
                        if aa + bb <= D:
                            out[aa, bb] += c * r2
        R = out
        if not mixed:
            break
    if any(np.any(R[a, b]) for a in range(D + 1)
           for b in range(1, D + 1 - a)):
        raise RuntimeError("pbar elimination did not terminate")
    if np.abs(R[0, 0]).max() > 1e-9:
        raise RuntimeError("generator has constant term after elimination")
    return [R[j, 0] for j in range(1, D + 1)]


def act_by_chart_diffeo(I: HigherStructure, fmap) -> HigherStructure:
    """Action of the lift of a chart diffeomorphism on a structure.

    Substitutes the linear fiber action of (Df)^-1 into the jet generator
    and renormalizes: with J = |df|^2 - |dbar f|^2 > 0,
        p    -> (conj(df) p - conj(dbar f) pbar)/J,
        pbar -> (-dbar f p + df pbar)/J,
    and coefficients are evaluated at f(z).
    """
    if I.is_surface_based():
        raise ValueError("chart-level action needs a chart-based structure")
    chart = I.base
    if fmap.chart is not chart:
        raise ValueError("map and structure live on different charts")
    D = I.degree - 1
    n_pts = chart.n_points
    J = fmap.jac
    sub_p = (np.conj(fmap.dzf) / J, -np.conj(fmap.dzbf) / J)   # (p, pbar) parts
    sub_q = (-fmap.dzbf / J, fmap.dzf / J)

    # powers sub_p^i sub_q^j expanded in (p, pbar)
    def expand(i, j):
        from math import comb
        out = {}
        for t in range(i + 1):
            for u in range(j + 1):
                coef = (comb(i, t) * comb(j, u)
                        * sub_p[0] ** t * sub_p[1] ** (i - t)
                        * sub_q[0] ** u * sub_q[1] ** (j - u))
                key = (t + u, (i - t) + (j - u))
                out[key] = out.get(key, 0) + coef
        return out

    gen = np.zeros((D + 1, D + 1, n_pts), dtype=complex)
    s0 = -1.0 if I.normalization == POSITIVE else 1.0
    # pbar term
    for key, coef in expand(0, 1).items():
        gen[key[0], key[1]] += s0 * coef
    # mu_k p^{k-1} terms with coefficients at f(z)
    for k in range(2, I.degree + 1):
        mu_f = fmap.compose_field(I.mu[k])
        for key, coef in expand(k - 1, 0).items():
            if key[0] + key[1] <= D:
                gen[key[0], key[1]] += mu_f * coef
    r = _eliminate_pbar(gen, D, n_pts)
    sgn = I.sign()
    mu = {k: sgn * r[k - 2] for k in range(2, I.degree + 1)}
    out = HigherStructure(chart, I.degree, I.normalization, mu)
    if out.max_mu2() >= 1.0:
        raise AssertionError("|mu_2| >= 1 after diffeomorphism action")
    return out
