"""Exact arithmetic model of the nilpotent group of 1-variable jets.

The group N consists of truncated power series x + a_2 x^2 + ... + a_n x^n
with composition modulo degree >= n+1 as the product.  All coefficients are
rationals and every operation here is exact: this module is the
tolerance-free anchor of the test suite.  N^k denotes the subgroup of
elements whose nonlinear part starts at degree k.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product


class ModelJet:
    """x + a_2 x^2 + ... + a_n x^n with exact rational coefficients.

    ``coeffs`` holds (a_2, ..., a_n); the unit linear coefficient is implicit.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n, coeffs=()):
        if n < 2:
            raise ValueError("truncation degree must be >= 2")
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > n - 1:
            raise ValueError("too many coefficients for truncation %d" % n)
        cs += [Fraction(0)] * (n - 1 - len(cs))
        self.n = n
        self.coeffs = tuple(cs)

    @classmethod
    def identity(cls, n):
        return cls(n)

    def poly(self):
        """Full coefficient tuple (c_1, ..., c_n) with c_1 = 1."""
        return (Fraction(1),) + self.coeffs

    def depth(self):
        """Smallest k >= 2 with a_k != 0, or n+1 for the identity."""
        for k in range(2, self.n + 1):
            if self.coeffs[k - 2] != 0:
                return k
        return self.n + 1

    def __eq__(self, other):
        return isinstance(other, ModelJet) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, self.coeffs))

    def __repr__(self):
        terms = ["x"]
        for k, c in enumerate(self.coeffs, start=2):
            if c:
                terms.append("%s*x^%d" % (c, k))
        return "ModelJet(%s)" % " + ".join(terms)


def _poly_compose(f, g, n):
    """Coefficients of f(g(x)) mod x^{n+1}; f, g are (c_1..c_n) tuples."""
    # powers of g up to degree n
    out = [Fraction(0)] * n
    gp = [Fraction(0)] * n  # g^m coefficients, start with g^1
    gp = list(g)
    for m in range(1, n + 1):
        fm = f[m - 1]
        if fm:
            for d in range(m, n + 1):
                out[d - 1] += fm * gp[d - 1]
        if m < n:
            # gp <- gp * g (truncated)
            new = [Fraction(0)] * n
            for i in range(m, n + 1):
                gi = gp[i - 1]
                if gi:
                    for j in range(1, n - i + 1):
                        new[i + j - 1] += gi * g[j - 1]
            gp = new
    return tuple(out)


def mj_compose(f: ModelJet, g: ModelJet) -> ModelJet:
    """Group product: the jet of f o g, truncated."""
    if f.n != g.n:
        raise ValueError("truncation mismatch: %d vs %d" % (f.n, g.n))
    comp = _poly_compose(f.poly(), g.poly(), f.n)
    assert comp[0] == 1
    return ModelJet(f.n, comp[1:])


def mj_invert(f: ModelJet) -> ModelJet:
    """Compositional inverse mod x^{n+1} (exact)."""
    n = f.n
    # solve f(h(x)) = x degree by degree; h_1 = 1
    h = [Fraction(1)] + [Fraction(0)] * (n - 1)
    fp = f.poly()
    for d in range(2, n + 1):
        # coefficient of x^d in f(h) with current h (h_d unknown, enters via
        # the linear term of f only, whose coefficient is 1)
        comp = _poly_compose(fp, tuple(h), n)
        h[d - 1] -= comp[d - 1]
    inv = ModelJet(n, h[1:])
    assert mj_compose(f, inv).coeffs == ModelJet.identity(n).coeffs
    return inv


def mj_exp(n, v) -> ModelJet:
    """Time-1 flow of the vector field (v_2 x^2 + ... + v_n x^n) d/dx.

    Nilpotency makes the exponential series finite and exact:
    exp(V) x = sum_m V^m(x)/m! where V raises degree by at least 1.
    """
    v = [Fraction(c) for c in v]
    if len(v) > n - 1:
        raise ValueError("too many vector-field coefficients")
    v += [Fraction(0)] * (n - 1 - len(v))
    # V acts on polynomials p(x) by v(x) p'(x), truncated at degree n
    def apply_v(p):
        out = [Fraction(0)] * n
        for i in range(1, n + 1):  # term x^i in p
            pi = p[i - 1]
            if not pi:
                continue
            for k in range(2, n + 1):  # term v_k x^k in v
                vk = v[k - 2]
                if vk and i - 1 + k <= n:
                    out[i + k - 2] += pi * vk * i
        return out

    term = [Fraction(1)] + [Fraction(0)] * (n - 1)  # p = x
    total = list(term)
    fact = Fraction(1)
    for m in range(1, n + 1):
        term = apply_v(term)
        fact *= m
        if all(c == 0 for c in term):
            break
        for i in range(n):
            total[i] += term[i] / fact
    assert total[0] == 1
    return ModelJet(n, total[1:])


def mj_log(f: ModelJet):
    """Vector-field coefficients (v_2, ..., v_n) with mj_exp(v) = f (exact)."""
    n = f.n
    v = [Fraction(0)] * (n - 1)
    for d in range(2, n + 1):
        cur = mj_exp(n, v)
        # lowest-degree discrepancy is corrected by the matching v_d
        v[d - 2] += f.coeffs[d - 2] - cur.coeffs[d - 2]
    assert mj_exp(n, v) == f
    return tuple(v)


def mj_commutator(f: ModelJet, g: ModelJet) -> ModelJet:
    gi = mj_invert(g)
    return mj_compose(mj_compose(f, g), mj_compose(mj_invert(f), gi))


def _grid_elements(n, depth, values):
    """All ModelJets of truncation n with coefficients in `values` and
    vanishing below `depth`."""
    slots = n + 1 - depth
    for combo in product(values, repeat=slots):
        coeffs = [Fraction(0)] * (depth - 2) + list(combo)
        yield ModelJet(n, coeffs)


def mj_central_series(n, grid=(-1, 0, 1), max_exhaustive=3125):
    """Verify the lower-central-series structure on a coefficient grid.

    Checks, exactly:
      * [N, N^k] subset N^{k+1} for 2 <= k <= n,
      * products of N^k elements add their degree-k coefficients,
      * the top subgroup N^n is central and N^{n+1}-trivial elements only,
      * nilpotency: iterated commutators with N vanish after n-2 steps.

    Returns a report dict; raises AssertionError on any violation.
    """
    values = [Fraction(v) for v in grid]
    report = {"n": n, "checked_pairs": 0, "series_length": max(0, n - 2)}
    # representative sample of N: grid over all coefficients, capped
    full = list(_grid_elements(n, 2, values))
    if len(full) > max_exhaustive:
        full = full[::max(1, len(full) // max_exhaustive)]
    for k in range(2, n + 1):
        layer = list(_grid_elements(n, k, values))
        if len(layer) > max_exhaustive:
            layer = layer[::max(1, len(layer) // max_exhaustive)]
        for g in layer[: min(len(layer), 60)]:
            for f in full[: min(len(full), 60)]:
                c = mj_commutator(f, g)
                assert c.depth() >= min(k + 1, n + 1), (f, g, c)
                report["checked_pairs"] += 1
        # abelian top factor: degree-k coefficient adds
        for g1 in layer[: min(len(layer), 40)]:
            for g2 in layer[: min(len(layer), 40)]:
                p = mj_compose(g1, g2)
                if k <= n:
                    assert p.coeffs[k - 2] == g1.coeffs[k - 2] + g2.coeffs[k - 2]
    # nilpotency class: n-1 fold commutators vanish
    f = ModelJet(n, [1] * (n - 1))
    g = ModelJet(n, [-1, 1] + [0] * (n - 3)) if n >= 3 else ModelJet(n, [1])
    c = g
    steps = 0
    while c.depth() <= n and steps < n + 2:
        c = mj_commutator(f, c)
        steps += 1
    assert steps <= max(1, n - 1), "nilpotency class exceeded"
    report["nilpotency_steps"] = steps
    return report
