"""Hamiltonian flows on higher complex structures.

The first-variation formula (direct and Maass-derivative forms), classical
RK4 integration of the coefficient fields with the ideal reduction
refreshed at every stage, pullback of Beltrami differentials on charts,
and the inductive/exponential decompositions of 2-stationary flows.
"""

from __future__ import annotations

import numpy as np

from .jets import (NEGATIVE, POSITIVE, HigherStructure, JetField,
                   ideal_reduce)
from .surface import TensorField


class HamiltonianJet:
    """Piecewise-constant-in-time generating Hamiltonian (jet level).

    ``pieces`` is an ordered list of (duration, JetField); a single piece is
    an autonomous Hamiltonian.  Real Hamiltonians satisfy jet_conj(H) = H
    per piece.
    """

    def __init__(self, pieces):
        pieces = [(float(d), J) for d, J in pieces]
        if not pieces:
            raise ValueError("a Hamiltonian needs at least one piece")
        base = pieces[0][1].base
        cap = pieces[0][1].degree_cap
        for d, J in pieces:
            if d <= 0:
                raise ValueError("piece durations must be positive")
            if J.base is not base or J.degree_cap != cap:
                raise ValueError("pieces must share base and degree cap")
            if np.abs(J.coeffs[0, 0]).max() > 0:
                raise ValueError("Hamiltonian jets must vanish on the zero section")
        self.pieces = pieces
        self.base = base
        self.degree_cap = cap

    @classmethod
    def autonomous(cls, J: JetField, duration=1.0):
        return cls([(duration, J)])

    def total_time(self):
        return sum(d for d, _ in self.pieces)

    def is_real(self, tol=1e-10):
        return all(J.is_real(tol) for _, J in self.pieces)

    def vanish_order(self):
        """Largest m such that every piece vanishes below total degree m."""
        return min(J.vanish_order() for _, J in self.pieces)

    def time_average(self) -> JetField:
        """Duration-weighted jet average (the averaging of piecewise flows)."""
        T = self.total_time()
        out = JetField(self.base, self.degree_cap)
        for d, J in self.pieces:
            out = out + (d / T) * J
        return out

    def reversed(self) -> "HamiltonianJet":
        """Time-reversed Hamiltonian: flows undo the original ones."""
        return HamiltonianJet([(d, -J) for d, J in reversed(self.pieces)])


def vanish_order_field(J: JetField):
    D = J.degree_cap
    for t in range(1, D + 1):
        for a in range(t + 1):
            if np.abs(J.coeffs[a, t - a]).max() > 0:
                return t
    return D + 1


JetField.vanish_order = vanish_order_field


def homogeneous_real(base, k, coeff_values, degree_cap) -> JetField:
    """Real homogeneous degree-k Hamiltonian c p^k + conj(c) pbar^k."""
    J = JetField(base, degree_cap)
    J.coeffs[k, 0] = coeff_values
    J.coeffs[0, k] = np.conj(coeff_values)
    return J


def _dbar_slice(base, values, k):
    """Corrected dbar of a type (-k, 0) slice (surface) or plain (chart)."""
    if hasattr(base, "mesh"):
        t = TensorField(base, (-k, 0), values)
        return base.dbar_op(t).values
    return base.slice_dzbar(values, (-k, 0))


def _d_slice(base, values, ttype):
    return base.slice_dz(np.asarray(values, dtype=complex), ttype)


def first_variation(I: HigherStructure, H: JetField):
    """Direct Fock-Thomas first variation; returns {l: mu_dot_l arrays}.

    For the reduced slices w_k of H mod I:
        l = k+1:  -+ dbar w_k + mu_2 d w_k - k w_k d mu_2
                  (upper sign in positive normalization)
        l > k+1:  (l-k) mu_{l-k+1} d w_k - k w_k d mu_{l-k+1}
        l < k+1:  0
    superposed over k.
    """
    if H.base is not I.base:
        raise ValueError("base mismatch")
    base = I.base
    n = I.degree
    w = ideal_reduce(H, I)
    sgn_dbar = -1.0 if I.normalization == POSITIVE else 1.0
    mudot = {l: np.zeros(base.n_points, dtype=complex) for l in range(2, n + 1)}
    nonlin = {}
    mu2 = I.mu[2]
    mu2_on = np.abs(mu2).max() > 0
    for k in range(1, len(w) + 1):
        wk = w[k - 1]
        if not np.any(wk):
            continue
        l = k + 1
        if 2 <= l <= n:
            term = sgn_dbar * _dbar_slice(base, wk, k)
            if mu2_on:
                term = term + mu2 * _d_slice(base, wk, (-k, 0)) \
                    - k * wk * _d_slice(base, mu2, (-1, 1))
            mudot[l] += term
        for l in range(k + 2, n + 1):
            j = l - k + 1
            muj = I.mu[j]
            if not np.any(muj) and j != 2:
                continue
            if j == 2 and not mu2_on:
                continue
            nonlin[l] = nonlin.get(l, 0.0) + (
                (l - k) * muj * _d_slice(base, wk, (-k, 0))
                - k * wk * _d_slice(base, muj, (1 - j, 1)))
    for l, term in nonlin.items():
        mudot[l] += term
    return mudot


def first_variation_maass(I: HigherStructure, H: JetField):
    """Maass-derivative form of the first variation (negative normalization).

    l > k+1 terms read (l-k) mu_{l-k+1} d^M w_k - k w_k d^M mu_{l-k+1} with
    the Maass raising operator of the base hyperbolic metric; the l = k+1
    term is implemented for the natural-coordinate case mu_2 = 0, where the
    conjugated form collapses to dbar w_k.
    """
    if I.normalization != NEGATIVE:
        raise ValueError("Maass form is stated in negative normalization")
    if not hasattr(I.base, "mesh"):
        raise ValueError("Maass derivatives need the hyperbolic surface")
    if I.max_mu2() > 0:
        raise ValueError("l = k+1 Maass term implemented for mu_2 = 0 only")
    surf = I.base
    n = I.degree
    w = ideal_reduce(H, I)
    mudot = {l: np.zeros(surf.n_points, dtype=complex) for l in range(2, n + 1)}
    nonlin = {}
    for k in range(1, len(w) + 1):
        wk = w[k - 1]
        if not np.any(wk):
            continue
        if 2 <= k + 1 <= n:
            mudot[k + 1] += _dbar_slice(surf, wk, k)
        wk_f = TensorField(surf, (-k, 0), wk)
        dwk = surf.maass_d_op(wk_f).values
        for l in range(k + 2, n + 1):
            j = l - k + 1
            muj = I.mu[j]
            if not np.any(muj):
                continue
            muj_f = TensorField(surf, (1 - j, 1), muj)
            dmuj = surf.maass_d_op(muj_f).values
            nonlin[l] = nonlin.get(l, 0.0) + (l - k) * muj * dwk - k * wk * dmuj
    for l, term in nonlin.items():
        mudot[l] += term
    return mudot


class FlowAborted(RuntimeError):
    def __init__(self, message, record):
        super().__init__(message)
        self.record = record


class FlowRecord:
    """Trajectory summary of one integration."""

    def __init__(self, initial, steps_per_unit):
        self.initial = initial
        self.steps_per_unit = steps_per_unit
        self.times = []
        self.sup_norms = []     # per step: {k: sup |mu_k|}
        self.final = None
        self.aborted = False

    def log(self, t, I):
        self.times.append(float(t))
        self.sup_norms.append({k: float(np.abs(I.mu[k]).max())
                               for k in range(2, I.degree + 1)})

    def displacement(self):
        out = {}
        for k in range(2, self.initial.degree + 1):
            out[k] = float(np.abs(self.final.mu[k] - self.initial.mu[k]).max())
        return out


MU2_MARGIN = 1e-3


def flow_integrate(I: HigherStructure, H: HamiltonianJet, steps=64) -> FlowRecord:
    """Classical RK4 on the coefficient fields, reduction refreshed per stage.

    ``steps`` counts stages per unit time.  On the Bolza surface the
    Hamiltonian must be 2-stationary (no degree-1 slices); |mu_2| < 1 is
    enforced along the trajectory.
    """
    if H.base is not I.base:
        raise ValueError("base mismatch")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if I.is_surface_based() and H.vanish_order() < 2:
        raise ValueError("surface flows must be 2-stationary "
                         "(degree-1 Hamiltonians live on disk charts)")
    record = FlowRecord(I.copy(), steps)
    cur = I.copy()
    t = 0.0
    record.log(t, cur)

    def rhs(J, state):
        trial = HigherStructure(I.base, I.degree, I.normalization, state)
        md = first_variation(trial, J)
        return md, trial

    for duration, J in H.pieces:
        nst = max(1, int(round(steps * duration)))
        dt = duration / nst
        for _ in range(nst):
            state0 = {k: cur.mu[k] for k in range(2, I.degree + 1)}
            k1, _ = rhs(J, state0)
            k2, _ = rhs(J, {k: state0[k] + 0.5 * dt * k1[k] for k in state0})
            k3, _ = rhs(J, {k: state0[k] + 0.5 * dt * k2[k] for k in state0})
            k4, _ = rhs(J, {k: state0[k] + dt * k3[k] for k in state0})
            new = {k: state0[k] + (dt / 6.0) * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k])
                   for k in state0}
            if np.abs(new[2]).max() >= 1.0 - MU2_MARGIN:
                record.final = cur
                record.aborted = True
                raise FlowAborted("|mu_2| reached the safety margin", record)
            cur = HigherStructure(I.base, I.degree, I.normalization, new)
            t += dt
            record.log(t, cur)
    record.final = cur
    return record


def flow_endpoint(I, H, steps=64):
    return flow_integrate(I, H, steps).final


def pullback_beltrami(fmap, mu_values):
    """Classical pullback of a Beltrami differential on a chart:
    f* mu = (dbar f + (mu o f) dbar conj(f)) / (d f + (mu o f) d conj(f))."""
    mu_values = np.asarray(mu_values, dtype=complex)
    if np.abs(mu_values).max() >= 1.0:
        raise ValueError("|mu| must stay below 1")
    mu_f = fmap.compose_field(mu_values)
    num = fmap.dzbf + mu_f * np.conj(fmap.dzf)
    den = fmap.dzf + mu_f * np.conj(fmap.dzbf)
    if np.abs(den).min() < 1e-12:
        raise ValueError("degenerate denominator in Beltrami pullback")
    out = num / den
    if np.abs(out).max() >= 1.0:
        raise AssertionError("pullback left the unit Beltrami ball")
    return out


# -- inductive and exponential coordinates -------------------------------------


def default_test_panel(surface, degree, count=5, seed=11, amplitude=0.25):
    """Seeded panel of pseudo-random test structures (natural coordinates)."""
    panel = []
    for i in range(count):
        rng = np.random.default_rng(seed + 97 * i)
        mu = {}
        for k in range(3, degree + 1):
            f = surface.random_smooth_field((1 - k, 1), rng, amplitude)
            mu[k] = f.values
        panel.append(HigherStructure(surface, degree, NEGATIVE, mu))
    return panel


def _panel_displacement(H: HamiltonianJet, panel, level, steps):
    """mu_level displacements of the flow of H over the panel; returns the
    mean displacement field and the max spread across the panel."""
    disps = []
    for I in panel:
        J = flow_endpoint(I, H, steps)
        disps.append(J.mu[level] - I.mu[level])
    mean = sum(disps) / len(disps)
    spread = max(float(np.abs(d - mean).max()) for d in disps)
    return mean, spread


def decompose_inductive(H: HamiltonianJet, I_tests=None, steps=64,
                        stationarity_tol=1e-5):
    """Inductive coordinates of a 2-stationary piecewise Hamiltonian flow.

    Returns homogeneous jet fields (H^2, ..., H^{n-1}) whose sequential
    time-1 autonomous flows reproduce the action of H.  At step k the
    degree-k part is the duration-weighted jet average when the current
    residual is k-stationary at jet level (the averaging lemma applies
    exactly); otherwise its (k,0)/(0,k) slices are fitted from the
    mu_{k+1}-displacement over the test panel, which is well defined
    because k-stationary displacements are structure-independent.
    """
    if H.vanish_order() < 2:
        raise ValueError("decomposition needs a 2-stationary Hamiltonian")
    base = H.base
    if not hasattr(base, "mesh"):
        raise ValueError("inductive coordinates live on the surface")
    n_cap = H.degree_cap  # = n - 1
    degree = n_cap + 1
    if I_tests is None:
        I_tests = default_test_panel(base, degree)
    from .hodge import get_solver
    parts = []
    residual = H
    for k in range(2, n_cap + 1):
        avg = residual.time_average()
        part = avg.homogeneous_part(k)
        # jet-level k-stationarity (no slice below degree k in any piece)
        # lets the averaging lemma apply verbatim; otherwise fit the
        # (k,0)-slice from the panel displacement.
        jet_stationary = residual.vanish_order() >= k
        if not jet_stationary:
            mean, spread = _panel_displacement(residual, I_tests, k + 1, steps)
            scale = float(np.abs(mean).max()) + 1e-300
            if spread / scale > stationarity_tol and spread > stationarity_tol:
                raise RuntimeError(
                    "residual fails the stationarity test at step %d "
                    "(spread %.2e)" % (k, spread))
            solver = get_solver(base, k + 1)
            c, rel = solver.solve_dbar_potential(
                TensorField(base, (-k, 1), mean), pre_project=False)
            part.coeffs[k, 0] = c.values
            part.coeffs[0, k] = np.conj(c.values)
        parts.append(part)
        pieces = [(1.0, -part)] + residual.pieces
        residual = HamiltonianJet(pieces)
    return parts


def recompose(parts) -> HamiltonianJet:
    """Sequential flow h_2 h_3 ... h_{n-1} as a piecewise Hamiltonian."""
    return HamiltonianJet([(1.0, P) for P in parts])


def exponential_hamiltonian(parts, I_tests=None, steps=64, tol=1e-6,
                            max_sweeps=4):
    """Single autonomous Hamiltonian whose time-1 flow matches the
    sequential flow of homogeneous parts on all test structures.

    Built level by level: the degree-k correction is the dbar-potential of
    the mu_{k+1} mismatch, which is the numerical fixed point of the
    construction in the exponential-coordinates argument.
    """
    if not parts:
        raise ValueError("no parts given")
    base = parts[0].base
    n_cap = parts[0].degree_cap
    degree = n_cap + 1
    if I_tests is None:
        I_tests = default_test_panel(base, degree)
    from .hodge import get_solver
    target = recompose(parts)
    G = JetField(base, n_cap) + parts[0]
    for sweep in range(max_sweeps):
        worst = 0.0
        for k in range(2, n_cap + 1):
            level = k + 1
            if level > degree:
                continue
            mism = []
            for I in I_tests:
                J_target = flow_endpoint(I, target, steps)
                J_G = flow_endpoint(I, HamiltonianJet.autonomous(G), steps)
                mism.append(J_target.mu[level] - J_G.mu[level])
            mean = sum(mism) / len(mism)
            scale = max(float(np.abs(I.mu[level]).max()) for I in I_tests) + 1.0
            defect = float(np.abs(mean).max())
            worst = max(worst, defect / scale)
            if defect / scale <= 0.1 * tol:
                continue
            solver = get_solver(base, level)
            c, _ = solver.solve_dbar_potential(
                TensorField(base, (-k, 1), mean), pre_project=False)
            G = G + homogeneous_real(base, k, c.values, n_cap)
        if worst <= 0.1 * tol:
            break
    else:
        raise RuntimeError("exponential-coordinate fixed point did not "
                           "converge (defect %.2e)" % worst)
    return G
