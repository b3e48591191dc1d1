"""Unit-disk Moebius transformations and hyperbolic metric helpers.

All matrices are 2x2 complex with det = 1, acting on the unit disk by
z -> (az+b)/(cz+d).  The hyperbolic metric is g = lam |dz|^2 with
lam(z) = 4/(1-|z|^2)^2 (curvature -1).
"""

from __future__ import annotations

import numpy as np


def mob_apply(M, z):
    """Moebius action of a 2x2 matrix on points z (scalar or array)."""
    return (M[0, 0] * z + M[0, 1]) / (M[1, 0] * z + M[1, 1])


def mob_deriv(M, z):
    """Derivative of the Moebius map at z (det M = 1)."""
    return 1.0 / (M[1, 0] * z + M[1, 1]) ** 2


def mob_second_deriv(M, z):
    """Second derivative of the Moebius map at z."""
    return -2.0 * M[1, 0] / (M[1, 0] * z + M[1, 1]) ** 3


def mob_inverse(M):
    """Inverse of a det-1 matrix."""
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]], dtype=complex)


def hyp_dist(z, w):
    """Hyperbolic distance between points of the unit disk (curvature -1)."""
    num = np.abs(z - w) ** 2
    den = (1.0 - np.abs(z) ** 2) * (1.0 - np.abs(w) ** 2)
    return np.arccosh(1.0 + 2.0 * num / den)


def metric_density(z):
    """Conformal density lam with g = lam |dz|^2 hyperbolic."""
    return 4.0 / (1.0 - np.abs(z) ** 2) ** 2


def dlog_metric_density(z):
    """d/dz of log lam; the conjugate gives d/dzbar (lam is real)."""
    return 2.0 * np.conj(z) / (1.0 - np.abs(z) ** 2)


def matrix_key(M, digits=8):
    """Hashable rounded key identifying a group element."""
    return (
        round(M[0, 0].real, digits), round(M[0, 0].imag, digits),
        round(M[0, 1].real, digits), round(M[0, 1].imag, digits),
    )
