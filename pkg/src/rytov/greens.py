"""Outgoing 2D Helmholtz Green's function and line-source incident fields.

g(rho) = (-j/4) H0^(2)(k0 rho) satisfies (lap + k0^2) g = -delta under the
e^{+j omega t} convention, so phase decreases with distance and |g| decays
as rho^(-1/2) in the far field.
"""

import numpy as np

from .errors import SingularPointError
from .special import hankel2


def _distances(r_a, r_b):
    d = np.asarray(r_a, dtype=float) - np.asarray(r_b, dtype=float)
    return np.hypot(d[..., 0], d[..., 1])


def greens_2d(r_a, r_b, cfg):
    """Green's function between points r_a and r_b (broadcastable (..., 2))."""
    rho = _distances(r_a, r_b)
    if np.any(rho == 0.0):
        raise SingularPointError("Green's function evaluated at coincident points")
    return -0.25j * hankel2(0, cfg.k0 * rho)


def greens_matrix(points_a, points_b, cfg):
    """Pairwise Green's values, shape (len(points_a), len(points_b))."""
    pa = np.asarray(points_a, dtype=float)
    pb = np.asarray(points_b, dtype=float)
    return greens_2d(pa[:, None, :], pb[None, :, :], cfg)


def incident_field(tx, points, cfg):
    """Unit-strength line-source field radiated by a node at tx, sampled at
    the given points. Absolute scale is immaterial downstream: the phaseless
    model only consumes fields normalized by the incident field at the
    receiver.
    """
    return greens_2d(np.asarray(points, dtype=float), np.asarray(tx, dtype=float), cfg)
