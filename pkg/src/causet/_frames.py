"""Pointwise 2x2 bilinear-form helpers shared by the metric modules.

Every function accepts stacked inputs: matrices of shape ``(..., 2, 2)`` and
vectors of shape ``(..., 2)``.
"""

import numpy as np


def quad(m, v, w=None):
    """Evaluate the bilinear form ``m(v, w)`` (``w`` defaults to ``v``)."""
    if w is None:
        w = v
    return np.einsum("...i,...ij,...j->...", v, m, w)


def lower(m, v):
    """Covector ``m(v, .)``."""
    return np.einsum("...ij,...j->...i", m, v)


def wick_matrix(g, T):
    """Riemannian metric obtained from ``g`` by flipping the sign along ``T``.

    In the splitting ``v = x T + u`` with ``u`` g-orthogonal to ``T`` this is
    ``h(v, w) = -x y g(T, T) + g(u, u')``, which in matrix form reads
    ``g - 2 (gT)(gT)^T / g(T, T)``.
    """
    gT = lower(g, T)
    gTT = quad(g, T)
    return g - 2.0 * gT[..., :, None] * gT[..., None, :] / gTT[..., None, None]


def widen_matrix(g, T, alpha):
    """Scale the timelike eigenvalue of ``g`` by ``1 + alpha`` in the frame of ``T``."""
    if np.all(np.asarray(alpha) == 0):
        return np.array(g, dtype=float, copy=True)
    gT = lower(g, T)
    norm2 = -quad(g, T)
    omega = gT / np.sqrt(norm2)[..., None]
    return g - np.asarray(alpha)[..., None, None] * omega[..., :, None] * omega[..., None, :]


def orthonormal_frame(g, T):
    """Columns ``(e0, e1)`` with ``e0 = T/sqrt(-g(T,T))`` and ``e1`` the unit normal.

    Returns an array of shape ``(..., 2, 2)`` whose last axis indexes the
    frame vectors, i.e. ``E[..., :, 0] = e0``.
    """
    T = np.asarray(T, dtype=float)
    e0 = T / np.sqrt(-quad(g, T))[..., None]
    omega = lower(g, e0)
    n = np.stack([-omega[..., 1], omega[..., 0]], axis=-1)
    e1 = n / np.sqrt(quad(g, n))[..., None]
    return np.stack([e0, e1], axis=-1)


def in_frame(m, E):
    """Components ``E^T m E`` of the form ``m`` in the frame ``E``."""
    return np.einsum("...ki,...kl,...lj->...ij", E, m, E)
