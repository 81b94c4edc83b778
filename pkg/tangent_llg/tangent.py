"""Discrete tangent spaces: nodal frames, 3N -> 2N reduction, nodal projection."""

from collections import namedtuple

import numpy as np
import scipy.sparse as sp

from tangent_llg import constants
from tangent_llg.errors import DegenerateStateError
from tangent_llg.errors import InvalidArgument

GeometricResiduals = namedtuple("GeometricResiduals", ["increment", "second_order"])


class TangentFrame:
    """Orthonormal pairs (t1, t2) spanning the plane normal to m at each vertex."""

    def __init__(self, t1, t2):
        self.t1 = t1
        self.t2 = t2
        self._matrix = None

    @property
    def n_vertices(self):
        return self.t1.shape[0]

    def matrix(self):
        """Block-diagonal 3N x 2N matrix with columns t1(z), t2(z)."""
        if self._matrix is None:
            n = self.n_vertices
            rows = np.repeat(3 * np.arange(n)[:, None] + np.arange(3)[None, :], 2, axis=1).ravel()
            cols = np.tile(2 * np.arange(n)[:, None] + np.array([0, 1])[None, :], (1, 3)).ravel()
            values = np.stack([self.t1, self.t2], axis=2).ravel()
            self._matrix = sp.csr_matrix((values, (rows, cols)), shape=(3 * n, 2 * n))
        return self._matrix


def _as_nodal(m):
    m = np.asarray(m, dtype=float)
    if m.size % 3:
        raise InvalidArgument("nodal field length must be a multiple of 3", f"got {m.size}")
    return m.reshape(-1, 3)


def build_frame(m):
    m = _as_nodal(m)
    norms = np.linalg.norm(m, axis=1)
    if norms.size and norms.min() < constants.FRAME_MIN_NORM:
        raise DegenerateStateError("nodal vector too short for a tangent frame", vertex=int(np.argmin(norms)))
    unit = m / norms[:, None]
    axis = np.argmin(np.abs(unit), axis=1)
    n = m.shape[0]
    e = np.zeros_like(unit)
    e[np.arange(n), axis] = 1.0
    t1 = e - unit[np.arange(n), axis][:, None] * unit
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(unit, t1)
    return TangentFrame(t1, t2)


def reduce(A, b, frame):
    T = frame.matrix()
    if A.shape != (T.shape[0], T.shape[0]):
        raise InvalidArgument("system size does not match the frame", f"{A.shape} vs {T.shape}")
    A_red = (T.T @ A @ T).tocsr()
    b_red = T.T @ np.asarray(b, dtype=float).ravel()
    return A_red, b_red


def expand(c, frame):
    c = np.asarray(c, dtype=float).reshape(-1, 2)
    if c.shape[0] != frame.n_vertices:
        raise InvalidArgument("coefficient length must be 2 x vertex count")
    return c[:, :1] * frame.t1 + c[:, 1:] * frame.t2


def nodal_projection(w):
    w = _as_nodal(w)
    norms = np.linalg.norm(w, axis=1)
    if norms.size and norms.min() < constants.PROJECTION_MIN_NORM:
        raise DegenerateStateError("cannot project a vanishing nodal vector", vertex=int(np.argmin(norms)))
    return w / norms[:, None]


def geometric_residuals(m, v, m_new, k):
    """Worst vertex of |m_new - m| - k|v| and |m_new - m - kv| - k^2|v|^2/2; both should be <= 0."""
    m, v, m_new = _as_nodal(m), _as_nodal(v), _as_nodal(m_new)
    v_norm = np.linalg.norm(v, axis=1)
    step = np.linalg.norm(m_new - m, axis=1) - k * v_norm
    second = np.linalg.norm(m_new - m - k * v, axis=1) - 0.5 * k**2 * v_norm**2
    return GeometricResiduals(float(step.max()), float(second.max()))


def tangency_defect(m, v):
    return float(np.abs(np.einsum("za,za->z", _as_nodal(m), _as_nodal(v))).max())
