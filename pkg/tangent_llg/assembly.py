"""Exact P1 assembly of the bilinear forms used by the tangent plane schemes.

Unknowns of vector fields are ordered vertex-major, component-minor:
index 3*z + a holds component a at vertex z.
"""

import numpy as np
import scipy.sparse as sp
from scipy.special import roots_jacobi

from tangent_llg import linalg
from tangent_llg.errors import InvalidArgument

DMI_FORMS = ("bulk", "interfacial", "none")

LEVI_CIVITA = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_a, _b, _c] = 1.0
    LEVI_CIVITA[_a, _c, _b] = -1.0

# (Du)_a = sum_{c,b} T[a, c, b] d_c u_b
_INTERFACIAL = np.zeros((3, 3, 3))
_INTERFACIAL[0, 0, 2] = -1.0
_INTERFACIAL[1, 1, 2] = -1.0
_INTERFACIAL[2, 0, 0] = 1.0
_INTERFACIAL[2, 1, 1] = 1.0


def _triple_integrals():
    """int lambda_p lambda_i lambda_j over a cell, divided by its volume."""
    table = np.empty((4, 4, 4))
    for p in range(4):
        for i in range(4):
            for j in range(4):
                distinct = len({p, i, j})
                table[p, i, j] = {1: 1.0 / 20.0, 2: 1.0 / 60.0, 3: 1.0 / 120.0}[distinct]
    return table


TRIPLE = _triple_integrals()


def dmi_tensor(dmi_form):
    if dmi_form == "bulk":
        return LEVI_CIVITA
    if dmi_form == "interfacial":
        return _INTERFACIAL
    if dmi_form == "none":
        return None
    raise InvalidArgument(f"unknown dmi_form {dmi_form!r}", f"expected one of {', '.join(DMI_FORMS)}")


def tetrahedron_rule(n=2):
    """Conical-product rule with n^3 points, exact for total degree 2n-1.

    Returns barycentric points (nq, 4) and weights summing to one.
    """
    u, wu = roots_jacobi(n, 2.0, 0.0)
    v, wv = roots_jacobi(n, 1.0, 0.0)
    w, ww = roots_jacobi(n, 0.0, 0.0)
    u, v, w = (u + 1.0) / 2.0, (v + 1.0) / 2.0, (w + 1.0) / 2.0
    wu, wv, ww = wu / 8.0, wv / 4.0, ww / 2.0
    points = []
    weights = []
    for a in range(n):
        for b in range(n):
            for c in range(n):
                x = u[a]
                y = (1.0 - u[a]) * v[b]
                z = (1.0 - u[a]) * (1.0 - v[b]) * w[c]
                points.append((1.0 - x - y - z, x, y, z))
                weights.append(wu[a] * wv[b] * ww[c])
    weights = np.array(weights)
    return np.array(points), weights / weights.sum()


QUAD_POINTS, QUAD_WEIGHTS = tetrahedron_rule(2)


class FormSet:
    """Static forms of one mesh: scalar mass/stiffness and the vector DMI coupling."""

    def __init__(self, mesh, scalar_mass, scalar_stiffness, dmi_blocks, dmi_form="bulk", chirality=1):
        self.mesh = mesh
        self.scalar_mass = scalar_mass
        self.scalar_stiffness = scalar_stiffness
        self.dmi_blocks = dmi_blocks
        self.dmi_form = dmi_form
        self.chirality = chirality
        eye = sp.identity(3, format="csr")
        self.vector_mass = sp.kron(scalar_mass, eye, format="csr")
        self.vector_stiffness = sp.kron(scalar_stiffness, eye, format="csr")
        self.dmi_symmetric = (dmi_blocks + dmi_blocks.T).tocsr()
        self.lumped = np.asarray(scalar_mass.sum(axis=1)).ravel()
        self.volume = mesh.total_volume()

    @property
    def n_vertices(self):
        return self.mesh.n_vertices


def _scalar_pattern(mesh):
    rows = np.repeat(mesh.cells, 4, axis=1)
    cols = np.tile(mesh.cells, (1, 4))
    return rows.ravel(), cols.ravel()


def _vector_pattern(mesh):
    """Row/column indices for local blocks laid out as (c, i, a, j, b)."""
    comp = np.arange(3)
    dof = 3 * mesh.cells[:, :, None] + comp[None, None, :]
    nc = mesh.n_cells
    rows = np.broadcast_to(dof[:, :, :, None, None], (nc, 4, 3, 4, 3))
    cols = np.broadcast_to(dof[:, None, None, :, :], (nc, 4, 3, 4, 3))
    return rows.ravel(), cols.ravel()


def assemble_scalar_mass(mesh):
    local = np.full((4, 4), 1.0 / 20.0) + np.eye(4) / 20.0
    values = mesh.volumes()[:, None, None] * local[None, :, :]
    rows, cols = _scalar_pattern(mesh)
    n = mesh.n_vertices
    return linalg.from_arrays(n, n, rows, cols, values)


def assemble_scalar_stiffness(mesh):
    grads = mesh.gradients()
    values = np.einsum("c,cid,cjd->cij", mesh.volumes(), grads, grads)
    rows, cols = _scalar_pattern(mesh)
    n = mesh.n_vertices
    return linalg.from_arrays(n, n, rows, cols, values)


def assemble_dmi(mesh, dmi_form, chirality=1):
    """Matrix C with v^T C u = <D u, v>, negated for chirality -1."""
    n = 3 * mesh.n_vertices
    tensor = dmi_tensor(dmi_form)
    if tensor is None:
        return sp.csr_matrix((n, n))
    # the test function integrates to V/4 against a constant
    block = np.einsum("c,adb,cjd->cajb", mesh.volumes() / 4.0, tensor, mesh.gradients())
    values = np.broadcast_to(block[:, None, :, :, :], (mesh.n_cells, 4, 3, 4, 3))
    rows, cols = _vector_pattern(mesh)
    return linalg.from_arrays(n, n, rows, cols, float(chirality) * values)


def assemble_static(mesh, dmi_form="bulk", chirality=1):
    if chirality not in (1, -1):
        raise InvalidArgument("chirality must be +1 or -1", f"got {chirality!r}")
    return FormSet(
        mesh,
        assemble_scalar_mass(mesh),
        assemble_scalar_stiffness(mesh),
        assemble_dmi(mesh, dmi_form, chirality),
        dmi_form=dmi_form,
        chirality=chirality,
    )


def assemble_cross(mesh, m):
    """Skew matrix of (u, w) -> <m x u, w> with m the P1 interpolant."""
    m = as_field(m, mesh)
    weighted = np.einsum("c,cpl,pij->cijl", mesh.volumes(), m[mesh.cells], TRIPLE)
    values = np.einsum("cijl,lba->ciajb", weighted, LEVI_CIVITA)
    rows, cols = _vector_pattern(mesh)
    n = 3 * mesh.n_vertices
    return linalg.from_arrays(n, n, rows, cols, values)


def assemble_weighted_mass(mesh, weight, points=None, weights=None):
    """Vector mass with a per-quadrature-point coefficient of shape (nc, nq)."""
    if points is None:
        points, weights = QUAD_POINTS, QUAD_WEIGHTS
    weight = np.asarray(weight, dtype=float)
    if weight.ndim == 0:
        weight = np.full((mesh.n_cells, len(weights)), float(weight))
    if weight.shape != (mesh.n_cells, len(weights)):
        raise InvalidArgument("weight must be given per cell and quadrature point", f"shape {weight.shape}")
    values = np.einsum("c,q,cq,qi,qj->cij", mesh.volumes(), weights, weight, points, points)
    rows, cols = _scalar_pattern(mesh)
    n = mesh.n_vertices
    scalar = linalg.from_arrays(n, n, rows, cols, values)
    return sp.kron(scalar, sp.identity(3, format="csr"), format="csr")


def as_field(m, mesh):
    m = np.asarray(m, dtype=float)
    if m.size != 3 * mesh.n_vertices:
        raise InvalidArgument("field length must be 3 x vertex count", f"{m.size} vs {3 * mesh.n_vertices}")
    return m.reshape(mesh.n_vertices, 3)


def cell_gradients(m, mesh):
    """Piecewise-constant Jacobian G[c, b, d] = d_d m_b."""
    m = as_field(m, mesh)
    return np.einsum("cjb,cjd->cbd", m[mesh.cells], mesh.gradients())


def apply_dmi_operator(gradients, dmi_form):
    tensor = dmi_tensor(dmi_form)
    if tensor is None:
        return np.zeros(gradients.shape[:1] + (3,))
    return np.einsum("adb,cbd->ca", tensor, gradients)


def values_at_points(m, mesh, points=None):
    if points is None:
        points = QUAD_POINTS
    m = as_field(m, mesh)
    return np.einsum("qj,cjb->cqb", points, m[mesh.cells])


def interpolate_nodal(f, mesh):
    values = np.array([f(x) for x in mesh.vertices], dtype=float)
    return values.reshape(mesh.n_vertices, 3)


def uniform(direction):
    direction = tuple(float(x) for x in direction)

    def profile(_x):
        return direction

    return profile


def skyrmion_like(radius, centre=(0.0, 0.0)):
    """(0,0,-1) inside the in-plane disk of the given radius, (0,0,1) outside."""
    cx, cy = float(centre[0]), float(centre[1])

    def profile(x):
        r = np.hypot(x[0] - cx, x[1] - cy)
        return (0.0, 0.0, -1.0) if r <= radius else (0.0, 0.0, 1.0)

    return profile


def helix(q, axis=2):
    """Helix along the given axis with curl m = -q m."""
    a1, a2 = (axis + 1) % 3, (axis + 2) % 3

    def profile(x):
        value = [0.0, 0.0, 0.0]
        value[a1] = np.cos(q * x[axis])
        value[a2] = np.sin(q * x[axis])
        return value

    return profile
