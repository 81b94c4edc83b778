"""Tetrahedral meshes: structured box generators, ASCII import/export and quality analysis."""

import itertools
from collections import namedtuple

import numpy as np
import scipy.sparse as sp

from tangent_llg import constants
from tangent_llg import fs
from tangent_llg.errors import InvalidArgument
from tangent_llg.errors import MeshLoadError

MeshQualityReport = namedtuple(
    "MeshQualityReport",
    [
        "h_max",
        "h_min",
        "angle_condition_holds",
        "worst_offdiag",
        "angle_threshold",
        "offending_pairs",
        "n_vertices",
        "n_cells",
        "volume",
    ],
)


class Mesh:
    """Immutable vertices (nv, 3) and cells (nc, 4) with positive orientation."""

    def __init__(self, vertices, cells):
        vertices = np.array(vertices, dtype=float).reshape(-1, 3)
        cells = np.array(cells, dtype=np.int64).reshape(-1, 4)
        _check_cells(vertices, cells)
        vertices.setflags(write=False)
        cells.setflags(write=False)
        self.vertices = vertices
        self.cells = cells
        self._geometry = None

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_cells(self):
        return self.cells.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(self.cells, other.cells)

    def __repr__(self):
        return f"Mesh(n_vertices={self.n_vertices}, n_cells={self.n_cells})"

    def _ensure_geometry(self):
        if self._geometry is None:
            jac = _jacobians(self.vertices, self.cells)
            volumes = np.linalg.det(jac) / 6.0
            grads = np.empty((self.n_cells, 4, 3))
            # rows of J^-1 are the gradients of barycentric coordinates 1..3
            grads[:, 1:, :] = np.linalg.inv(jac)
            grads[:, 0, :] = -grads[:, 1:, :].sum(axis=1)
            volumes.setflags(write=False)
            grads.setflags(write=False)
            self._geometry = (volumes, grads)
        return self._geometry

    def volumes(self):
        return self._ensure_geometry()[0]

    def gradients(self):
        """Barycentric gradients, shape (nc, 4, 3)."""
        return self._ensure_geometry()[1]

    def total_volume(self):
        return float(self.volumes().sum())

    def diameters(self):
        pts = self.vertices[self.cells]
        longest = np.zeros(self.n_cells)
        for a, b in itertools.combinations(range(4), 2):
            longest = np.maximum(longest, np.linalg.norm(pts[:, a] - pts[:, b], axis=1))
        return longest

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def _jacobians(vertices, cells):
    pts = vertices[cells]
    # columns x1-x0, x2-x0, x3-x0
    return (pts[:, 1:, :] - pts[:, :1, :]).transpose(0, 2, 1)


def signed_volumes(vertices, cells):
    if len(cells) == 0:
        return np.zeros(0)
    return np.linalg.det(_jacobians(vertices, cells)) / 6.0


def _check_cells(vertices, cells):
    nv = vertices.shape[0]
    if cells.size and (cells.min() < 0 or cells.max() >= nv):
        bad = int(np.argmax((cells < 0).any(axis=1) | (cells >= nv).any(axis=1)))
        raise InvalidArgument("index out of range", f"cell {bad} references vertex outside 0..{nv - 1}")
    ordered = np.sort(cells, axis=1)
    repeated = (ordered[:, 1:] == ordered[:, :-1]).any(axis=1)
    if repeated.any():
        raise InvalidArgument("duplicate vertex in cell", f"cell {int(np.argmax(repeated))}")
    vols = signed_volumes(vertices, cells)
    if vols.size and vols.min() <= 0.0:
        bad = int(np.argmin(vols))
        raise InvalidArgument("inverted or flat element", f"cell {bad} signed volume {vols[bad]!r}")


def _box_grid(counts, lengths):
    counts = tuple(int(c) for c in counts)
    lengths = tuple(float(x) for x in lengths)
    if len(counts) != 3 or len(lengths) != 3:
        raise InvalidArgument("box generators need three cell counts and three lengths")
    if min(counts) < 1:
        raise InvalidArgument("cell counts must be at least 1", f"got {counts}")
    if min(lengths) <= 0.0:
        raise InvalidArgument("box lengths must be positive", f"got {lengths}")
    nx, ny, nz = counts
    axes = [np.linspace(0.0, lengths[d], counts[d] + 1) for d in range(3)]
    zz, yy, xx = np.meshgrid(axes[2], axes[1], axes[0], indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])

    def vid(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    return counts, vertices, vid


def _kuhn_paths():
    """The six monotone lattice paths from corner (0,0,0) to (1,1,1)."""
    paths = []
    for perm in itertools.permutations(range(3)):
        corner = [0, 0, 0]
        path = [tuple(corner)]
        for axis in perm:
            corner[axis] = 1
            path.append(tuple(corner))
        paths.append(path)
    return paths


def _orient(vertices, cells):
    cells = np.array(cells, dtype=np.int64)
    flip = signed_volumes(vertices, cells) < 0
    cells[flip, 2], cells[flip, 3] = cells[flip, 3].copy(), cells[flip, 2].copy()
    return cells


def generate_type1(counts, lengths):
    """Box mesh, every cube cut into six Kuhn tetrahedra around its (0,0,0)-(1,1,1) diagonal."""
    (nx, ny, nz), vertices, vid = _box_grid(counts, lengths)
    cells = []
    paths = _kuhn_paths()
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                for path in paths:
                    cells.append([vid(i + a, j + b, k + c) for a, b, c in path])
    return Mesh(vertices, _orient(vertices, cells))


def generate_type2(counts, lengths):
    """Type-I split with the shared main diagonal of each cube bisected (12 tetrahedra per cube)."""
    (nx, ny, nz), grid, vid = _box_grid(counts, lengths)
    lengths = np.asarray(lengths, dtype=float)
    step = lengths / np.array([nx, ny, nz])
    centres = []
    cells = []
    paths = _kuhn_paths()
    n_grid = grid.shape[0]
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                centre = n_grid + len(centres)
                centres.append((np.array([i, j, k]) + 0.5) * step)
                for path in paths:
                    v0, v1, v2, v3 = [vid(i + a, j + b, k + c) for a, b, c in path]
                    cells.append([v0, v1, v2, centre])
                    cells.append([centre, v1, v2, v3])
    vertices = np.vstack([grid, np.array(centres)])
    return Mesh(vertices, _orient(vertices, cells))


def _parse_numbers(text, line_no, count, kind):
    parts = text.split()
    if len(parts) != count:
        raise MeshLoadError(f"expected {count} values, found {len(parts)}", line=line_no)
    try:
        return [kind(p) for p in parts]
    except ValueError:
        raise MeshLoadError(f"cannot parse {text.strip()!r}", line=line_no)


def load_mesh(path):
    text = fs.read_text(path)
    if text is None:
        raise MeshLoadError(f"mesh file not found: {path}")
    if isinstance(text, dict):
        raise MeshLoadError(f"cannot read mesh file {path}", detail=text.get("_error"))
    lines = text.splitlines()
    if not lines or lines[0].strip() != constants.MESH_MAGIC:
        raise MeshLoadError(f"missing header {constants.MESH_MAGIC!r}", line=1)
    if len(lines) < 2:
        raise MeshLoadError("missing size line", line=2)
    nv, nc = _parse_numbers(lines[1], 2, 2, int)
    if nv < 4 or nc < 1:
        raise MeshLoadError(f"invalid sizes {nv} {nc}", line=2)
    if len(lines) < 2 + nv + nc:
        raise MeshLoadError(f"expected {nv} vertices and {nc} cells, file ends early", line=len(lines))
    vertices = np.array([_parse_numbers(lines[2 + n], 3 + n, 3, float) for n in range(nv)])
    cells = []
    for n in range(nc):
        line_no = 3 + nv + n
        cell = _parse_numbers(lines[line_no - 1], line_no, 4, int)
        if min(cell) < 0 or max(cell) >= nv:
            raise MeshLoadError(f"index out of range (vertex count {nv})", line=line_no)
        if len(set(cell)) != 4:
            raise MeshLoadError("duplicate vertex in cell", line=line_no)
        vol = signed_volumes(vertices, np.array([cell]))[0]
        if vol <= 0.0:
            raise MeshLoadError(f"inverted element, signed volume {vol!r}", line=line_no)
        cells.append(cell)
    return Mesh(vertices, cells)


def save_mesh(mesh, path):
    out = [constants.MESH_MAGIC, f"{mesh.n_vertices} {mesh.n_cells}"]
    out.extend(" ".join(f"{x:.17g}" for x in row) for row in mesh.vertices)
    out.extend(" ".join(str(int(i)) for i in cell) for cell in mesh.cells)
    fs.atomic_write_text(path, "\n".join(out) + "\n")


def scalar_stiffness(mesh):
    """Assembled P1 stiffness <grad phi_z, grad phi_z'>."""
    grads = mesh.gradients()
    local = np.einsum("c,cid,cjd->cij", mesh.volumes(), grads, grads)
    rows = np.repeat(mesh.cells, 4, axis=1).ravel()
    cols = np.tile(mesh.cells, (1, 4)).ravel()
    n = mesh.n_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def analyze_mesh(mesh, tol=constants.DEFAULT_ANGLE_TOL):
    """Mesh size and the nonpositivity of off-diagonal stiffness entries.

    The tolerance is scaled by the largest diagonal entry (at least 1) so the
    check is invariant under the length unit. The condition holds when
    worst_offdiag <= angle_threshold; both are reported.
    """
    stiff = scalar_stiffness(mesh).tocoo()
    off = stiff.row < stiff.col
    values = stiff.data[off]
    scale = max(1.0, float(stiff.diagonal().max()))
    threshold = tol * scale
    worst = float(values.max()) if values.size else 0.0
    offending = int(np.count_nonzero(values > threshold))
    diam = mesh.diameters()
    return MeshQualityReport(
        h_max=float(diam.max()),
        h_min=float(diam.min()),
        angle_condition_holds=worst <= threshold,
        worst_offdiag=worst,
        angle_threshold=threshold,
        offending_pairs=offending,
        n_vertices=mesh.n_vertices,
        n_cells=mesh.n_cells,
        volume=mesh.total_volume(),
    )
