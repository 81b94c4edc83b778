"""CSV time series and legacy-VTK snapshots."""

import numpy as np

from tangent_llg import constants
from tangent_llg import fs
from tangent_llg.errors import InvalidArgument

VTK_TETRA = 10


def _number(value):
    return f"{float(value):.17g}"


def format_timeseries_csv(series):
    if not len(series):
        raise InvalidArgument("cannot write an empty time series")
    keys = constants.CSV_HEADER.split(",")
    lines = [constants.CSV_HEADER]
    for sample in series.samples:
        row = []
        for key in keys:
            value = sample[key]
            row.append(("1" if value else "0") if isinstance(value, bool) else _number(value))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_timeseries_csv(series, path):
    fs.atomic_write_text(path, format_timeseries_csv(series))


def write_vtk(mesh, m, path, title="tangent-llg magnetization", extra_vectors=None):
    m = np.asarray(m, dtype=float).reshape(-1, 3)
    if m.shape[0] != mesh.n_vertices:
        raise InvalidArgument("field does not match the mesh", f"{m.shape[0]} values for {mesh.n_vertices} vertices")
    out = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {mesh.n_vertices} double",
    ]
    out.extend(" ".join(_number(x) for x in row) for row in mesh.vertices)
    out.append(f"CELLS {mesh.n_cells} {5 * mesh.n_cells}")
    out.extend("4 " + " ".join(str(int(i)) for i in cell) for cell in mesh.cells)
    out.append(f"CELL_TYPES {mesh.n_cells}")
    out.extend([str(VTK_TETRA)] * mesh.n_cells)
    out.append(f"POINT_DATA {mesh.n_vertices}")
    fields = [("m", m)] + sorted((extra_vectors or {}).items())
    for name, values in fields:
        values = np.asarray(values, dtype=float).reshape(-1, 3)
        out.append(f"VECTORS {name} double")
        out.extend(" ".join(_number(x) for x in row) for row in values)
    fs.atomic_write_text(path, "\n".join(out) + "\n")


def read_vtk(path, name="m"):
    """Points, cells and one vector field from a file written by write_vtk."""
    text = fs.read_text(path)
    if text is None:
        raise FileNotFoundError(f"VTK file not found: {path}")
    if isinstance(text, dict):
        raise OSError(f"cannot read VTK file {path}: {text.get('_error')}")
    lines = text.split("\n")
    idx = 0
    points = cells = values = None

    def block(start, count, width):
        rows = [lines[start + r].split() for r in range(count)]
        return np.array(rows, dtype=float).reshape(count, width)

    while idx < len(lines):
        line = lines[idx].split()
        if not line:
            idx += 1
            continue
        if line[0] == "POINTS":
            n = int(line[1])
            points = block(idx + 1, n, 3)
            idx += n + 1
        elif line[0] == "CELLS":
            n = int(line[1])
            cells = block(idx + 1, n, 5)[:, 1:].astype(np.int64)
            idx += n + 1
        elif line[0] == "VECTORS" and line[1] == name:
            values = block(idx + 1, points.shape[0], 3)
            idx += points.shape[0] + 1
        else:
            idx += 1
    if points is None or values is None:
        raise InvalidArgument(f"{path} holds no POINTS or no vector field {name!r}")
    return points, cells, values
