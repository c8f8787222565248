"""Meshes and nodal fields.

The 1D mesh lives on [0, 1].  The 2D mesh is a conforming triangulation of
the unit square; the built-in generator splits an n-by-n grid of cells into
right triangles and tags boundary edges by side.  Fields store one value
per node (P1 nodal representation).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import StructuralError

SIDES = ("bottom", "right", "top", "left")


@dataclass(frozen=True)
class Mesh1D:
    """Partition of [0, 1] into cells; nodes strictly increasing."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("mesh needs at least two nodes")
        if not (np.diff(nodes) > 0).all():
            raise ValueError("mesh nodes must be strictly increasing")
        if abs(nodes[0]) > 1e-14 or abs(nodes[-1] - 1.0) > 1e-14:
            raise ValueError("1D mesh must span [0, 1]")

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @classmethod
    def uniform(cls, n_cells: int) -> "Mesh1D":
        if n_cells < 1:
            raise ValueError("n_cells must be positive")
        return cls(np.linspace(0.0, 1.0, n_cells + 1))


@dataclass(frozen=True)
class Mesh2D:
    """Conforming P1 triangulation with tagged boundary edges.

    vertices : (nv, 2) float
    triangles : (nt, 3) int, counterclockwise
    boundary_edges : (ne, 2) int, endpoints of edges on the boundary
    boundary_sides : (ne,) str tags from SIDES
    cells_per_side : set by the structured generator, None for imported meshes
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_sides: np.ndarray
    cells_per_side: Optional[int] = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=int)
        e = np.asarray(self.boundary_edges, dtype=int)
        s = np.asarray(self.boundary_sides)
        for name, val in (("vertices", v), ("triangles", t), ("boundary_edges", e)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "boundary_sides", s)
        if v.ndim != 2 or v.shape[1] != 2:
            raise StructuralError("vertices must be (nv, 2)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise StructuralError("triangles must be (nt, 3)")
        if t.min(initial=0) < 0 or t.max(initial=-1) >= len(v):
            raise StructuralError("triangle index out of range")
        if len(e) != len(s):
            raise StructuralError("boundary edge/side length mismatch")
        if self.triangle_areas().min(initial=1.0) <= 0:
            raise StructuralError("triangulation contains a degenerate or inverted triangle")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def triangle_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self) -> np.ndarray:
        pe = self.vertices[self.boundary_edges]
        return np.linalg.norm(pe[:, 1] - pe[:, 0], axis=1)


def structured_unit_square(n: int) -> Mesh2D:
    """n-by-n cells, each split along the SW-NE diagonal (2*n*n triangles)."""
    if n < 1:
        raise ValueError("n must be positive")
    side = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(side, side, indexing="xy")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])

    def vid(i, j):
        # i: column (x index), j: row (y index)
        return j * (n + 1) + i

    tris = []
    for j in range(n):
        for i in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    edges = []
    sides = []
    for i in range(n):
        edges.append((vid(i, 0), vid(i + 1, 0)))
        sides.append("bottom")
    for j in range(n):
        edges.append((vid(n, j), vid(n, j + 1)))
        sides.append("right")
    for i in range(n):
        edges.append((vid(i, n), vid(i + 1, n)))
        sides.append("top")
    for j in range(n):
        edges.append((vid(0, j), vid(0, j + 1)))
        sides.append("left")
    return Mesh2D(
        vertices=vertices,
        triangles=np.array(tris, dtype=int),
        boundary_edges=np.array(edges, dtype=int),
        boundary_sides=np.array(sides),
        cells_per_side=n,
    )


@dataclass(frozen=True)
class Field:
    """Nodal values on a mesh, optionally tagged with the spectral point and
    source index that produced them."""

    mesh: object
    values: np.ndarray
    lam: Optional[float] = None
    source_index: int = 0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        n = self.mesh.nodes.size if isinstance(self.mesh, Mesh1D) else self.mesh.n_vertices
        if values.shape != (n,):
            raise StructuralError(f"field has {values.shape} values for {n} nodes")

    def with_values(self, values: np.ndarray) -> "Field":
        return replace(self, values=values)


# ---------------------------------------------------------------------------
# interpolation between meshes


def interpolate_1d(fld: Field, target: Mesh1D) -> Field:
    vals = np.interp(target.nodes, fld.mesh.nodes, fld.values)
    return Field(target, vals, fld.lam, fld.source_index)


def _structured_eval(mesh: Mesh2D, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """P1 evaluation on the structured mesh; exploits the regular layout."""
    n = mesh.cells_per_side
    pts = np.clip(points, 0.0, 1.0)
    fi = np.minimum((pts[:, 0] * n).astype(int), n - 1)
    fj = np.minimum((pts[:, 1] * n).astype(int), n - 1)
    xr = pts[:, 0] * n - fi
    yr = pts[:, 1] * n - fj
    stride = n + 1
    v00 = values[fj * stride + fi]
    v10 = values[fj * stride + fi + 1]
    v01 = values[(fj + 1) * stride + fi]
    v11 = values[(fj + 1) * stride + fi + 1]
    # lower triangle (v00, v10, v11) for yr <= xr, upper (v00, v11, v01) otherwise
    lower = v00 + (v10 - v00) * xr + (v11 - v10) * yr
    upper = v00 + (v01 - v00) * yr + (v11 - v01) * xr
    return np.where(yr <= xr, lower, upper)


def interpolate_2d(fld: Field, target: Mesh2D) -> Field:
    src = fld.mesh
    if not isinstance(src, Mesh2D):
        raise StructuralError("interpolate_2d needs a 2D source field")
    if src.cells_per_side is not None:
        vals = _structured_eval(src, fld.values, target.vertices)
        return Field(target, vals, fld.lam, fld.source_index)
    # generic fallback: barycentric evaluation by brute-force triangle search
    verts = src.vertices[src.triangles]
    vals = np.empty(target.n_vertices)
    for k, p in enumerate(target.vertices):
        d1 = verts[:, 1] - verts[:, 0]
        d2 = verts[:, 2] - verts[:, 0]
        dp = p - verts[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        l1 = (dp[:, 0] * d2[:, 1] - dp[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * dp[:, 1] - d1[:, 1] * dp[:, 0]) / det
        l0 = 1.0 - l1 - l2
        inside = (l0 >= -1e-12) & (l1 >= -1e-12) & (l2 >= -1e-12)
        if not inside.any():
            raise StructuralError(f"point {p} not inside any source triangle")
        t = np.argmax(inside)
        w = np.array([l0[t], l1[t], l2[t]])
        vals[k] = w @ fld.values[src.triangles[t]]
    return Field(target, vals, fld.lam, fld.source_index)
