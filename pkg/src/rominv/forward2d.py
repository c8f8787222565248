"""P1 finite element solver for the 2D spectral problem on the unit square.

Strong form:  -Delta u + q u + lambda u = 0 in Omega, du/dn = g_r on the
boundary, for K piecewise constant boundary sources g_r.  Transfer data:

    F[r, l](lambda)  = int_boundary u_r g_l ds
    dF[r, l]/dlambda = -int_Omega u_r u_l dx

The second identity holds exactly for the discrete solutions when the
integral is taken with the consistent P1 mass matrix.  The q-term is
assembled with the vertex quadrature rule (lumped diagonal), the
lambda-term with the consistent mass matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import NonCoerciveSystemError, StructuralError
from .geometry import SIDES, Field, Mesh2D
from .loewner import FLOAT_FMT, TransferDataSet


@dataclass(frozen=True)
class Medium2D:
    """Nodal potential q on a triangulation."""

    mesh: Mesh2D
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if q.shape != (self.mesh.n_vertices,):
            raise ValueError("q must hold one value per mesh vertex")
        if not np.isfinite(q).all():
            raise ValueError("q must be finite")


@dataclass(frozen=True)
class SourceSet:
    """K piecewise constant boundary sources.

    amplitudes[k, e] is the value of source k on boundary edge e of the
    mesh.  Each source should have unit total flux; the per-side factory
    below guarantees that.
    """

    mesh: Mesh2D
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "amplitudes", a)
        if a.ndim != 2 or a.shape[1] != len(self.mesh.boundary_edges):
            raise StructuralError("amplitudes must be (K, n_boundary_edges)")

    @property
    def K(self) -> int:
        return self.amplitudes.shape[0]

    def load_vectors(self) -> np.ndarray:
        """(n_vertices, K) boundary load vectors: edge trapezoid rule,
        exact for P1 traces against piecewise constant sources."""
        mesh = self.mesh
        lengths = mesh.edge_lengths()
        rhs = np.zeros((mesh.n_vertices, self.K))
        half = 0.5 * lengths[None, :] * self.amplitudes  # (K, ne)
        for end in (0, 1):
            np.add.at(rhs, mesh.boundary_edges[:, end], half.T)
        return rhs


def per_side_sources(mesh: Mesh2D, per_side: int, width: float = 0.25) -> SourceSet:
    """per_side sources on each of the four sides, evenly centered, each a
    constant on a boundary strip of the given width with unit total flux.

    Strip endpoints must coincide with mesh node positions along the side;
    otherwise the same nominal source would differ between meshes.
    """
    if not 0 < width <= 1.0 / per_side:
        raise ValueError("width must satisfy 0 < width <= 1/per_side")
    mids = _edge_side_coordinates(mesh)
    lengths = mesh.edge_lengths()
    rows = []
    for side in SIDES:
        on_side = mesh.boundary_sides == side
        for k in range(per_side):
            center = (k + 0.5) / per_side
            lo, hi = center - width / 2.0, center + width / 2.0
            support = on_side & (mids > lo) & (mids < hi)
            covered = float(lengths[support].sum())
            if abs(covered - width) > 1e-9:
                raise StructuralError(
                    f"source strip [{lo:g}, {hi:g}] on side {side} not aligned "
                    f"with the mesh (covers {covered:g} of {width:g}); choose a "
                    "resolution that places nodes on the strip endpoints"
                )
            amp = np.where(support, 1.0 / width, 0.0)
            rows.append(amp)
    return SourceSet(mesh=mesh, amplitudes=np.array(rows))


def _edge_side_coordinates(mesh: Mesh2D) -> np.ndarray:
    """Midpoint coordinate of each boundary edge along its side (0 to 1)."""
    pe = mesh.vertices[mesh.boundary_edges]
    mid = 0.5 * (pe[:, 0] + pe[:, 1])
    coords = np.empty(len(mesh.boundary_edges))
    for side, axis in (("bottom", 0), ("top", 0), ("left", 1), ("right", 1)):
        mask = mesh.boundary_sides == side
        coords[mask] = mid[mask, axis]
    return coords


# ---------------------------------------------------------------------------
# assembly


def stiffness_matrix(mesh: Mesh2D) -> scipy.sparse.csr_matrix:
    p = mesh.vertices[mesh.triangles]  # (nt, 3, 2)
    area = mesh.triangle_areas()
    # gradients of barycentric coordinates
    g = np.empty((len(mesh.triangles), 3, 2))
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        edge = p[:, c] - p[:, b]
        g[:, a, 0] = -edge[:, 1]
        g[:, a, 1] = edge[:, 0]
    g /= (2.0 * area)[:, None, None]
    ke = np.einsum("tad,tbd,t->tab", g, g, area)
    return _assemble(mesh, ke)


def mass_matrix(mesh: Mesh2D) -> scipy.sparse.csr_matrix:
    area = mesh.triangle_areas()
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    me = area[:, None, None] * base[None, :, :]
    return _assemble(mesh, me)


def lumped_q_diagonal(medium: Medium2D) -> np.ndarray:
    """Vertex-rule weights times q: diagonal of the lumped q-term."""
    mesh = medium.mesh
    area = mesh.triangle_areas()
    w = np.zeros(mesh.n_vertices)
    np.add.at(w, mesh.triangles.ravel(), np.repeat(area / 3.0, 3))
    return w * medium.q


def _assemble(mesh: Mesh2D, element_matrices: np.ndarray) -> scipy.sparse.csr_matrix:
    t = mesh.triangles
    rows = np.repeat(t, 3, axis=1).ravel()
    cols = np.tile(t, (1, 3)).ravel()
    A = scipy.sparse.coo_matrix(
        (element_matrices.ravel(), (rows, cols)),
        shape=(mesh.n_vertices, mesh.n_vertices),
    )
    return A.tocsr()


def system_matrix(medium: Medium2D, lam: float) -> scipy.sparse.csr_matrix:
    K = stiffness_matrix(medium.mesh)
    M = mass_matrix(medium.mesh)
    Q = scipy.sparse.diags(lumped_q_diagonal(medium))
    return (K + Q + lam * M).tocsc()


def solve_2d(medium: Medium2D, sources: SourceSet, lam: float) -> list:
    """Solve for all K sources at spectral point lam; returns K Fields."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if sources.mesh is not medium.mesh:
        raise StructuralError("sources and medium must share a mesh")
    A = system_matrix(medium, lam)
    rhs = sources.load_vectors()
    try:
        lu = scipy.sparse.linalg.splu(A)
    except RuntimeError as exc:
        raise NonCoerciveSystemError(
            f"system factorization failed at lambda={lam:g} (min q = {medium.q.min():g})"
        ) from exc
    U = lu.solve(rhs)
    if not np.isfinite(U).all():
        raise NonCoerciveSystemError(f"system singular at lambda={lam:g}")
    return [Field(medium.mesh, U[:, r], lam=lam, source_index=r) for r in range(sources.K)]


def boundary_data_2d(medium: Medium2D, sources: SourceSet, b: np.ndarray) -> TransferDataSet:
    """Sample the K-by-K transfer matrix and its derivative at each b."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    Kn = sources.K
    M = mass_matrix(medium.mesh)
    rhs = sources.load_vectors()
    F = np.empty((b.size, Kn, Kn))
    DF = np.empty((b.size, Kn, Kn))
    for i, bi in enumerate(b):
        fields = solve_2d(medium, sources, bi)
        U = np.column_stack([f.values for f in fields])
        F[i] = U.T @ rhs
        DF[i] = -(U.T @ (M @ U))
        F[i] = 0.5 * (F[i] + F[i].T)
        DF[i] = 0.5 * (DF[i] + DF[i].T)
    return TransferDataSet(b=b, F=F, DF=DF)


def snapshot_matrices_2d(medium: Medium2D, snapshots: np.ndarray):
    """Directly integrated snapshot Gram and stiffness matrices.

    Gram: per-triangle edge-midpoint rule (exact for P1 products).
    Stiffness: exact constant-gradient products plus the vertex-rule
    q-term the solver assembles with.  Used as the quadrature route when
    checking the data-assembled matrices.
    """
    mesh = medium.mesh
    area = mesh.triangle_areas()
    U = np.asarray(snapshots, dtype=float)
    tri = mesh.triangles
    u0, u1, u2 = U[tri[:, 0]], U[tri[:, 1]], U[tri[:, 2]]
    m01, m12, m20 = 0.5 * (u0 + u1), 0.5 * (u1 + u2), 0.5 * (u2 + u0)
    w = (area / 3.0)[:, None]
    Mq = (w * m01).T @ m01 + (w * m12).T @ m12 + (w * m20).T @ m20

    p = mesh.vertices[tri]
    g = np.empty((len(tri), 3, 2))
    for a in range(3):
        bb, cc = (a + 1) % 3, (a + 2) % 3
        edge = p[:, cc] - p[:, bb]
        g[:, a, 0] = -edge[:, 1]
        g[:, a, 1] = edge[:, 0]
    g /= (2.0 * area)[:, None, None]
    grads = np.einsum("tak,tan->tkn", g, U[tri])  # (nt, 2, nsnap)
    Sq = np.einsum("tkn,tkp,t->np", grads, grads, area)
    wq = lumped_q_diagonal(medium)
    Sq = Sq + (wq[:, None] * U).T @ U
    return 0.5 * (Mq + Mq.T), 0.5 * (Sq + Sq.T)


def mass_inner_2d(mesh: Mesh2D, u: np.ndarray, v: np.ndarray) -> float:
    area = mesh.triangle_areas()
    tri = mesh.triangles
    ue, ve = u[tri], v[tri]
    m_u = 0.5 * (ue + np.roll(ue, -1, axis=1))
    m_v = 0.5 * (ve + np.roll(ve, -1, axis=1))
    return float(np.einsum("te,te,t->", m_u, m_v, area / 3.0))


def l2_norm_2d(mesh: Mesh2D, u: np.ndarray) -> float:
    return float(np.sqrt(max(mass_inner_2d(mesh, u, u), 0.0)))


# ---------------------------------------------------------------------------
# media


def q_zero_2d(mesh: Mesh2D) -> Medium2D:
    return Medium2D(mesh=mesh, q=np.zeros(mesh.n_vertices))


def q_constant_2d(mesh: Mesh2D, value: float) -> Medium2D:
    return Medium2D(mesh=mesh, q=np.full(mesh.n_vertices, float(value)))


def q_gaussian_bumps(
    mesh: Mesh2D,
    centers: Sequence[Sequence[float]],
    widths: Sequence[float],
    amplitudes: Sequence[float],
) -> Medium2D:
    centers = np.asarray(centers, dtype=float).reshape(-1, 2)
    widths = np.broadcast_to(np.asarray(widths, dtype=float), (len(centers),))
    amplitudes = np.broadcast_to(np.asarray(amplitudes, dtype=float), (len(centers),))
    q = np.zeros(mesh.n_vertices)
    for c, w, a in zip(centers, widths, amplitudes):
        r2 = ((mesh.vertices - c) ** 2).sum(axis=1)
        q += a * np.exp(-0.5 * r2 / w**2)
    return Medium2D(mesh=mesh, q=q)


def write_medium_csv_2d(medium: Medium2D, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "q"])
        for (x, y), q in zip(medium.mesh.vertices, medium.q):
            w.writerow([FLOAT_FMT % x, FLOAT_FMT % y, FLOAT_FMT % q])
