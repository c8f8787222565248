"""Internal solutions from boundary data and direct potential extraction.

The orthonormal reduced basis depends only weakly on the medium.  The
reference basis functions (computed for a known background q0, by default
zero) are therefore paired with the data-driven Galerkin coefficients of
the unknown medium:

    u_tilde^r(lambda) = sum_j c_j^r [u_hat_j]_0

with c = (T + lambda I)^{-1} rhs_hat from the measured data and [u_hat_j]_0
the reference basis evaluated on the reference mesh.  The potential is then
read off the strong form,

    q(x) ~ (Delta_h u_tilde - lambda u_tilde) / u_tilde,

averaged over sources and spectral points with confidence weights
proportional to u_tilde^2, with boundary layers and low-signal nodes
masked.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import StructuralError
from .forward1d import Medium1D, boundary_data_1d, mass_inner, solve_1d
from .forward2d import (
    Medium2D,
    SourceSet,
    boundary_data_2d,
    mass_inner_2d,
    solve_2d,
    stiffness_matrix,
)
from .geometry import Field, Mesh1D, Mesh2D
from .lanczos import OrthoROM, orthogonalize, solve_ortho
from .loewner import FLOAT_FMT, build_rom, project_delta


@dataclass(frozen=True)
class ReferenceBasis:
    """Orthonormal reduced basis evaluated on the reference mesh.

    basis[:, j] holds the nodal values of the j-th orthonormal function,
    i.e. the reference snapshots combined with column j of the reference Q.
    """

    mesh: Union[Mesh1D, Mesh2D]
    basis: np.ndarray
    ortho: OrthoROM
    b: np.ndarray

    @property
    def size(self) -> int:
        return self.basis.shape[1]


@dataclass(frozen=True)
class InternalSolution:
    """Approximate interior solutions at one spectral point, one per source."""

    lam: float
    fields: List[Field]


@dataclass(frozen=True)
class Reconstruction:
    """Recovered potential with a confidence mask (1 kept, 0 masked)."""

    mesh: Union[Mesh1D, Mesh2D]
    q_est: np.ndarray
    mask: np.ndarray


def reference_basis_1d(
    medium0: Medium1D, b: np.ndarray, *, conditioning_tol: float = 1e-12
) -> ReferenceBasis:
    """Run the full reduced-model pipeline on the reference medium.

    conditioning_tol must match the tolerance used to build the data-side
    reduced model; otherwise the two can deflate to different block
    structures and refuse to pair.
    """
    b = np.atleast_1d(np.asarray(b, dtype=float))
    data = boundary_data_1d(medium0, b)
    rom = build_rom(data, conditioning_tol=conditioning_tol)
    ortho = orthogonalize(rom, project_delta(rom))
    snapshots = np.column_stack([solve_1d(medium0, bi).values for bi in b])
    return ReferenceBasis(mesh=medium0.mesh, basis=snapshots @ ortho.Q, ortho=ortho, b=b)


def reference_basis_2d(
    medium0: Medium2D,
    sources: SourceSet,
    b: np.ndarray,
    *,
    conditioning_tol: float = 1e-12,
) -> ReferenceBasis:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    data = boundary_data_2d(medium0, sources, b)
    rom = build_rom(data, conditioning_tol=conditioning_tol)
    ortho = orthogonalize(rom, project_delta(rom))
    cols = []
    for bi in b:
        for f in solve_2d(medium0, sources, bi):
            cols.append(f.values)
    snapshots = np.column_stack(cols)
    return ReferenceBasis(mesh=medium0.mesh, basis=snapshots @ ortho.Q, ortho=ortho, b=b)


def _check_compat(data_ortho: OrthoROM, ref: ReferenceBasis) -> None:
    if data_ortho.block_sizes != ref.ortho.block_sizes:
        raise StructuralError(
            f"block structure mismatch: data {data_ortho.block_sizes} vs "
            f"reference {ref.ortho.block_sizes}"
        )
    if data_ortho.size != ref.size:
        raise StructuralError(
            f"reduced model size {data_ortho.size} does not match basis {ref.size}"
        )


def internal_solution(data_ortho: OrthoROM, ref: ReferenceBasis, lam: float) -> InternalSolution:
    """Pair data-driven coefficients with the reference basis."""
    _check_compat(data_ortho, ref)
    c = solve_ortho(data_ortho, lam)
    vals = ref.basis @ c
    fields = [
        Field(ref.mesh, vals[:, r], lam=lam, source_index=r) for r in range(vals.shape[1])
    ]
    return InternalSolution(lam=lam, fields=fields)


def internal_solution_new_source(
    data_ortho: OrthoROM, ref: ReferenceBasis, pairing: np.ndarray, lam: float
) -> InternalSolution:
    """Internal solution for a source that was not in the probing set.

    pairing[(i*K + r)] = int_boundary u_i^r g_new ds, the measured pairing
    of the new source with the probing snapshots; one column per new
    source is allowed.
    """
    _check_compat(data_ortho, ref)
    P = np.asarray(pairing, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[0] != data_ortho.Q.shape[0]:
        raise StructuralError(
            f"pairing has {P.shape[0]} rows, expected m*K = {data_ortho.Q.shape[0]}"
        )
    rhs_hat = data_ortho.Q.T @ P
    A = data_ortho.T + lam * np.eye(data_ortho.size)
    c = np.linalg.solve(A, rhs_hat)
    vals = ref.basis @ c
    fields = [
        Field(ref.mesh, vals[:, r], lam=lam, source_index=r) for r in range(vals.shape[1])
    ]
    return InternalSolution(lam=lam, fields=fields)


# ---------------------------------------------------------------------------
# potential extraction


def second_difference_1d(nodes: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Three-point second difference; boundary entries are zero."""
    h = np.diff(nodes)
    out = np.zeros_like(u)
    hl, hr = h[:-1], h[1:]
    out[1:-1] = 2.0 * ((u[2:] - u[1:-1]) / hr - (u[1:-1] - u[:-2]) / hl) / (hl + hr)
    return out


def _lumped_laplacian_2d(mesh: Mesh2D):
    K = stiffness_matrix(mesh)
    area = mesh.triangle_areas()
    ml = np.zeros(mesh.n_vertices)
    np.add.at(ml, mesh.triangles.ravel(), np.repeat(area / 3.0, 3))

    def apply(u: np.ndarray) -> np.ndarray:
        return -(K @ u) / ml

    return apply


def _boundary_layer_mask_1d(mesh: Mesh1D, layers: int) -> np.ndarray:
    keep = np.ones(mesh.nodes.size, dtype=bool)
    if layers > 0:
        keep[:layers] = False
        keep[-layers:] = False
    return keep


def _boundary_layer_mask_2d(mesh: Mesh2D, layers: int) -> np.ndarray:
    keep = np.ones(mesh.n_vertices, dtype=bool)
    ring = np.zeros(mesh.n_vertices, dtype=bool)
    ring[np.unique(mesh.boundary_edges)] = True
    for _ in range(layers):
        touched = ring[mesh.triangles].any(axis=1)
        ring2 = ring.copy()
        ring2[np.unique(mesh.triangles[touched])] = True
        ring = ring2
    keep[ring] = False
    return keep


def invert(
    solutions: Sequence[InternalSolution],
    *,
    mask_layers: Optional[int] = None,
    abs_floor: float = 1e-12,
    rel_floor: float = 0.05,
) -> Reconstruction:
    """Extract q from internal solutions by the strong-form quotient.

    Candidates from every (source, lambda) pair are averaged with weights
    u_tilde^2.  Masked: a boundary layer (two node layers in 1D, one
    element layer in 2D by default), nodes where every candidate is below
    the absolute floor, and nodes whose aggregate weight is below
    rel_floor^2 times the peak aggregate weight.
    """
    if not solutions:
        raise ValueError("need at least one internal solution")
    mesh = solutions[0].fields[0].mesh
    is_1d = isinstance(mesh, Mesh1D)
    if mask_layers is None:
        mask_layers = 2 if is_1d else 1
    if is_1d:
        lap = lambda u: second_difference_1d(mesh.nodes, u)
        keep = _boundary_layer_mask_1d(mesh, mask_layers)
        n = mesh.nodes.size
    else:
        lap = _lumped_laplacian_2d(mesh)
        keep = _boundary_layer_mask_2d(mesh, mask_layers)
        n = mesh.n_vertices

    num = np.zeros(n)
    den = np.zeros(n)
    for sol in solutions:
        for f in sol.fields:
            if f.mesh is not mesh:
                raise StructuralError("all internal solutions must share one mesh")
            u = f.values
            usable = np.abs(u) >= abs_floor
            du = lap(u)
            num += np.where(usable, u * (du - sol.lam * u), 0.0)
            den += np.where(usable, u * u, 0.0)

    keep &= den > 0
    keep &= den >= (rel_floor**2) * den.max()
    q_est = np.zeros(n)
    q_est[keep] = num[keep] / den[keep]
    return Reconstruction(mesh=mesh, q_est=q_est, mask=keep.astype(float))


def local_maxima_2d(
    rec: Reconstruction, count: int = 2, min_separation: float = 0.12
) -> np.ndarray:
    """Positions of the strongest local maxima of a masked 2D reconstruction.

    A vertex qualifies when its value is at least that of every unmasked mesh
    neighbor; qualifying vertices are visited in decreasing q_est order and
    accepted when at least min_separation away from every already accepted
    one, so a single broad peak is not reported twice.  Returns (count, 2)
    positions.
    """
    if not isinstance(rec.mesh, Mesh2D):
        raise StructuralError("peak detection is defined for 2D reconstructions")
    n = rec.mesh.vertices.shape[0]
    vals = np.where(rec.mask > 0.5, rec.q_est, -np.inf)
    neighbors = [set() for _ in range(n)]
    for a, b, c in rec.mesh.triangles:
        neighbors[a].update((b, c))
        neighbors[b].update((a, c))
        neighbors[c].update((a, b))
    maximal = [
        idx
        for idx in range(n)
        if np.isfinite(vals[idx])
        and all(vals[idx] >= vals[j] for j in neighbors[idx])
    ]
    order = sorted(maximal, key=lambda idx: vals[idx], reverse=True)
    peaks = []
    for idx in order:
        p = rec.mesh.vertices[idx]
        if all(np.hypot(p[0] - pk[0], p[1] - pk[1]) > min_separation for pk in peaks):
            peaks.append(p)
        if len(peaks) == count:
            break
    if len(peaks) < count:
        raise StructuralError(
            f"found only {len(peaks)} separated local maxima, {count} requested"
        )
    return np.array(peaks)


def basis_distances(a: ReferenceBasis, b: ReferenceBasis) -> np.ndarray:
    """Per-function L2 distances between two bases on the same mesh."""
    if a.mesh is not b.mesh and type(a.mesh) is not type(b.mesh):
        raise StructuralError("bases live on different meshes")
    if a.basis.shape != b.basis.shape:
        raise StructuralError("bases have different shapes")
    inner = mass_inner if isinstance(a.mesh, Mesh1D) else mass_inner_2d
    out = np.empty(a.size)
    for j in range(a.size):
        diff = a.basis[:, j] - b.basis[:, j]
        out[j] = np.sqrt(max(inner(a.mesh, diff, diff), 0.0))
    return out


# ---------------------------------------------------------------------------
# CSV output


def write_internal_csv(solutions: Sequence[InternalSolution], path: str) -> None:
    mesh = solutions[0].fields[0].mesh
    is_1d = isinstance(mesh, Mesh1D)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if is_1d:
            w.writerow(["x", "lambda", "r", "value"])
        else:
            w.writerow(["x", "y", "lambda", "r", "value"])
        for sol in solutions:
            for f in sol.fields:
                if is_1d:
                    for x, v in zip(mesh.nodes, f.values):
                        w.writerow([FLOAT_FMT % x, FLOAT_FMT % sol.lam, f.source_index, FLOAT_FMT % v])
                else:
                    for (x, y), v in zip(mesh.vertices, f.values):
                        w.writerow(
                            [FLOAT_FMT % x, FLOAT_FMT % y, FLOAT_FMT % sol.lam, f.source_index, FLOAT_FMT % v]
                        )


def write_reconstruction_csv(rec: Reconstruction, path: str) -> None:
    is_1d = isinstance(rec.mesh, Mesh1D)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if is_1d:
            w.writerow(["x", "q_est", "mask"])
            for x, q, mk in zip(rec.mesh.nodes, rec.q_est, rec.mask):
                w.writerow([FLOAT_FMT % x, FLOAT_FMT % q, FLOAT_FMT % mk])
        else:
            w.writerow(["x", "y", "q_est", "mask"])
            for (x, y), q, mk in zip(rec.mesh.vertices, rec.q_est, rec.mask):
                w.writerow([FLOAT_FMT % x, FLOAT_FMT % y, FLOAT_FMT % q, FLOAT_FMT % mk])
