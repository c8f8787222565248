"""P1 finite element solver for the 1D spectral problem on (0, 1).

Strong form:  -u'' + q u + lambda u = 0,  -u'(0) = 1, and either u(1) = 0
or u'(1) = 0.  The transfer value is F(lambda) = u(0; lambda); its
derivative in lambda is obtained from the exact identity

    dF/dlambda = -int_0^1 u(x; lambda)^2 dx

which also holds verbatim for the discrete solution with the consistent
mass matrix.  The q-term is assembled with the trapezoid rule (a lumped
diagonal), the lambda-term with the consistent P1 mass matrix; both keep
the system symmetric.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solveh_banded

from .errors import NonCoerciveSystemError
from .geometry import Field, Mesh1D
from .loewner import FLOAT_FMT, TransferDataSet

RIGHT_BCS = ("dirichlet", "neumann")


@dataclass(frozen=True)
class Medium1D:
    """Nodal potential q on a mesh plus the right boundary condition."""

    mesh: Mesh1D
    q: np.ndarray
    right_bc: str = "dirichlet"

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        object.__setattr__(self, "q", q)
        if q.shape != self.mesh.nodes.shape:
            raise ValueError("q must hold one value per mesh node")
        if not np.isfinite(q).all():
            raise ValueError("q must be finite")
        if self.right_bc not in RIGHT_BCS:
            raise ValueError(f"right_bc must be one of {RIGHT_BCS}")


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    h = np.diff(nodes)
    w = np.zeros_like(nodes)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    return w


def _banded_system(medium: Medium1D, lam: float):
    """Upper banded form (for solveh_banded) of K + diag(q*w) + lam*M."""
    nodes = medium.mesh.nodes
    h = np.diff(nodes)
    n = nodes.size
    diag = np.zeros(n)
    off = np.zeros(n - 1)

    diag[:-1] += 1.0 / h
    diag[1:] += 1.0 / h
    off -= 1.0 / h

    diag += medium.q * trapezoid_weights(nodes)

    diag[:-1] += lam * h / 3.0
    diag[1:] += lam * h / 3.0
    off += lam * h / 6.0

    if medium.right_bc == "dirichlet":
        diag = diag[:-1]
        off = off[:-1]
    ab = np.zeros((2, diag.size))
    ab[0, 1:] = off
    ab[1, :] = diag
    return ab


def solve_1d(medium: Medium1D, lam: float) -> Field:
    """Solve the variational problem at spectral point lam > 0."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam!r}")
    ab = _banded_system(medium, lam)
    rhs = np.zeros(ab.shape[1])
    rhs[0] = 1.0
    try:
        u = solveh_banded(ab, rhs, lower=False)
    except np.linalg.LinAlgError as exc:
        raise NonCoerciveSystemError(
            f"system not positive definite at lambda={lam:g} (min q = {medium.q.min():g})"
        ) from exc
    if medium.right_bc == "dirichlet":
        u = np.concatenate([u, [0.0]])
    return Field(medium.mesh, u, lam=lam, source_index=0)


def mass_tridiagonal(nodes: np.ndarray):
    """Consistent P1 mass matrix as (diag, off) of a symmetric tridiagonal."""
    h = np.diff(nodes)
    diag = np.zeros(nodes.size)
    diag[:-1] += h / 3.0
    diag[1:] += h / 3.0
    off = h / 6.0
    return diag, off

def tridiagonal_inner(diag: np.ndarray, off: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    core = float(np.dot(u * diag, v))
    core += float(np.dot(u[:-1] * off, v[1:]))
    core += float(np.dot(u[1:] * off, v[:-1]))
    return core


def mass_inner(mesh: Mesh1D, u: np.ndarray, v: np.ndarray) -> float:
    """int u v with the consistent P1 rule (exact for nodal P1 functions)."""
    diag, off = mass_tridiagonal(mesh.nodes)
    return tridiagonal_inner(diag, off, u, v)


def l2_norm(mesh: Mesh1D, u: np.ndarray) -> float:
    return float(np.sqrt(max(mass_inner(mesh, u, u), 0.0)))


def boundary_data_1d(medium: Medium1D, b: np.ndarray) -> TransferDataSet:
    """Sample F and dF/dlambda at the spectral points b (K = 1)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    F = np.empty((b.size, 1, 1))
    DF = np.empty((b.size, 1, 1))
    for i, bi in enumerate(b):
        u = solve_1d(medium, bi).values
        F[i, 0, 0] = u[0]
        DF[i, 0, 0] = -mass_inner(medium.mesh, u, u)
    return TransferDataSet(b=b, F=F, DF=DF)


def snapshot_matrices_1d(medium: Medium1D, snapshots: np.ndarray):
    """Directly integrated snapshot Gram and stiffness matrices.

    snapshots holds one column per snapshot.  The Gram matrix uses the
    per-cell Simpson rule (exact for products of P1 functions); the
    stiffness part integrates u'v' exactly and the q-term with the same
    trapezoid rule the solver assembles with.  This is the quadrature
    route against which the data-assembled Loewner matrices are checked;
    it never looks at boundary data.
    """
    nodes = medium.mesh.nodes
    h = np.diff(nodes)
    U = np.asarray(snapshots, dtype=float)
    if U.ndim == 1:
        U = U[:, None]
    left, right = U[:-1, :], U[1:, :]
    mid = 0.5 * (left + right)

    hl = h[:, None] / 6.0
    M = (hl * left).T @ left + 4.0 * (hl * mid).T @ mid + (hl * right).T @ right

    slope = (right - left) / h[:, None]
    S = (h[:, None] * slope).T @ slope
    wq = trapezoid_weights(nodes) * medium.q
    S = S + (wq[:, None] * U).T @ U
    return 0.5 * (M + M.T), 0.5 * (S + S.T)


# ---------------------------------------------------------------------------
# media


def q_zero(x: np.ndarray) -> np.ndarray:
    return np.zeros_like(x)


def q_constant(x: np.ndarray, value: float) -> np.ndarray:
    return np.full_like(x, float(value))


def _smoothstep(t: np.ndarray) -> np.ndarray:
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def q_piecewise_cubic(
    x: np.ndarray,
    amplitude: float = 0.2,
    rise: float = 0.2,
    peak: float = 0.5,
    fall: float = 0.8,
) -> np.ndarray:
    """C1 bump built from two cubic ramps: 0 up to `amplitude` and back to 0."""
    if not rise < peak < fall:
        raise ValueError("need rise < peak < fall")
    up = _smoothstep((x - rise) / (peak - rise))
    down = _smoothstep((fall - x) / (fall - peak))
    return amplitude * np.where(x <= peak, up, down)


def q_gaussian(x: np.ndarray, amplitude: float, center: float, width: float) -> np.ndarray:
    return amplitude * np.exp(-0.5 * ((x - center) / width) ** 2)


def write_medium_csv(medium: Medium1D, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "q"])
        for x, q in zip(medium.mesh.nodes, medium.q):
            w.writerow([FLOAT_FMT % x, FLOAT_FMT % q])


def read_medium_csv(path: str, mesh: Mesh1D, right_bc: str = "dirichlet") -> Medium1D:
    """Read x,q samples and interpolate onto the mesh nodes."""
    xs, qs = [], []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or not {"x", "q"}.issubset(rd.fieldnames):
            raise ValueError("medium CSV must have columns x,q")
        for row in rd:
            xs.append(float(row["x"]))
            qs.append(float(row["q"]))
    if len(xs) < 2:
        raise ValueError("medium CSV needs at least two samples")
    xs = np.asarray(xs)
    order = np.argsort(xs)
    q = np.interp(mesh.nodes, xs[order], np.asarray(qs)[order])
    return Medium1D(mesh=mesh, q=q, right_bc=right_bc)
