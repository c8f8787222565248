"""Galerkin reduced models assembled from boundary transfer data.

The entries of the snapshot mass and stiffness matrices are recovered from
measured transfer values F(b_i) and derivatives dF/dlambda(b_i) by Loewner
divided differences:

    M[(i,r),(j,l)] = (F_j[l,r] - F_i[l,r]) / (b_i - b_j)        i != j
    M[(i,r),(i,l)] = -dF_i[l,r]
    S[(i,r),(j,l)] = (b_j F_j[l,r] - b_i F_i[l,r]) / (b_j - b_i)
    S[(i,r),(i,l)] = F_i[l,r] + b_i dF_i[l,r]

No snapshot is ever touched; these identities follow from the variational
form of the underlying problem.  Row/column flattening is spectral-point
major: (i, r) -> i*K + r with 0-based i, r everywhere.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import IllPosedDataError, SingularPencilError

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class TransferDataSet:
    """Transfer samples: b (m,), F (m, K, K), DF (m, K, K).

    F[i, r, l] pairs the response to source r with source l at spectral
    point b[i]; DF is its derivative in lambda.  b must be positive,
    strictly increasing, and pairwise distinct (the divided differences
    divide by b_i - b_j).
    """

    b: np.ndarray
    F: np.ndarray
    DF: np.ndarray

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        F = np.asarray(self.F, dtype=float)
        DF = np.asarray(self.DF, dtype=float)
        if F.ndim == 1:
            F = F[:, None, None]
        if DF.ndim == 1:
            DF = DF[:, None, None]
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "DF", DF)
        m = b.size
        if F.shape != DF.shape or F.ndim != 3 or F.shape[0] != m or F.shape[1] != F.shape[2]:
            raise ValueError("F and DF must both have shape (m, K, K)")
        if (b <= 0).any():
            raise ValueError("spectral points must be positive")
        if np.unique(b).size != m:
            raise ValueError(
                "spectral points must be pairwise distinct: the Loewner "
                "divided differences divide by b_i - b_j"
            )
        if not (np.diff(b) > 0).all():
            raise ValueError("spectral points must be strictly increasing")

    @property
    def m(self) -> int:
        return self.b.size

    @property
    def K(self) -> int:
        return self.F.shape[1]


@dataclass(frozen=True)
class GalerkinROM:
    """Snapshot-space Galerkin system (S + lambda M) c = rhs, data-assembled.

    conditioning_tol is the relative eigenvalue floor of M: directions whose
    M-eigenvalue falls below conditioning_tol * lambda_max(M) carry no
    numerically reliable information and are excluded from every solve with
    M (delta projection, orthogonalization), which deflates the reduced
    model accordingly.  M and S themselves are stored as assembled.
    """

    m: int
    K: int
    M: np.ndarray
    S: np.ndarray
    rhs: np.ndarray
    conditioning_tol: float = 1e-12

    @property
    def size(self) -> int:
        return self.m * self.K


def reliable_eigs(rom: GalerkinROM):
    """M-eigenpairs at or above the conditioning floor, ascending."""
    w, V = scipy.linalg.eigh(rom.M)
    keep = w >= rom.conditioning_tol * w[-1]
    return w[keep], V[:, keep]


@dataclass(frozen=True)
class DeltaProjection:
    """Coefficients of the boundary delta projection: M d = rhs, solved on
    the numerically reliable eigenspace of M."""

    d: np.ndarray


def build_rom(data: TransferDataSet, *, conditioning_tol: float = 1e-12) -> GalerkinROM:
    """Assemble M, S, rhs from transfer data by Loewner divided differences.

    Both matrices are symmetrized as (X + X.T)/2 after assembly.  M must be
    positive semidefinite up to conditioning_tol times its largest
    eigenvalue; a worse violation means the data is inconsistent with a
    self-adjoint problem.  Eigenvalues inside the tolerance band are treated
    as zero: those directions are dropped by the solves downstream.
    """
    b, m, K = data.b, data.m, data.K
    FT = data.F.transpose(0, 2, 1)
    DFT = data.DF.transpose(0, 2, 1)

    diffb = b[:, None] - b[None, :]
    np.fill_diagonal(diffb, 1.0)

    Mb = (FT[None, :] - FT[:, None]) / diffb[:, :, None, None]
    Sb = (b[None, :, None, None] * FT[None, :] - b[:, None, None, None] * FT[:, None])
    Sb = Sb / (-diffb[:, :, None, None])
    idx = np.arange(m)
    Mb[idx, idx] = -DFT
    Sb[idx, idx] = FT + b[:, None, None] * DFT

    M = Mb.transpose(0, 2, 1, 3).reshape(m * K, m * K)
    S = Sb.transpose(0, 2, 1, 3).reshape(m * K, m * K)
    M = 0.5 * (M + M.T)
    S = 0.5 * (S + S.T)

    w = scipy.linalg.eigvalsh(M)
    if w[-1] <= 0:
        raise IllPosedDataError(
            f"recovered mass matrix has no positive eigenvalue (largest {w[-1]:.6e})"
        )
    if w[0] < -conditioning_tol * w[-1]:
        raise IllPosedDataError(
            f"recovered mass matrix is indefinite beyond the conditioning "
            f"tolerance: eigenvalue {w[0]:.6e}, floor {-conditioning_tol * w[-1]:.6e}"
        )

    rhs = data.F.reshape(m * K, K).copy()
    return GalerkinROM(m=m, K=K, M=M, S=S, rhs=rhs, conditioning_tol=conditioning_tol)


def project_delta(rom: GalerkinROM) -> DeltaProjection:
    """Solve M d = rhs on the reliable eigenspace of M."""
    w, V = reliable_eigs(rom)
    d = V @ ((V.T @ rom.rhs) / w[:, None])
    return DeltaProjection(d=d)


def rom_transfer(rom: GalerkinROM, lam: float) -> np.ndarray:
    """Reduced transfer matrix rhs^T (S + lambda M)^{-1} rhs, shape (K, K).

    The pencil is solved on the reliable eigenspace of M; directions below
    the conditioning floor would make it numerically singular.
    """
    w, V = reliable_eigs(rom)
    pencil = V.T @ (rom.S @ V) + lam * np.diag(w)
    pencil = 0.5 * (pencil + pencil.T)
    rhs_r = V.T @ rom.rhs
    try:
        sol = scipy.linalg.solve(pencil, rhs_r, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularPencilError(f"S + lambda*M singular at lambda={lam!r}") from exc
    if not np.isfinite(sol).all():
        raise SingularPencilError(f"S + lambda*M singular at lambda={lam!r}")
    return rhs_r.T @ sol


# ---------------------------------------------------------------------------
# CSV round trips


def write_dataset_csv(data: TransferDataSet, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "b", "r", "l", "F", "DF"])
        for i in range(data.m):
            for r in range(data.K):
                for l in range(data.K):
                    w.writerow([
                        i,
                        FLOAT_FMT % data.b[i],
                        r,
                        l,
                        FLOAT_FMT % data.F[i, r, l],
                        FLOAT_FMT % data.DF[i, r, l],
                    ])


def read_dataset_csv(path: str) -> TransferDataSet:
    rows = []
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        required = {"i", "b", "r", "l", "F", "DF"}
        if rd.fieldnames is None or not required.issubset(rd.fieldnames):
            raise ValueError(f"dataset CSV must have columns {sorted(required)}")
        for row in rd:
            rows.append(row)
    if not rows:
        raise ValueError("dataset CSV is empty")
    m = max(int(r["i"]) for r in rows) + 1
    K = max(int(r["r"]) for r in rows) + 1
    b = np.full(m, np.nan)
    F = np.full((m, K, K), np.nan)
    DF = np.full((m, K, K), np.nan)
    for row in rows:
        i, r, l = int(row["i"]), int(row["r"]), int(row["l"])
        b[i] = float(row["b"])
        F[i, r, l] = float(row["F"])
        DF[i, r, l] = float(row["DF"])
    if np.isnan(b).any() or np.isnan(F).any() or np.isnan(DF).any():
        raise ValueError("dataset CSV is missing entries for some (i, r, l)")
    return TransferDataSet(b=b, F=F, DF=DF)


def _write_matrix(w: csv.writer, name: str, arr: np.ndarray) -> None:
    w.writerow([name, arr.shape[0], arr.shape[1]])
    for row in np.atleast_2d(arr):
        w.writerow([FLOAT_FMT % v for v in row])


def write_rom_csv(rom: GalerkinROM, path: str) -> None:
    """Single CSV holding m, K and the dense M, S, rhs blocks."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", rom.m, "K", rom.K, "conditioning_tol", FLOAT_FMT % rom.conditioning_tol])
        _write_matrix(w, "M", rom.M)
        _write_matrix(w, "S", rom.S)
        _write_matrix(w, "rhs", rom.rhs)


def read_rom_csv(path: str) -> GalerkinROM:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "m":
        raise ValueError("not a ROM CSV")
    m, K = int(rows[0][1]), int(rows[0][3])
    tol = float(rows[0][5]) if len(rows[0]) > 5 else 1e-12
    mats = {}
    k = 1
    while k < len(rows):
        name, nr, nc = rows[k][0], int(rows[k][1]), int(rows[k][2])
        block = np.array([[float(v) for v in rows[k + 1 + j]] for j in range(nr)])
        mats[name] = block.reshape(nr, nc)
        k += 1 + nr
    return GalerkinROM(
        m=m, K=K, M=mats["M"], S=mats["S"], rhs=mats["rhs"], conditioning_tol=tol
    )
