"""Block Lanczos orthogonalization of the data-driven Galerkin system.

Runs the three-term recurrence for A = M^{-1} S in the M-inner product,
starting from the delta projection block d = M^{-1} rhs.  Output basis Q
satisfies Q^T M Q = I, T = Q^T S Q is block tridiagonal, and the rotated
right-hand side Q^T rhs is nonzero only in the first block.

Numerical policy:
  * full reorthogonalization, classical Gram-Schmidt applied twice;
  * within-block deflation by pivoted Cholesky of the candidate Gram:
    pivots below deflation_tol times the leading pivot drop the column;
  * a final Cholesky polish of Q^T M Q, iterated while it helps;
  * deterministic gauge.  Scalar blocks (K = 1): signs are flipped so all
    off-diagonals of T are negative and the rotated rhs has positive first
    entry, which is the sign structure of the equivalent staggered-grid
    operator.  True blocks (K > 1): each connection block is the upper
    triangular factor of an M-QR with positive diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import csv

import numpy as np
import scipy.linalg
from scipy.linalg.lapack import get_lapack_funcs

from .errors import IllPosedDataError, SingularPencilError, StructuralError
from .loewner import FLOAT_FMT, DeltaProjection, GalerkinROM, reliable_eigs


@dataclass(frozen=True)
class OrthoROM:
    """Orthogonalized reduced model.

    T : (p, p) block tridiagonal, p = sum(block_sizes) <= m*K
    Q : (m*K, p) snapshot-basis coefficients of the orthonormal functions
    rhs_hat : (p, K) rotated right-hand side, nonzero only in rows of the
        first block
    block_sizes : per-step block widths after deflation
    breakdown : human-readable note when the recurrence stopped early
    """

    m: int
    K: int
    T: np.ndarray
    Q: np.ndarray
    rhs_hat: np.ndarray
    block_sizes: tuple
    breakdown: Optional[str] = None

    @property
    def size(self) -> int:
        return self.T.shape[0]


def _pivoted_rank(G: np.ndarray, tol: float) -> np.ndarray:
    """Indices of columns kept by pivoted Cholesky rank revelation."""
    (pstrf,) = get_lapack_funcs(("pstrf",), (G,))
    c, piv, rank, info = pstrf(G, lower=0)
    if rank == 0:
        return np.array([], dtype=int)
    piv = piv - 1  # LAPACK is 1-based
    lead = c[0, 0] ** 2
    keep = [piv[0]]
    for k in range(1, rank):
        if c[k, k] ** 2 >= tol * lead:
            keep.append(piv[k])
    return np.sort(np.array(keep, dtype=int))


def _m_qr(W: np.ndarray, M: np.ndarray, tol: float):
    """M-orthonormalize the columns of W.

    Returns (X, R, kept) with X^T M X = I, W[:, kept] = X R, R upper
    triangular with positive diagonal.  Columns whose pivot falls below
    tol times the leading pivot are deflated away.
    """
    G = W.T @ (M @ W)
    G = 0.5 * (G + G.T)
    kept = _pivoted_rank(G, tol)
    if kept.size == 0:
        return W[:, :0], np.zeros((0, W.shape[1])), kept
    Wk = W[:, kept]
    Gk = G[np.ix_(kept, kept)]
    R = scipy.linalg.cholesky(Gk, lower=False)
    X = scipy.linalg.solve_triangular(R, Wk.T, trans="T", lower=False).T
    return X, R, kept


def orthogonalize(
    rom: GalerkinROM,
    delta: DeltaProjection,
    *,
    deflation_tol: float = 1e-10,
) -> OrthoROM:
    """Orthogonalize the ROM; see module docstring for conventions.

    The recurrence runs in the coordinates of the numerically reliable
    M-eigenspace (see GalerkinROM.conditioning_tol), where the mass matrix
    is an exactly diagonal, well conditioned matrix; the basis is mapped
    back to snapshot coefficients at the end.  Snapshot directions below
    the conditioning floor never enter the Krylov space, so an
    ill-conditioned Gram deflates the model instead of poisoning it.
    """
    n = rom.size
    d = np.asarray(delta.d, dtype=float).reshape(n, -1)
    if d.shape[1] != rom.K:
        raise StructuralError(f"delta block has {d.shape[1]} columns, expected K={rom.K}")

    w, V = reliable_eigs(rom)
    r = w.size
    Mt = np.diag(w)
    St = V.T @ (rom.S @ V)
    St = 0.5 * (St + St.T)

    breakdown = None if r == n else f"conditioning floor dropped {n - r} of {n} snapshot directions"
    blocks: List[np.ndarray] = []
    X, _, kept = _m_qr(V.T @ d, Mt, deflation_tol)
    if X.shape[1] == 0:
        raise IllPosedDataError("delta projection block is numerically zero")
    if X.shape[1] < rom.K:
        note = f"start block deflated from {rom.K} to {X.shape[1]} columns"
        breakdown = f"{breakdown}; {note}" if breakdown else note
    blocks.append(X)

    while sum(bk.shape[1] for bk in blocks) < r:
        if len(blocks) == rom.m:
            break
        Xj = blocks[-1]
        W = (St @ Xj) / w[:, None]
        Qall = np.concatenate(blocks, axis=1)
        MQ = Mt @ Qall
        for _ in range(2):
            W = W - Qall @ (MQ.T @ W)
        Xn, _, kept = _m_qr(W, Mt, deflation_tol)
        if Xn.shape[1] == 0:
            note = (
                f"block {len(blocks) + 1} deflated to zero columns; "
                f"returning {len(blocks)} blocks"
            )
            breakdown = f"{breakdown}; {note}" if breakdown else note
            break
        blocks.append(Xn)

    Qy = np.concatenate(blocks, axis=1)
    block_sizes = tuple(bk.shape[1] for bk in blocks)

    # polish: re-orthonormalize against the measured Gram until it stops improving
    for _ in range(3):
        G = Qy.T @ (Mt @ Qy)
        resid = np.abs(G - np.eye(G.shape[0])).max()
        if resid < 1e-14:
            break
        R = scipy.linalg.cholesky(0.5 * (G + G.T), lower=False)
        Qy = scipy.linalg.solve_triangular(R, Qy.T, trans="T", lower=False).T

    Qy = _fix_gauge(Qy, St, rom.K, block_sizes)
    T = Qy.T @ (St @ Qy)
    T = 0.5 * (T + T.T)
    Q = V @ Qy
    rhs_hat = Q.T @ rom.rhs
    return OrthoROM(
        m=rom.m,
        K=rom.K,
        T=T,
        Q=Q,
        rhs_hat=rhs_hat,
        block_sizes=block_sizes,
        breakdown=breakdown,
    )


def _fix_gauge(Q: np.ndarray, S: np.ndarray, K: int, block_sizes: tuple) -> np.ndarray:
    if K == 1:
        T = Q.T @ (S @ Q)
        signs = np.ones(Q.shape[1])
        for j in range(1, Q.shape[1]):
            # negative off-diagonal chain, matching the staggered-grid operator
            if signs[j - 1] * T[j - 1, j] > 0:
                signs[j] = -1.0
        return Q * signs
    # block case: rotate each block so its connection factor is an upper
    # triangular matrix with positive diagonal (deterministic M-QR gauge);
    # _m_qr already produced exactly that, nothing to do
    return Q


def solve_ortho(ortho: OrthoROM, lam: float) -> np.ndarray:
    """Solve (T + lambda I) c = rhs_hat; returns (p, K)."""
    A = ortho.T + lam * np.eye(ortho.size)
    try:
        c = scipy.linalg.solve(A, ortho.rhs_hat, assume_a="sym")
    except scipy.linalg.LinAlgError as exc:
        raise SingularPencilError(f"T + lambda*I singular at lambda={lam!r}") from exc
    if not np.isfinite(c).all():
        raise SingularPencilError(f"T + lambda*I singular at lambda={lam!r}")
    return c


def ortho_transfer(ortho: OrthoROM, lam: float) -> np.ndarray:
    """Reduced transfer matrix in the orthonormal basis, shape (K, K)."""
    return ortho.rhs_hat.T @ solve_ortho(ortho, lam)


def write_ortho_csv(ortho: OrthoROM, path: str) -> None:
    from .loewner import _write_matrix

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", ortho.m, "K", ortho.K, "blocks", ";".join(map(str, ortho.block_sizes))])
        _write_matrix(w, "T", ortho.T)
        _write_matrix(w, "Q", ortho.Q)
        _write_matrix(w, "rhs_hat", ortho.rhs_hat)
