"""Spectrally matched staggered grid equivalent to the 1D reduced model.

Strictly one-dimensional, scalar data (K = 1).  The reduced transfer
function is a rational function with negative poles and positive residues,

    F_m(lambda) = sum_i y_i^2 / (lambda - theta_i),

and admits the continued fraction form

    F_m(lambda) = 1 / (gh_1*lambda + 1 / (g_1 + 1 / (gh_2*lambda + ... +
                  1 / (g_{m-1} + 1 / (gh_m*lambda + 1/g_m)))))

whose 2m coefficients g_j (primal steps gamma) and gh_j (dual steps
gamma_hat) are the steps of a staggered finite difference scheme

    -(1/gh_j) * ((U_{j+1}-U_j)/g_j - (U_j-U_{j-1})/g_{j-1}) + lambda U_j = 0
    -(U_1 - U_0)/g_0 = 1  (prescribed left flux, ghost step g_0 drops out)
    U_{m+1} = 0           (right ghost value)

i.e. (L_m + lambda I) U = e_1 / gh_1 with U_1 = F_m(lambda).  The
coefficients are extracted by the Lanczos/Stieltjes procedure: run Lanczos
on diag(-theta) with start vector y/|y| and read the steps off the Jacobi
matrix.  Positivity of every step is equivalent to validity of the data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateInterpolantError, InvalidRomError, StructuralError
from .lanczos import OrthoROM
from .loewner import FLOAT_FMT


@dataclass(frozen=True)
class RationalInterpolant:
    """Pole/residue form: poles strictly negative, residues strictly positive."""

    poles: np.ndarray
    residues: np.ndarray

    def __post_init__(self):
        poles = np.asarray(self.poles, dtype=float)
        residues = np.asarray(self.residues, dtype=float)
        object.__setattr__(self, "poles", poles)
        object.__setattr__(self, "residues", residues)
        if poles.shape != residues.shape or poles.ndim != 1 or poles.size == 0:
            raise InvalidRomError("poles and residues must be matching 1D arrays")
        if not (np.isfinite(poles).all() and np.isfinite(residues).all()):
            raise InvalidRomError("poles and residues must be finite")
        if (poles >= 0).any():
            raise InvalidRomError(f"poles must be negative, worst {poles.max():.6e}")
        if (residues <= 0).any():
            raise InvalidRomError(f"residues must be positive, worst {residues.min():.6e}")

    @property
    def order(self) -> int:
        return self.poles.size

    def __call__(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        return (self.residues / (lam[..., None] - self.poles)).sum(axis=-1)


@dataclass(frozen=True)
class StaggeredGrid1D:
    """Primal steps gamma (m,) and dual steps gamma_hat (m,), all positive."""

    gamma: np.ndarray
    gamma_hat: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        gh = np.asarray(self.gamma_hat, dtype=float)
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "gamma_hat", gh)
        if g.shape != gh.shape or g.ndim != 1 or g.size == 0:
            raise DegenerateInterpolantError("gamma and gamma_hat must be matching 1D arrays")
        if not ((g > 0).all() and (gh > 0).all() and np.isfinite(g).all() and np.isfinite(gh).all()):
            raise DegenerateInterpolantError("grid steps must be finite and positive")

    @property
    def m(self) -> int:
        return self.gamma.size


def interpolant_from_ortho(ortho: OrthoROM) -> RationalInterpolant:
    """Diagonalize T; residues are (first-basis-function boundary value)^2
    times squared first eigenvector components."""
    if ortho.K != 1:
        raise StructuralError("grid extraction is defined for scalar data (K = 1) only")
    theta, V = scipy.linalg.eigh(ortho.T)
    u1_at_0 = ortho.rhs_hat[0, 0]
    poles = -theta
    residues = (u1_at_0 * V[0, :]) ** 2
    order = np.argsort(poles)[::-1]  # decreasing: pole closest to zero first
    return RationalInterpolant(poles=poles[order], residues=residues[order])


def _jacobi_from_interpolant(interp: RationalInterpolant):
    """Lanczos on diag(-poles) with start sqrt(residues)/norm; full
    reorthogonalization.  Returns (alpha, beta) of the Jacobi matrix."""
    theta = interp.poles
    m = interp.order
    A = -theta
    v = np.sqrt(interp.residues)
    v = v / np.linalg.norm(v)

    alpha = np.zeros(m)
    beta = np.zeros(max(m - 1, 0))
    V = np.zeros((m, m))
    V[:, 0] = v
    for j in range(m):
        w = A * V[:, j]
        alpha[j] = V[:, j] @ w
        w = w - alpha[j] * V[:, j]
        if j > 0:
            w = w - beta[j - 1] * V[:, j - 1]
        w = w - V[:, : j + 1] @ (V[:, : j + 1].T @ w)
        if j < m - 1:
            nrm = np.linalg.norm(w)
            if nrm <= 1e-13 * np.abs(theta).max():
                raise DegenerateInterpolantError(
                    f"Lanczos breakdown at step {j + 1}: repeated or merged poles"
                )
            beta[j] = nrm
            V[:, j + 1] = w / nrm
    return alpha, beta


def continued_fraction(interp: RationalInterpolant) -> StaggeredGrid1D:
    """Stieltjes extraction of the staggered steps from poles and residues."""
    alpha, beta = _jacobi_from_interpolant(interp)
    m = interp.order
    total = interp.residues.sum()

    gamma_hat = np.zeros(m)
    gamma = np.zeros(m)
    gamma_hat[0] = 1.0 / total
    inv_prev = 0.0  # 1/gamma_0; the left ghost step carries the prescribed flux
    for j in range(m):
        val = gamma_hat[j] * alpha[j] - inv_prev
        if not np.isfinite(val) or val <= 0:
            raise DegenerateInterpolantError(f"nonpositive primal step at index {j + 1}")
        gamma[j] = 1.0 / val
        if j < m - 1:
            gh_next = 1.0 / (beta[j] ** 2 * gamma[j] ** 2 * gamma_hat[j])
            if not np.isfinite(gh_next) or gh_next <= 0:
                raise DegenerateInterpolantError(f"nonpositive dual step at index {j + 2}")
            gamma_hat[j + 1] = gh_next
        inv_prev = val
    return StaggeredGrid1D(gamma=gamma, gamma_hat=gamma_hat)


def evaluate_continued_fraction(grid: StaggeredGrid1D, lam: float) -> float:
    """Bottom-up evaluation of the continued fraction at lambda."""
    m = grid.m
    t = grid.gamma_hat[m - 1] * lam + 1.0 / grid.gamma[m - 1]
    for j in range(m - 2, -1, -1):
        t = grid.gamma_hat[j] * lam + 1.0 / (grid.gamma[j] + 1.0 / t)
    return 1.0 / t


def staggered_operator(grid: StaggeredGrid1D) -> np.ndarray:
    """The unsymmetrized finite difference operator L_m (Dirichlet ghost on
    the right, prescribed flux absorbed into the right-hand side on the
    left)."""
    m = grid.m
    g, gh = grid.gamma, grid.gamma_hat
    L = np.zeros((m, m))
    for j in range(m):
        L[j, j] += 1.0 / (gh[j] * g[j])
        if j + 1 < m:
            L[j, j + 1] -= 1.0 / (gh[j] * g[j])
        if j > 0:
            L[j, j] += 1.0 / (gh[j] * g[j - 1])
            L[j, j - 1] -= 1.0 / (gh[j] * g[j - 1])
    return L


def symmetrized_operator(grid: StaggeredGrid1D) -> np.ndarray:
    """Similarity transform of L_m under V_j = sqrt(gamma_hat_j) U_j."""
    s = np.sqrt(grid.gamma_hat)
    L = staggered_operator(grid)
    return (s[:, None] * L) / s[None, :]


def solve_staggered(grid: StaggeredGrid1D, lam: float) -> np.ndarray:
    """Solve (L_m + lambda I) U = e_1 / gamma_hat_1; U[0] = F_m(lambda)."""
    if not (np.isfinite(lam) and lam > 0):
        raise ValueError(f"lambda must be positive, got {lam!r}")
    m = grid.m
    L = staggered_operator(grid)
    rhs = np.zeros(m)
    rhs[0] = 1.0 / grid.gamma_hat[0]
    return np.linalg.solve(L + lam * np.eye(m), rhs)


@dataclass(frozen=True)
class GridEquivalenceReport:
    """Measured agreement between the reduced model and its staggered grid."""

    operator_max_abs: float
    operator_rel: float
    boundary_value_abs: float  # max |u1_hat(0) c_1 - U_1| over the lambda probe set
    coefficient_abs: float  # max |c_i - sqrt(gamma_hat_i) U_i|
    first_value_abs: float  # |u1_hat(0) - 1/sqrt(gamma_hat_1)|
    lambdas: np.ndarray


def equivalence_report(
    ortho: OrthoROM, grid: StaggeredGrid1D, lambdas: np.ndarray
) -> GridEquivalenceReport:
    from .lanczos import solve_ortho

    if ortho.K != 1:
        raise StructuralError("grid equivalence is defined for scalar data only")
    if ortho.size != grid.m:
        raise StructuralError(f"grid has {grid.m} steps, reduced model has {ortho.size}")
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    Ltil = symmetrized_operator(grid)
    op_abs = float(np.abs(Ltil - ortho.T).max())
    op_rel = op_abs / float(np.abs(ortho.T).max())
    u1_at_0 = float(ortho.rhs_hat[0, 0])
    bnd = 0.0
    coef = 0.0
    for lam in lambdas:
        U = solve_staggered(grid, lam)
        c = solve_ortho(ortho, lam)[:, 0]
        bnd = max(bnd, abs(u1_at_0 * c[0] - U[0]))
        coef = max(coef, float(np.abs(c - np.sqrt(grid.gamma_hat) * U).max()))
    first = abs(u1_at_0 - 1.0 / np.sqrt(grid.gamma_hat[0]))
    return GridEquivalenceReport(
        operator_max_abs=op_abs,
        operator_rel=op_rel,
        boundary_value_abs=bnd,
        coefficient_abs=coef,
        first_value_abs=first,
        lambdas=lambdas,
    )


def grid_positions(grid: StaggeredGrid1D):
    """Cumulative primal and dual node positions for plotting."""
    primal = np.concatenate([[0.0], np.cumsum(grid.gamma[:-1])])
    dual = np.cumsum(grid.gamma_hat)
    return primal, dual


def write_grid_csv(grid: StaggeredGrid1D, path: str) -> None:
    primal, dual = grid_positions(grid)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "gamma", "gamma_hat", "x_primal", "x_dual"])
        for j in range(grid.m):
            w.writerow(
                [
                    j + 1,
                    FLOAT_FMT % grid.gamma[j],
                    FLOAT_FMT % grid.gamma_hat[j],
                    FLOAT_FMT % primal[j],
                    FLOAT_FMT % dual[j],
                ]
            )
