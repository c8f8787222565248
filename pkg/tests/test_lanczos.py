"""Weighted-inner-product orthogonalization checked on a worked 2x2 case,
on PDE-generated data, and on random admissible pencils."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rominv import forward1d as f1
from rominv import forward2d as f2
from rominv import lanczos as lz
from rominv import loewner as lw
from rominv.geometry import Mesh1D, structured_unit_square


def make_rom(M, S, rhs, K=1):
    M = np.asarray(M, dtype=float)
    return lw.GalerkinROM(
        m=M.shape[0] // K, K=K, M=M, S=np.asarray(S, dtype=float),
        rhs=np.asarray(rhs, dtype=float).reshape(M.shape[0], K),
        conditioning_tol=1e-12,
    )


def test_two_by_two_hand_case():
    # M = I, S = diag(1, 2), rhs = (1, 1): alpha_1 = alpha_2 = 1.5,
    # beta = 0.5, sign gauge makes the off-diagonal negative
    rom = make_rom(np.eye(2), np.diag([1.0, 2.0]), [1.0, 1.0])
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    np.testing.assert_allclose(
        ortho.T, np.array([[1.5, -0.5], [-0.5, 1.5]]), atol=1e-14
    )
    np.testing.assert_allclose(ortho.rhs_hat[:, 0], [np.sqrt(2.0), 0.0], atol=1e-14)
    np.testing.assert_allclose(ortho.Q.T @ ortho.Q, np.eye(2), atol=1e-14)
    assert ortho.block_sizes == (1, 1)
    assert ortho.breakdown is None


def test_orthonormality_on_pde_data():
    mesh = Mesh1D.uniform(800)
    med = f1.Medium1D(mesh=mesh, q=f1.q_gaussian(mesh.nodes, 0.4, 0.5, 0.15))
    data = f1.boundary_data_1d(med, np.geomspace(1.0, 40.0, 4))
    rom = lw.build_rom(data)
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    gram = ortho.Q.T @ (rom.M @ ortho.Q)
    # the raw-metric residual scales with the conditioning of M
    assert np.abs(gram - np.eye(4)).max() <= 1e-9
    # scalar data gives a strictly tridiagonal T with negative off-diagonals
    off = np.abs(np.triu(ortho.T, 2)).max()
    assert off <= 1e-12 * np.abs(ortho.T).max()
    sub = np.diagonal(ortho.T, 1)
    assert (sub < 0).all()
    # only the first entry of the projected data survives
    assert np.abs(ortho.rhs_hat[1:]).max() <= 1e-10 * abs(ortho.rhs_hat[0, 0])


def test_transfer_equivalence():
    mesh = Mesh1D.uniform(800)
    med = f1.Medium1D(mesh=mesh, q=f1.q_zero(mesh.nodes))
    data = f1.boundary_data_1d(med, np.geomspace(1.0, 10.0, 3))
    rom = lw.build_rom(data)
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    for lam in (1.0, 2.5, 7.0):
        full = lw.rom_transfer(rom, lam)
        red = lz.ortho_transfer(ortho, lam)
        np.testing.assert_allclose(red, full, rtol=1e-10)


def test_block_case_runs_and_deflates():
    mesh = structured_unit_square(32)
    src = f2.per_side_sources(mesh, 2, width=0.25)
    med = f2.q_gaussian_bumps(mesh, [(0.32, 0.32), (0.68, 0.68)], [0.12, 0.12], [10.0, 10.0])
    data = f2.boundary_data_2d(med, src, np.geomspace(1.0, 30.0, 6))
    rom = lw.build_rom(data)
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    # the conditioning floor removes unreliable directions, so later blocks
    # shrink and the note says how many were dropped
    assert sum(ortho.block_sizes) == ortho.size < 6 * 8
    assert ortho.breakdown is not None and "dropped" in ortho.breakdown
    sizes = np.array(ortho.block_sizes)
    assert (np.diff(sizes) <= 0).all()
    # orthonormality holds in the metric of the reliable eigenspace
    w, V = lw.reliable_eigs(rom)
    Qy = V.T @ ortho.Q
    gram = Qy.T @ (w[:, None] * Qy)
    assert np.abs(gram - np.eye(ortho.size)).max() <= 1e-10


def test_full_rank_block_case_raw_metric():
    mesh = structured_unit_square(32)
    src = f2.per_side_sources(mesh, 2, width=0.25)
    med = f2.q_zero_2d(mesh)
    data = f2.boundary_data_2d(med, src, np.array([1.0, 30.0]))
    rom = lw.build_rom(data)
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    assert ortho.block_sizes == (8, 8)
    gram = ortho.Q.T @ (rom.M @ ortho.Q)
    assert np.abs(gram - np.eye(16)).max() <= 1e-10
    # the coupling block carries the triangular recurrence factor
    T12 = ortho.T[:8, 8:]
    assert np.abs(np.triu(T12, 1)).max() <= 1e-12 * np.abs(ortho.T).max()


def test_ortho_csv_roundtrip(tmp_path):
    rom = make_rom(np.eye(3), np.diag([1.0, 2.0, 3.0]), [1.0, 1.0, 1.0])
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    path = tmp_path / "ortho.csv"
    lz.write_ortho_csv(ortho, str(path))
    text = path.read_text()
    assert "block_sizes" in text or "T" in text


def test_solve_ortho_matches_dense():
    rom = make_rom(np.eye(3), np.diag([1.0, 2.0, 3.0]), [2.0, 0.5, 1.0])
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    lam = 1.7
    x = lz.solve_ortho(ortho, lam)
    resid = (ortho.T + lam * np.eye(3)) @ x - ortho.rhs_hat
    assert np.abs(resid).max() <= 1e-12


@st.composite
def admissible_pencil(draw):
    n = draw(st.integers(min_value=2, max_value=6))
    a = draw(
        st.lists(
            st.floats(min_value=-2.0, max_value=2.0),
            min_size=n * n,
            max_size=n * n,
        )
    )
    A = np.array(a).reshape(n, n)
    M = A @ A.T + n * np.eye(n)
    c = draw(
        st.lists(
            st.floats(min_value=-2.0, max_value=2.0),
            min_size=n * n,
            max_size=n * n,
        )
    )
    C = np.array(c).reshape(n, n)
    S = C @ C.T
    rhs = np.array(
        draw(
            st.lists(
                st.floats(min_value=0.1, max_value=2.0), min_size=n, max_size=n
            )
        )
    )
    return make_rom(M, S, rhs)


@settings(max_examples=30, deadline=None)
@given(rom=admissible_pencil())
def test_random_pencil_invariants(rom):
    ortho = lz.orthogonalize(rom, lw.project_delta(rom))
    n = ortho.size
    gram = ortho.Q.T @ (rom.M @ ortho.Q)
    assert np.abs(gram - np.eye(n)).max() <= 1e-8
    assert np.abs(np.triu(ortho.T, 2)).max() <= 1e-8 * max(np.abs(ortho.T).max(), 1.0)
    # the reduced pencil reproduces the full quadratic form
    lam = 1.0 + np.abs(rom.S).max() / min(np.linalg.eigvalsh(rom.M))
    full = lw.rom_transfer(rom, lam)
    red = lz.ortho_transfer(ortho, lam)
    np.testing.assert_allclose(red, full, rtol=1e-6, atol=1e-10)
