"""Solver checks against the closed form for the empty medium.

For q = 0 on (0,1) with -u'(0) = 1 and u(1) = 0 the boundary response is
F(lambda) = tanh(sqrt(lambda))/sqrt(lambda); with a Neumann right end it is
coth instead of tanh.  A constant potential only shifts the spectral
parameter, F_c(lambda) = F_0(lambda + c).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rominv import forward1d as f1
from rominv.geometry import Mesh1D


def closed_form_dirichlet(lam):
    s = np.sqrt(lam)
    return np.tanh(s) / s


def closed_form_neumann(lam):
    s = np.sqrt(lam)
    return 1.0 / (np.tanh(s) * s)


def closed_form_derivative(lam):
    # d/dlam tanh(s)/s with s = sqrt(lam)
    s = np.sqrt(lam)
    sech2 = 1.0 / np.cosh(s) ** 2
    return (s * sech2 - np.tanh(s)) / s**2 / (2.0 * s)


@pytest.fixture(scope="module")
def fine_mesh():
    return Mesh1D.uniform(2000)


def empty_medium(mesh, right_bc="dirichlet"):
    return f1.Medium1D(mesh=mesh, q=f1.q_zero(mesh.nodes), right_bc=right_bc)


def test_trapezoid_weights_sum_to_length(fine_mesh):
    w = f1.trapezoid_weights(fine_mesh.nodes)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert (w > 0).all()


def test_boundary_value_matches_closed_form(fine_mesh):
    med = empty_medium(fine_mesh)
    for lam in (1.0, 2.5, 7.0):
        u = f1.solve_1d(med, lam)
        assert u.values[0] == pytest.approx(closed_form_dirichlet(lam), rel=1e-6)


def test_neumann_boundary_value_matches_closed_form(fine_mesh):
    med = empty_medium(fine_mesh, right_bc="neumann")
    # coth(1) = 1.3130352854993312
    u = f1.solve_1d(med, 1.0)
    assert u.values[0] == pytest.approx(1.3130352854993312, rel=1e-6)
    u = f1.solve_1d(med, 4.0)
    assert u.values[0] == pytest.approx(closed_form_neumann(4.0), rel=1e-6)


def test_second_order_convergence():
    lam = 3.0
    exact = closed_form_dirichlet(lam)
    errs = []
    for n in (250, 500, 1000):
        med = empty_medium(Mesh1D.uniform(n))
        errs.append(abs(f1.solve_1d(med, lam).values[0] - exact))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.15)


def test_transfer_derivative_matches_closed_form(fine_mesh):
    # frozen from the formula above: F'(1) = -0.1708099071708694
    med = empty_medium(fine_mesh)
    data = f1.boundary_data_1d(med, np.array([1.0]))
    assert data.DF[0][0, 0] == pytest.approx(-0.1708099071708694, rel=1e-6)
    assert data.F[0][0, 0] == pytest.approx(closed_form_dirichlet(1.0), rel=1e-6)


def test_derivative_is_negative_norm(fine_mesh):
    # F'(lambda) = -||u||^2 in the continuum
    med = empty_medium(fine_mesh)
    lam = 2.0
    data = f1.boundary_data_1d(med, np.array([lam]))
    u = f1.solve_1d(med, lam).values
    assert data.DF[0][0, 0] == pytest.approx(-f1.mass_inner(fine_mesh, u, u), rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(
    c=st.floats(min_value=0.0, max_value=5.0),
    lam=st.floats(min_value=0.5, max_value=10.0),
)
def test_constant_potential_shifts_spectrum(c, lam):
    mesh = Mesh1D.uniform(1000)
    med = f1.Medium1D(mesh=mesh, q=f1.q_constant(mesh.nodes, c))
    u = f1.solve_1d(med, lam)
    assert u.values[0] == pytest.approx(closed_form_dirichlet(lam + c), rel=1e-5)


def test_constant_shift_example(fine_mesh):
    # c = 2, lambda = 1: F = tanh(sqrt(3))/sqrt(3) = 0.5423038488458422
    med = f1.Medium1D(mesh=fine_mesh, q=f1.q_constant(fine_mesh.nodes, 2.0))
    u = f1.solve_1d(med, 1.0)
    assert u.values[0] == pytest.approx(0.5423038488458422, rel=1e-6)


def test_piecewise_cubic_profile_shape():
    x = np.linspace(0.0, 1.0, 501)
    q = f1.q_piecewise_cubic(x, amplitude=0.2, rise=0.2, peak=0.5, fall=0.8)
    assert q[x <= 0.2].max() == pytest.approx(0.0, abs=1e-15)
    assert q[np.abs(x - 0.5) < 1e-9][0] == pytest.approx(0.2, abs=1e-12)
    assert q[x >= 0.8].max() == pytest.approx(0.0, abs=1e-15)
    assert q.min() >= 0.0
    # smooth ramp is monotone between plateau edges
    inside = (x >= 0.2) & (x <= 0.5)
    assert (np.diff(q[inside]) >= -1e-15).all()


def test_medium_csv_roundtrip(tmp_path, fine_mesh):
    q = f1.q_gaussian(fine_mesh.nodes, amplitude=0.3, center=0.4, width=0.1)
    med = f1.Medium1D(mesh=fine_mesh, q=q, right_bc="neumann")
    path = tmp_path / "medium.csv"
    f1.write_medium_csv(med, str(path))
    back = f1.read_medium_csv(str(path), fine_mesh, right_bc="neumann")
    np.testing.assert_array_equal(back.q, q)
    assert back.right_bc == "neumann"


def test_boundary_data_shape_and_symmetry(fine_mesh):
    med = empty_medium(fine_mesh)
    b = np.array([1.0, 2.0, 4.0])
    data = f1.boundary_data_1d(med, b)
    assert data.m == 3 and data.K == 1
    assert data.F.shape == (3, 1, 1)
    assert (np.diff(data.F[:, 0, 0]) < 0).all()
    assert (data.DF[:, 0, 0] < 0).all()
