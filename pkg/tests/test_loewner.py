"""Divided-difference model construction checked against hand values and
exact rational data.

For F(lambda) = sum_k r_k/(lambda - p_k) with p_k < 0 and r_k > 0 the
matrices M and S built from (F, F') samples are exactly the Gram and
stiffness matrices of the underlying rational snapshots, so M is positive
semidefinite of rank min(m, number of poles) and S + b_i M = F holds row
by row.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rominv import loewner as lw
from rominv.errors import IllPosedDataError


def rational_samples(poles, residues, b):
    """Exact F and F' of a scalar Stieltjes function at the points b."""
    poles = np.asarray(poles, dtype=float)
    residues = np.asarray(residues, dtype=float)
    b = np.asarray(b, dtype=float)
    F = np.array([[np.sum(residues / (bi - poles))] for bi in b])[:, :, None]
    DF = np.array([[-np.sum(residues / (bi - poles) ** 2)] for bi in b])[:, :, None]
    return lw.TransferDataSet(b=b, F=F.reshape(-1, 1, 1), DF=DF.reshape(-1, 1, 1))


def test_divided_difference_hand_values():
    # F(lambda) = 2/lambda sampled at b = 1, 3: M12 = (F2-F1)/(b1-b2) = 2/3,
    # S12 = (b2 F2 - b1 F1)/(b2 - b1) = 0, M rank one, S identically zero
    b = np.array([1.0, 3.0])
    F = np.array([2.0, 2.0 / 3.0]).reshape(2, 1, 1)
    DF = np.array([-2.0, -2.0 / 9.0]).reshape(2, 1, 1)
    data = lw.TransferDataSet(b=b, F=F, DF=DF)
    rom = lw.build_rom(data)
    assert rom.M[0, 0] == pytest.approx(2.0, abs=1e-15)
    assert rom.M[1, 1] == pytest.approx(2.0 / 9.0, abs=1e-15)
    assert rom.M[0, 1] == pytest.approx(2.0 / 3.0, abs=1e-15)
    assert np.abs(rom.S).max() == pytest.approx(0.0, abs=1e-15)
    # M is rank one: the conditioning floor keeps a single direction
    w, V = lw.reliable_eigs(rom)
    assert w.size == 1
    # Hermite interpolation of one-pole data is exact everywhere
    assert lw.rom_transfer(rom, 2.0)[0, 0] == pytest.approx(1.0, rel=1e-12)
    assert lw.rom_transfer(rom, 10.0)[0, 0] == pytest.approx(0.2, rel=1e-12)


def test_generic_hand_case():
    # b = (1, 3), F = (2, 1): M12 = (1-2)/(1-3) = 0.5, S12 = (3-2)/2 = 0.5
    b = np.array([1.0, 3.0])
    F = np.array([2.0, 1.0]).reshape(2, 1, 1)
    DF = np.array([-0.9, -0.4]).reshape(2, 1, 1)
    data = lw.TransferDataSet(b=b, F=F, DF=DF)
    rom = lw.build_rom(data)
    assert rom.M[0, 1] == pytest.approx(0.5, abs=1e-15)
    assert rom.S[0, 1] == pytest.approx(0.5, abs=1e-15)
    assert rom.M[0, 0] == pytest.approx(0.9, abs=1e-15)
    assert rom.S[0, 0] == pytest.approx(2.0 + 1.0 * (-0.9), abs=1e-15)


def test_pencil_identity_exact():
    data = rational_samples([-1.0, -4.0], [1.0, 2.0], [0.5, 2.0, 5.0])
    rom = lw.build_rom(data)
    for i, bi in enumerate(data.b):
        row = rom.S[i] + bi * rom.M[i]
        np.testing.assert_allclose(row, data.F[:, 0, 0], atol=1e-13)


def test_hermite_matching_single_sample():
    data = rational_samples([-2.0], [3.0], [1.5])
    rom = lw.build_rom(data)
    assert lw.rom_transfer(rom, 1.5)[0, 0] == pytest.approx(3.0 / 3.5, rel=1e-13)
    h = 1e-6
    dnum = (lw.rom_transfer(rom, 1.5 + h)[0, 0] - lw.rom_transfer(rom, 1.5 - h)[0, 0]) / (2 * h)
    assert dnum == pytest.approx(-3.0 / 3.5**2, rel=1e-6)


def test_positive_derivative_rejected():
    b = np.array([1.0, 2.0])
    F = np.array([1.0, 0.5]).reshape(2, 1, 1)
    DF = np.array([0.3, -0.1]).reshape(2, 1, 1)
    with pytest.raises(IllPosedDataError):
        lw.build_rom(lw.TransferDataSet(b=b, F=F, DF=DF))


def test_indefinite_data_rejected():
    # growing F with tiny derivatives gives an indefinite divided-difference
    # matrix well beyond the conditioning floor
    b = np.array([1.0, 2.0])
    F = np.array([1.0, 5.0]).reshape(2, 1, 1)
    DF = np.array([-1e-3, -1e-3]).reshape(2, 1, 1)
    with pytest.raises(IllPosedDataError, match="indefinite"):
        lw.build_rom(lw.TransferDataSet(b=b, F=F, DF=DF))


def test_unordered_points_rejected():
    b = np.array([2.0, 1.0])
    F = np.ones((2, 1, 1))
    DF = -np.ones((2, 1, 1))
    with pytest.raises(ValueError):
        lw.TransferDataSet(b=b, F=F, DF=DF)


def test_rank_deficient_data_truncates():
    # one pole sampled at four points: M has numerical rank one
    data = rational_samples([-1.0], [2.0], [1.0, 2.0, 4.0, 8.0])
    rom = lw.build_rom(data)
    w, V = lw.reliable_eigs(rom)
    assert w.size == 1
    for bi in data.b:
        expect = 2.0 / (bi + 1.0)
        assert lw.rom_transfer(rom, float(bi))[0, 0] == pytest.approx(expect, rel=1e-10)


def test_dataset_csv_roundtrip(tmp_path):
    data = rational_samples([-1.0, -3.0], [1.0, 0.5], [1.0, 2.0, 3.0])
    path = tmp_path / "dataset.csv"
    lw.write_dataset_csv(data, str(path))
    back = lw.read_dataset_csv(str(path))
    np.testing.assert_array_equal(back.b, data.b)
    np.testing.assert_array_equal(back.F, data.F)
    np.testing.assert_array_equal(back.DF, data.DF)


def test_rom_csv_roundtrip(tmp_path):
    data = rational_samples([-1.0, -3.0], [1.0, 0.5], [1.0, 2.0, 3.0])
    rom = lw.build_rom(data, conditioning_tol=1e-11)
    path = tmp_path / "rom.csv"
    lw.write_rom_csv(rom, str(path))
    back = lw.read_rom_csv(str(path))
    np.testing.assert_array_equal(back.M, rom.M)
    np.testing.assert_array_equal(back.S, rom.S)
    np.testing.assert_array_equal(back.rhs, rom.rhs)
    assert back.conditioning_tol == rom.conditioning_tol


@st.composite
def stieltjes_data(draw):
    n_poles = draw(st.integers(min_value=1, max_value=4))
    m = draw(st.integers(min_value=1, max_value=4))
    poles = sorted(
        draw(
            st.lists(
                st.floats(min_value=-50.0, max_value=-0.1),
                min_size=n_poles,
                max_size=n_poles,
                unique=True,
            )
        )
    )
    residues = draw(
        st.lists(
            st.floats(min_value=0.1, max_value=10.0), min_size=n_poles, max_size=n_poles
        )
    )
    gaps = draw(
        st.lists(st.floats(min_value=0.5, max_value=5.0), min_size=m, max_size=m)
    )
    b = np.cumsum(np.array(gaps)) + 0.5
    return rational_samples(poles, residues, b)


@settings(max_examples=40, deadline=None)
@given(data=stieltjes_data())
def test_stieltjes_data_always_admissible(data):
    rom = lw.build_rom(data)
    w, _ = lw.reliable_eigs(rom)
    assert (w > 0).all()
    # Hermite conditions at every sample
    for i, bi in enumerate(data.b):
        got = lw.rom_transfer(rom, float(bi))[0, 0]
        assert got == pytest.approx(data.F[i, 0, 0], rel=1e-7)


@settings(max_examples=40, deadline=None)
@given(data=stieltjes_data())
def test_pencil_rows_match_data(data):
    rom = lw.build_rom(data)
    scale = np.abs(data.F).max()
    for i, bi in enumerate(data.b):
        row = rom.S[i] + bi * rom.M[i]
        assert np.abs(row - data.F[:, 0, 0]).max() <= 1e-12 * max(scale, 1.0)
