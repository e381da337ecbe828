import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinff import AnsatzCoefficients, ansatz_matrix
from spinff.ansatz import ANTISYM_BASIS, BASIS, COEFF_NAMES

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


def test_zero_coefficients_give_zero_matrix():
    assert np.all(ansatz_matrix(np.zeros(9)) == 0)


def test_w2_only_pattern():
    w = 0.37
    H = ansatz_matrix({"W2": w})
    expect = np.zeros((4, 4), dtype=complex)
    expect[0, 1] = expect[0, 2] = -1j * w
    expect[1, 0] = expect[2, 0] = 1j * w
    expect[1, 3] = expect[2, 3] = 1j * w
    expect[3, 1] = expect[3, 2] = -1j * w
    np.testing.assert_allclose(H, expect, atol=0)


def test_equal_xx_yy_exchange_fills_middle_block():
    j = 0.8
    H = ansatz_matrix({"J1": j, "J2": j})
    assert H[1, 2] == H[2, 1] == pytest.approx(2 * j)
    assert H[0, 3] == H[3, 0] == 0
    assert np.all(np.diag(H) == 0)


def test_field_and_exchange_corners():
    H = ansatz_matrix({"J3": 0.5, "Bz": 0.2, "Bx": 1.0, "By": 2.0})
    assert H[0, 0] == pytest.approx(0.7)
    assert H[3, 3] == pytest.approx(0.3)
    assert H[0, 1] == pytest.approx(0.5 - 1.0j)


@given(st.lists(finite, min_size=9, max_size=9))
def test_always_hermitian_and_traceless(values):
    H = ansatz_matrix(np.array(values))
    np.testing.assert_allclose(H, H.conj().T, atol=0)
    assert abs(np.trace(H)) < 1e-12 * max(1.0, np.max(np.abs(values)))


def test_basis_matrices_are_hermitian():
    for B in list(BASIS) + list(ANTISYM_BASIS):
        np.testing.assert_allclose(B, B.conj().T, atol=0)


def test_pinned_coefficients_enforced():
    with pytest.raises(ValueError):
        AnsatzCoefficients({"J1": 1.0}, selection=("W2",))
    coeffs = AnsatzCoefficients({"W2": 1.0}, selection=("W2",))
    assert coeffs["J1"] == 0.0
    assert coeffs.as_array()[COEFF_NAMES.index("W2")] == 1.0


def test_unknown_name_rejected():
    with pytest.raises(ValueError):
        ansatz_matrix({"Q7": 1.0})
