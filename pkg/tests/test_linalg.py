import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from chirpeit.linalg import expm


def test_zero_and_diagonal():
    np.testing.assert_array_equal(expm(np.zeros((4, 4))), np.eye(4))
    d = np.array([0.3, -2.0 + 1j, 5j, -40.0])
    np.testing.assert_allclose(expm(np.diag(d)), np.diag(np.exp(d)), rtol=1e-13, atol=1e-300)


@pytest.mark.parametrize("scale", [1e-6, 0.05, 0.9, 3.0, 20.0, 300.0])
def test_against_scipy(scale, rng):
    a = rng.normal(size=(41, 41)) + 1j * rng.normal(size=(41, 41))
    a *= scale / np.linalg.norm(a, 1)
    # anti-Hermitian part keeps the result bounded at large norm
    a = a - a.conj().T - 0.1 * scale * np.eye(41)
    ref = scipy.linalg.expm(a)
    assert np.max(np.abs(expm(a) - ref)) <= 1e-12 * max(1.0, np.max(np.abs(ref)))


def test_inverse_property(rng):
    a = 0.5 * (rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12)))
    np.testing.assert_allclose(expm(a) @ expm(-a), np.eye(12), atol=1e-11)


def test_nilpotent():
    a = np.diag([1.0, 2.0, 3.0], k=1)
    ref = np.eye(4) + a + a @ a / 2 + a @ a @ a / 6
    np.testing.assert_allclose(expm(a), ref, rtol=1e-14, atol=1e-14)


@settings(max_examples=30, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50), st.integers(2, 8))
def test_scalar_multiple_of_identity(re, im, n):
    z = complex(re, im)
    np.testing.assert_allclose(expm(z * np.eye(n)), np.exp(z) * np.eye(n), rtol=1e-12)
