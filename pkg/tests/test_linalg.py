import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqbound.linalg import (
    I2,
    X,
    Y,
    Z,
    DimensionError,
    NotHermitianError,
    expm_skew_hermitian,
    matmul,
    operator_norm,
    random_hermitian,
    random_unitary,
)
from oracles import taylor_expm


def test_pauli_products():
    assert np.allclose(matmul(X, X), I2)
    assert np.allclose(matmul(X, Y), 1j * Z)


def test_identity_product(rng):
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert np.allclose(matmul(np.eye(3), a), a)


def test_matmul_dimension_mismatch():
    with pytest.raises(DimensionError):
        matmul(np.eye(2), np.eye(3))


def test_operator_norm_identity_and_zero():
    assert operator_norm(I2) == pytest.approx(1.0)
    assert operator_norm(np.zeros((2, 2))) == 0.0


@given(
    st.floats(-5, 5, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
    st.floats(-5, 5, allow_nan=False),
)
def test_pauli_combination_norm(a, b, c):
    assert operator_norm(a * X + b * Y + c * Z) == pytest.approx(np.sqrt(a * a + b * b + c * c), abs=1e-12)


def test_operator_norm_bloch_siegert():
    m = 0.5 * X - 0.025 * Z
    # independent route: singular values of the explicit real matrix
    explicit = np.array([[-0.025, 0.5], [0.5, 0.025]])
    assert np.linalg.svd(explicit, compute_uv=False)[0] == pytest.approx(0.5006246098625197, abs=1e-15)
    assert operator_norm(m) == pytest.approx(0.5006246098625197, abs=1e-15)


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_norm_submultiplicative_and_triangle(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    b = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    assert operator_norm(a @ b) <= operator_norm(a) * operator_norm(b) + 1e-12
    assert operator_norm(a + b) <= operator_norm(a) + operator_norm(b) + 1e-12


@settings(max_examples=50)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_norm_unitary_invariance(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    u, v = random_unitary(d, rng), random_unitary(d, rng)
    assert operator_norm(u @ a @ v) == pytest.approx(operator_norm(a), abs=1e-11)


def test_expm_zero_is_identity():
    assert np.allclose(expm_skew_hermitian(np.zeros((2, 2)), 3.7), I2, atol=0)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 7.5, -2.0])
def test_expm_pauli_rotation(t):
    g = 1.3
    expected = np.cos(g * t / 2) * I2 - 1j * np.sin(g * t / 2) * X
    assert np.allclose(expm_skew_hermitian(0.5 * g * X, t), expected, atol=1e-14)


def test_expm_matches_taylor_for_bloch_siegert():
    h = 0.5 * X - 1.0 / 40.0 * Z
    assert np.allclose(expm_skew_hermitian(h, 1.0), taylor_expm(-1j * h), atol=1e-12)


def test_expm_unitary(rng):
    for d in (2, 3, 5, 16):
        h = random_hermitian(d, rng, 3.0)
        u = expm_skew_hermitian(h, 2.1)
        assert np.max(np.abs(u.conj().T @ u - np.eye(d))) <= 1e-12


def test_expm_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        expm_skew_hermitian(np.array([[0, 1], [0, 0]]), 1.0)


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1), st.floats(-10, 10), st.floats(-10, 10))
def test_expm_group_property(seed, t1, t2):
    rng = np.random.default_rng(seed)
    h = random_hermitian(3, rng)
    lhs = expm_skew_hermitian(h, t1) @ expm_skew_hermitian(h, t2)
    assert np.allclose(lhs, expm_skew_hermitian(h, t1 + t2), atol=1e-11)
