"""Small dense complex matrices: products, spectral norms, Hermitian exponentials."""

from __future__ import annotations

import numpy as np

HERMITIAN_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = (X + 1j * Y) / 2
SIGMA_MINUS = (X - 1j * Y) / 2


class DimensionError(ValueError):
    pass


class NotHermitianError(ValueError):
    pass


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a square complex 2-d array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return m


def matmul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


def operator_norm(a) -> float:
    """Largest singular value."""
    a = as_matrix(a)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def operator_norms(stack: np.ndarray) -> np.ndarray:
    """Spectral norms of a stack of matrices with shape ``(..., d, d)``."""
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


def hermiticity_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - np.swapaxes(a.conj(), -1, -2)), initial=0.0))


def is_hermitian(a, tol: float = HERMITIAN_TOL) -> bool:
    return hermiticity_defect(a) <= tol


def expm_skew_hermitian(h, t: float) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition."""
    h = as_matrix(h)
    if not is_hermitian(h):
        raise NotHermitianError(
            f"matrix is not Hermitian (defect {hermiticity_defect(h):.3e})"
        )
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def expm_hermitian_batch(hs: np.ndarray, dts: np.ndarray) -> np.ndarray:
    """Stacked ``exp(-i hs[k] dts[k])``; ``hs`` has shape ``(N, d, d)``.

    Hermiticity is not re-checked here; callers validate the generator once.
    """
    hs = 0.5 * (hs + np.swapaxes(hs.conj(), -1, -2))
    w, v = np.linalg.eigh(hs)
    phases = np.exp(-1j * w * np.asarray(dts, dtype=float)[:, None])
    return (v * phases[:, None, :]) @ np.swapaxes(v.conj(), -1, -2)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(d: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (a + a.conj().T) / 2
