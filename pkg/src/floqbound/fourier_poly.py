"""Operator-valued double series in a formal inverse frequency and a phase.

A :class:`HarmonicPoly` represents

    F(lam, theta) = sum_{j, n} lam**j * exp(i n theta) * A[j, n]

with ``lam = 1/Omega`` and ``theta = Omega t``. The frequency is only substituted
by :meth:`HarmonicPoly.evaluate`, so every algebraic step of the effective
Hamiltonian iteration stays exact in the integer indices ``(j, n)``.
"""

from __future__ import annotations

from collections.abc import Mapping

import numpy as np

from floqbound.linalg import DimensionError, as_matrix, operator_norm, operator_norms

PRUNE_TOL = 1e-14
DEFAULT_GRID = 4096


class NonOscillatoryError(ValueError):
    pass


class HarmonicPoly:
    """Finite series ``sum lam^j e^{i n theta} A[j, n]`` of ``d x d`` matrices.

    Instances are treated as immutable; every operation returns a new object.
    Coefficients with Frobenius norm at or below ``PRUNE_TOL`` are dropped.
    """

    __slots__ = ("dim", "_terms")

    def __init__(self, dim: int, terms: Mapping[tuple[int, int], np.ndarray] | None = None):
        if dim < 1:
            raise DimensionError("dimension must be positive")
        self.dim = int(dim)
        clean = {}
        for (j, n), a in (terms or {}).items():
            if j < 0:
                raise ValueError(f"negative lambda-degree {j}")
            a = as_matrix(a)
            if a.shape != (dim, dim):
                raise DimensionError(f"term {(j, n)} has shape {a.shape}, expected {(dim, dim)}")
            if np.linalg.norm(a) > PRUNE_TOL:
                clean[(int(j), int(n))] = a
        self._terms = dict(sorted(clean.items()))

    # construction -----------------------------------------------------------

    @classmethod
    def from_harmonics(cls, dim: int, coeffs: Mapping[int, np.ndarray]) -> HarmonicPoly:
        """Degree-0 series with the given harmonic coefficients ``{n: A_n}``."""
        if not coeffs:
            raise ValueError("at least one harmonic is required")
        return cls(dim, {(0, n): a for n, a in coeffs.items()})

    @classmethod
    def constant(cls, a) -> HarmonicPoly:
        a = as_matrix(a)
        return cls(a.shape[0], {(0, 0): a})

    @classmethod
    def identity(cls, dim: int) -> HarmonicPoly:
        return cls(dim, {(0, 0): np.eye(dim, dtype=complex)})

    @classmethod
    def zero(cls, dim: int) -> HarmonicPoly:
        return cls(dim)

    @classmethod
    def lambda_series(cls, coeffs) -> HarmonicPoly:
        """Theta-independent series ``sum_k lam^k coeffs[k]``."""
        coeffs = [as_matrix(c) for c in coeffs]
        if not coeffs:
            raise ValueError("empty coefficient list")
        return cls(coeffs[0].shape[0], {(k, 0): c for k, c in enumerate(coeffs)})

    # inspection -------------------------------------------------------------

    @property
    def terms(self) -> dict[tuple[int, int], np.ndarray]:
        return dict(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, j: int, n: int = 0) -> np.ndarray:
        a = self._terms.get((j, n))
        return np.zeros((self.dim, self.dim), dtype=complex) if a is None else a.copy()

    def max_degree(self) -> int:
        return max((j for j, _ in self._terms), default=0)

    def max_harmonic(self) -> int:
        return max((abs(n) for _, n in self._terms), default=0)

    def is_constant_in_theta(self) -> bool:
        return all(n == 0 for _, n in self._terms)

    def is_hermitian_function(self, tol: float = 1e-12) -> bool:
        """True iff ``A[j, -n] == A[j, n]^dagger`` for every stored term."""
        for (j, n), a in self._terms.items():
            partner = self.coefficient(j, -n)
            if np.max(np.abs(partner - a.conj().T)) > tol:
                return False
        return True

    def __repr__(self) -> str:
        return (
            f"HarmonicPoly(dim={self.dim}, terms={len(self)}, "
            f"max_degree={self.max_degree()}, max_harmonic={self.max_harmonic()})"
        )

    # algebra ----------------------------------------------------------------

    def _check(self, other: HarmonicPoly) -> None:
        if not isinstance(other, HarmonicPoly):
            raise TypeError(f"expected HarmonicPoly, got {type(other).__name__}")
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: HarmonicPoly) -> HarmonicPoly:
        self._check(other)
        out = dict(self._terms)
        for key, a in other._terms.items():
            out[key] = out[key] + a if key in out else a
        return HarmonicPoly(self.dim, out)

    def __neg__(self) -> HarmonicPoly:
        return HarmonicPoly(self.dim, {k: -a for k, a in self._terms.items()})

    def __sub__(self, other: HarmonicPoly) -> HarmonicPoly:
        return self + (-other)

    def scale(self, c: complex) -> HarmonicPoly:
        return HarmonicPoly(self.dim, {k: c * a for k, a in self._terms.items()})

    def __rmul__(self, c) -> HarmonicPoly:
        if isinstance(c, (int, float, complex, np.number)):
            return self.scale(c)
        return NotImplemented

    def __mul__(self, other) -> HarmonicPoly:
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return self.mul(other)

    def mul(self, other: HarmonicPoly) -> HarmonicPoly:
        """Operator product: convolution in ``n``, addition in ``j``."""
        self._check(other)
        out: dict[tuple[int, int], np.ndarray] = {}
        for (j1, n1), a in self._terms.items():
            for (j2, n2), b in other._terms.items():
                key = (j1 + j2, n1 + n2)
                p = a @ b
                out[key] = out[key] + p if key in out else p
        return HarmonicPoly(self.dim, out)

    def conjugate_by(self, v) -> HarmonicPoly:
        """Termwise ``V A V^dagger``."""
        v = as_matrix(v)
        return HarmonicPoly(self.dim, {k: v @ a @ v.conj().T for k, a in self._terms.items()})

    def truncate(self, max_degree: int) -> HarmonicPoly:
        return HarmonicPoly(self.dim, {k: a for k, a in self._terms.items() if k[0] <= max_degree})

    def average(self) -> HarmonicPoly:
        """Time average over one period: keeps the ``n = 0`` terms."""
        return HarmonicPoly(self.dim, {k: a for k, a in self._terms.items() if k[1] == 0})

    def deviation(self) -> HarmonicPoly:
        """Deviation from the time average: drops the ``n = 0`` terms."""
        return HarmonicPoly(self.dim, {k: a for k, a in self._terms.items() if k[1] != 0})

    def integrate_deviation(self) -> HarmonicPoly:
        """``G(t) = int_0^t F(s) ds`` for a zero-average ``F``.

        Each ``lam^j e^{i n theta} A`` becomes ``lam^{j+1} (e^{i n theta} - 1) A / (i n)``,
        so ``G`` vanishes at every multiple of the period.
        """
        if any(n == 0 for _, n in self._terms):
            raise NonOscillatoryError("cannot integrate non-oscillatory term")
        out: dict[tuple[int, int], np.ndarray] = {}
        for (j, n), a in self._terms.items():
            c = a / (1j * n)
            out[(j + 1, n)] = out.get((j + 1, n), 0) + c
            out[(j + 1, 0)] = out.get((j + 1, 0), 0) - c
        return HarmonicPoly(self.dim, out)

    # numerics ---------------------------------------------------------------

    def evaluate(self, omega_cap: float, t: float) -> np.ndarray:
        """Substitute ``lam = 1/Omega`` and ``theta = Omega t``."""
        return self.evaluate_many(omega_cap, np.array([t], dtype=float))[0]

    def evaluate_many(self, omega_cap: float, ts) -> np.ndarray:
        """Vectorised :meth:`evaluate` returning shape ``(len(ts), d, d)``."""
        if not omega_cap > 0:
            raise ValueError(f"frequency must be positive, got {omega_cap}")
        ts = np.asarray(ts, dtype=float)
        out = np.zeros((ts.size, self.dim, self.dim), dtype=complex)
        theta = omega_cap * ts
        for (j, n), a in self._terms.items():
            w = omega_cap ** (-j) * (np.exp(1j * n * theta) if n else np.ones_like(theta))
            out += w[:, None, None] * a
        return out

    def certified_sup(self, omega_cap: float) -> float:
        """``sum_{j,n} Omega^{-j} ||A[j,n]||``; a rigorous bound on ``sup_t ||F(t)||``."""
        if not omega_cap > 0:
            raise ValueError(f"frequency must be positive, got {omega_cap}")
        return float(sum(omega_cap ** (-j) * operator_norm(a) for (j, _), a in self._terms.items()))

    def sup_norm(self, omega_cap: float, grid_points: int = DEFAULT_GRID) -> tuple[float, float]:
        """Return ``(numeric_sup, certified_bound)`` for ``sup_t ||F(t)||``.

        ``numeric_sup`` is the maximum over a uniform grid of one period;
        ``certified_bound`` follows from the triangle inequality.
        """
        if grid_points < 16:
            raise ValueError("grid_points must be at least 16")
        certified = self.certified_sup(omega_cap)
        if self.is_zero():
            return 0.0, 0.0
        if self.is_constant_in_theta():
            value = operator_norm(self.evaluate(omega_cap, 0.0))
            return value, max(certified, value)
        period = 2 * np.pi / omega_cap
        ts = np.arange(grid_points) * (period / grid_points)
        numeric = float(np.max(operator_norms(self.evaluate_many(omega_cap, ts))))
        return numeric, certified
