"""Semiclassical Rabi model ``H(t) = (w0/2) Z + g cos(w t) X``.

In the frame rotating with ``(w/2) Z`` the Hamiltonian oscillates at
``Omega = 2 w``. :func:`floqbound.effective.derive_effective` therefore returns
coefficients of ``(2 w)**-k``; :func:`to_omega_normalized` converts them to
the ``w**-k`` convention used by the closed forms below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from floqbound.effective import BoundCurve
from floqbound.fourier_poly import HarmonicPoly
from floqbound.linalg import SIGMA_MINUS, SIGMA_PLUS, X, Z

RESONANCE_TOL = 1e-12
NONRESONANT_MAX_RATIO = 2 * (5 - 2 * math.sqrt(5))
THIRD_ORDER_MAX_RATIO = 2 * math.sqrt(2)


class OutsideValidityError(ValueError):
    """Raised when a closed-form bound is requested outside its proven region."""


@dataclass(frozen=True)
class RabiParams:
    g: float
    omega: float
    omega0: float | None = None

    def __post_init__(self):
        if self.omega0 is None:
            object.__setattr__(self, "omega0", self.omega)
        for name in ("g", "omega", "omega0"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")

    @classmethod
    def detuned(cls, g: float, omega: float, delta: float) -> RabiParams:
        return cls(g, omega, omega + delta)

    @property
    def delta(self) -> float:
        return self.omega0 - self.omega

    @property
    def is_resonant(self) -> bool:
        return abs(self.delta) <= RESONANCE_TOL * self.omega

    @property
    def period(self) -> float:
        """Period of the rotating-frame Hamiltonian, ``pi / w``."""
        return math.pi / self.omega

    @property
    def omega_cap(self) -> float:
        return 2.0 * self.omega


def rotating_frame_hamiltonian(p: RabiParams) -> tuple[HarmonicPoly, float]:
    """``(delta/2) Z + (g/2) X + (g/2)(e^{2iwt} s+ + e^{-2iwt} s-)`` and ``Omega = 2w``."""
    h = HarmonicPoly.from_harmonics(
        2,
        {
            0: 0.5 * p.delta * Z + 0.5 * p.g * X,
            1: 0.5 * p.g * SIGMA_PLUS,
            -1: 0.5 * p.g * SIGMA_MINUS,
        },
    )
    return h, p.omega_cap


def to_omega_normalized(terms) -> list[np.ndarray]:
    """Rescale coefficients of ``(2w)^-k`` into coefficients of ``w^-k``."""
    return [np.asarray(c) / 2.0**k for k, c in enumerate(terms)]


def closed_form_heff(p: RabiParams, order: int) -> np.ndarray:
    """RWA (0), Bloch-Siegert (1) and third-order (2) Hamiltonians at resonance."""
    if order not in (0, 1, 2):
        raise ValueError(f"closed forms exist for orders 0, 1, 2; got {order}")
    if order == 0:
        return 0.5 * p.g * X + 0.5 * p.delta * Z
    if not p.is_resonant:
        raise OutsideValidityError("closed form defined at resonance only")
    g, w = p.g, p.omega
    h = 0.5 * g * X - g**2 / (8 * w) * Z
    if order == 2:
        h = h - g**3 / (32 * w**2) * X
    return h


def _require_resonance(p: RabiParams, what: str) -> None:
    if not p.is_resonant:
        raise OutsideValidityError(f"{what} bound is stated for resonant driving only")


def rwa_bound_curve(p: RabiParams) -> BoundCurve:
    _require_resonance(p, "RWA")
    g, w = p.g, p.omega
    return BoundCurve(g / (2 * w), g**2 / (4 * w), 0, "closed-form", "resonant")


def bs_resonant_bound_curve(p: RabiParams) -> BoundCurve:
    _require_resonance(p, "Bloch-Siegert (resonant)")
    g, w = p.g, p.omega
    offset = g / (2 * w) * math.sqrt(1 + 3 * g**2 / (16 * w**2) + g**4 / (256 * w**4))
    slope = 3 * g**3 / (32 * w**2) * (1 + g**2 / (24 * w**2))
    return BoundCurve(offset, slope, 1, "closed-form", "resonant")


def bs_nonresonant_bound_curve(p: RabiParams) -> BoundCurve:
    g, w, d = p.g, p.omega, p.delta
    r = d / w
    if not (-1 < r <= NONRESONANT_MAX_RATIO):
        raise OutsideValidityError(
            f"outside certified region: delta/omega = {r:.6g} not in (-1, {NONRESONANT_MAX_RATIO:.6g}]"
        )
    q2 = (g / w) ** 2
    dg2 = (d / g) ** 2
    offset = g / (2 * w) * math.sqrt(
        (1 - r / 2) ** 2 + 3 * q2 / 16 * (1 - 2 * r / 3 + r**2 / 12) + q2**2 / 256
    )
    first = g**3 / (32 * w**2) * math.sqrt(1 + 4 * dg2)
    second = g**3 / (16 * w**2) * math.sqrt(
        9
        + 4 * r
        + 4 * r**2
        + r**3 / 2
        + r**4 / 16
        + q2 / 8 * (5 + r + r**2 / 4)
        + q2**2 / 256
        + 4 * dg2 * (7 + 4 * dg2 + r + 3 * r**2 / 4)
    )
    return BoundCurve(offset, first + second, 1, "closed-form", "-1 < delta/omega <= 2(5-2*sqrt5)")


def third_order_bound_curve(p: RabiParams) -> BoundCurve:
    _require_resonance(p, "third-order")
    g, w = p.g, p.omega
    if not g / w < THIRD_ORDER_MAX_RATIO:
        raise OutsideValidityError(
            f"outside certified region: g/omega = {g / w:.6g} >= 2*sqrt(2)"
        )
    x = g / (4 * w)
    offset = g / (2 * w) * math.sqrt(
        1 + 5 * x**2 + 4 * x**4 - x**6 + 13 * x**8 - 6 * x**10 + x**12
    )
    inner = math.sqrt(1 + x**2 + 2 * x**4 + x**6) + 2 * math.sqrt(
        1 - 3 * x**2 + 14 * x**4 - 19 * x**6 + 18 * x**8 - 7 * x**10 + x**12
    )
    slope = g**4 / (2 * (4 * w) ** 3) * inner
    return BoundCurve(offset, slope, 2, "closed-form", "resonant, g/omega < 2*sqrt(2)")


def closed_form_bound_curve(p: RabiParams, order: int) -> BoundCurve:
    """Closed-form bound for the order-``order`` effective Hamiltonian."""
    if order == 0:
        return rwa_bound_curve(p)
    if order == 1:
        return bs_resonant_bound_curve(p) if p.is_resonant else bs_nonresonant_bound_curve(p)
    if order == 2:
        return third_order_bound_curve(p)
    raise OutsideValidityError(f"no closed-form bound for order {order}")


def _at(curve_fn, p: RabiParams, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    return curve_fn(p)(t)


def bound_rwa(p: RabiParams, t):
    return _at(rwa_bound_curve, p, t)


def bound_bs_resonant(p: RabiParams, t):
    return _at(bs_resonant_bound_curve, p, t)


def bound_bs_nonresonant(p: RabiParams, t):
    return _at(bs_nonresonant_bound_curve, p, t)


def bound_third_resonant(p: RabiParams, t):
    return _at(third_order_bound_curve, p, t)
