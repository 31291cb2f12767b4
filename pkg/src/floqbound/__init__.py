"""Effective Hamiltonians and rigorous error bounds for time-periodic Hamiltonians.

The effective Hamiltonian of a periodic ``H(t)`` is built order by order through
iterated integration by parts of the Duhamel formula; every order comes with an
explicit, time-linear bound on ``||U(t) - exp(-i H_eff t)||``.
"""

from floqbound.linalg import expm_skew_hermitian, operator_norm
from floqbound.fourier_poly import HarmonicPoly
from floqbound.effective import (
    BoundCurve,
    BoundIngredients,
    EffectiveResult,
    bound_ingredients,
    derive_effective,
    generic_bound,
)
from floqbound.propagator import PropagationSettings, distance_curve, propagate_exact
from floqbound.rabi import RabiParams, rotating_frame_hamiltonian

__version__ = "0.1.0"

__all__ = [
    "BoundCurve",
    "BoundIngredients",
    "EffectiveResult",
    "HarmonicPoly",
    "PropagationSettings",
    "RabiParams",
    "bound_ingredients",
    "derive_effective",
    "distance_curve",
    "expm_skew_hermitian",
    "generic_bound",
    "operator_norm",
    "propagate_exact",
    "rotating_frame_hamiltonian",
]
