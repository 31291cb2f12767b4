"""Order-by-order effective Hamiltonians from iterated integration by parts.

For ``H1 = H(t)`` and a constant ``H2 = H_eff`` the difference of the two
evolutions is

    U(t) - U_eff(t) = sum_{k=1}^{L+1} (-i)^k S_t^(k) U_eff(t)
        - i int_0^t U(t) U(s)^dag [ sum_{k=0}^{L} (-i)^k avg K(S^(k))
                                    + (-i)^{L+1} K_s(S_s^(L+1)) ] U_eff(s) ds

with ``K_t(A) = H(t) A - A H_eff``, ``S^(0) = 1`` and
``S^(k) = int_0^t [K(S^(k-1)) - avg K(S^(k-1))]``. The ``H_eff^(l)`` are fixed
so that the averaged bracket vanishes through order ``lam^L`` (``lam = 1/Omega``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from floqbound.fourier_poly import DEFAULT_GRID, HarmonicPoly
from floqbound.linalg import NotHermitianError, hermiticity_defect, operator_norm

HEFF_HERMITIAN_TOL = 1e-10


def k_apply(h1: HarmonicPoly, h_eff: HarmonicPoly, a: HarmonicPoly) -> HarmonicPoly:
    """``K(A) = H1 A - A H_eff`` for a theta-independent ``H_eff``."""
    if not h_eff.is_constant_in_theta():
        raise ValueError("effective Hamiltonian must be time independent")
    return h1.mul(a) - a.mul(h_eff)


def _iterate(h: HarmonicPoly, h_eff: HarmonicPoly, depth: int):
    """Actions ``S^(0..depth)``, their ``K`` images and averages."""
    actions = [HarmonicPoly.identity(h.dim)]
    ks = [k_apply(h, h_eff, actions[0])]
    avgs = [ks[0].average()]
    for _ in range(depth):
        s = ks[-1].deviation().integrate_deviation()
        actions.append(s)
        ks.append(k_apply(h, h_eff, s))
        avgs.append(ks[-1].average())
    return actions, ks, avgs


def _weighted_sum(polys, dim: int) -> HarmonicPoly:
    total = HarmonicPoly.zero(dim)
    for k, p in enumerate(polys):
        total = total + p.scale((-1j) ** k)
    return total


@dataclass(frozen=True)
class EffectiveResult:
    """Output of :func:`derive_effective`.

    ``h_eff_terms[k]`` multiplies ``Omega**-k`` where ``Omega`` is the angular
    frequency of the input series. ``actions`` holds ``S^(0..L+1)``,
    ``k_of_actions`` the matching ``K(S^(k))`` and ``k_averages`` the
    averages ``avg K(S^(k))`` for ``k <= L``.
    """

    order: int
    h_eff_terms: list[np.ndarray]
    actions: list[HarmonicPoly]
    k_of_actions: list[HarmonicPoly]
    k_averages: list[HarmonicPoly]

    @property
    def dim(self) -> int:
        return self.h_eff_terms[0].shape[0]

    def h_eff_poly(self) -> HarmonicPoly:
        return HarmonicPoly.lambda_series(self.h_eff_terms)

    def h_eff(self, omega_cap: float, order: int | None = None) -> np.ndarray:
        """``sum_{k<=order} Omega^-k H_eff^(k)`` as a matrix."""
        order = self.order if order is None else order
        if not 0 <= order <= self.order:
            raise ValueError(f"order {order} not available (derived up to {self.order})")
        out = sum(omega_cap ** (-k) * self.h_eff_terms[k] for k in range(order + 1))
        return 0.5 * (out + out.conj().T)

    def condition_residual(self) -> HarmonicPoly:
        """``sum_{k=0}^{L} (-i)^k avg K(S^(k))``; vanishes through ``lam^L``."""
        return _weighted_sum(self.k_averages, self.dim)

    def residual_by_degree(self) -> dict[int, float]:
        res = self.condition_residual()
        return {j: operator_norm(res.coefficient(j)) for j in range(res.max_degree() + 1)}

    def action_sum(self) -> HarmonicPoly:
        """``sum_{k=1}^{L+1} (-i)^k S^(k)``."""
        total = HarmonicPoly.zero(self.dim)
        for k in range(1, self.order + 2):
            total = total + self.actions[k].scale((-1j) ** k)
        return total


def derive_effective(h: HarmonicPoly, order: int) -> EffectiveResult:
    """Effective Hamiltonian terms ``H_eff^(0..order)`` of the periodic ``h``.

    ``H_eff^(l)`` enters the ``lam^l`` coefficient of the averaged condition only
    through ``avg K(S^(0)) = avg H - H_eff`` (every other occurrence carries at
    least one extra power of ``lam``), so it equals that coefficient evaluated
    with ``H_eff^(l)`` set to zero.
    """
    if int(order) != order or order < 0:
        raise ValueError(f"order must be a non-negative integer, got {order}")
    order = int(order)
    if not h.is_hermitian_function():
        raise NotHermitianError("input series does not describe a Hermitian operator")
    if h.max_degree() != 0:
        raise ValueError("input Hamiltonian must not depend on the formal inverse frequency")
    d = h.dim

    if h.deviation().is_zero():
        h0 = h.coefficient(0, 0)
        terms = [h0] + [np.zeros((d, d), dtype=complex) for _ in range(order)]
        h_eff = HarmonicPoly.lambda_series(terms)
        actions, ks, avgs = _iterate(h, h_eff, 0)
        zero = HarmonicPoly.zero(d)
        return EffectiveResult(
            order,
            terms,
            actions + [zero] * (order + 1),
            ks + [zero] * (order + 1),
            avgs + [zero] * order,
        )

    terms: list[np.ndarray] = []
    for l in range(order + 1):
        known = HarmonicPoly(d, {(k, 0): c for k, c in enumerate(terms)})
        _, _, avgs = _iterate(h, known, l)
        c = _weighted_sum(avgs, d).coefficient(l, 0)
        defect = hermiticity_defect(c)
        if defect > HEFF_HERMITIAN_TOL * max(1.0, float(np.max(np.abs(c)))):
            raise NotHermitianError(f"H_eff^({l}) is not Hermitian (defect {defect:.3e})")
        terms.append(0.5 * (c + c.conj().T))

    h_eff = HarmonicPoly.lambda_series(terms)
    actions, ks, avgs = _iterate(h, h_eff, order + 1)
    return EffectiveResult(order, terms, actions, ks, avgs[: order + 1])


@dataclass(frozen=True)
class BoundIngredients:
    """The three norms that enter the time-linear bound.

    ``*_certified`` values are rigorous (triangle inequality over Fourier
    coefficients); the plain values are grid maxima.
    """

    sup_actions: float
    sup_actions_certified: float
    avg_residual: float
    sup_k_tail: float
    sup_k_tail_certified: float
    order: int = 0


def bound_ingredients(r: EffectiveResult, omega_cap: float, grid: int = DEFAULT_GRID) -> BoundIngredients:
    if not omega_cap > 0:
        raise ValueError(f"frequency must be positive, got {omega_cap}")
    sa, sa_cert = r.action_sum().sup_norm(omega_cap, grid)
    residual = operator_norm(r.condition_residual().evaluate(omega_cap, 0.0))
    kt, kt_cert = r.k_of_actions[r.order + 1].sup_norm(omega_cap, grid)
    return BoundIngredients(sa, sa_cert, residual, kt, kt_cert, r.order)


@dataclass(frozen=True)
class BoundCurve:
    """Upper bound ``b(t) = offset + slope * t`` on ``||U(t) - U_eff(t)||``."""

    offset: float
    slope: float
    order: int
    method: str
    validity: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("bounds are defined for t >= 0")
        out = self.offset + self.slope * t
        return float(out) if out.ndim == 0 else out


def generic_bound(b: BoundIngredients) -> tuple[BoundCurve, BoundCurve]:
    """``(numeric, certified)`` curves from the norm of the difference formula."""
    numeric = BoundCurve(b.sup_actions, b.avg_residual + b.sup_k_tail, b.order, "generic-numeric")
    certified = BoundCurve(
        b.sup_actions_certified,
        b.avg_residual + b.sup_k_tail_certified,
        b.order,
        "generic-certified",
    )
    return numeric, certified
