"""Reference propagation of ``dU/dt = -i H(t) U`` for periodic ``H(t)``.

Two fixed-step schemes are available: the exponential midpoint rule (order 2)
and the fourth-order commutator-free Magnus scheme built on the two-point
Gauss-Legendre rule. Requested output times are hit exactly by shortening the
step that would overshoot them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from floqbound.fourier_poly import HarmonicPoly
from floqbound.linalg import (
    NotHermitianError,
    as_matrix,
    expm_hermitian_batch,
    expm_skew_hermitian,
    operator_norms,
)

METHODS = ("exp-midpoint-2", "magnus-cf4")
METHOD_ALIASES = {"exp2": "exp-midpoint-2", "cf4": "magnus-cf4"}
METHOD_ORDER = {"exp-midpoint-2": 2, "magnus-cf4": 4}
STEPS_PER_SCALE = 64
_CHUNK = 4096

_SQRT3 = math.sqrt(3.0)
_GL_NODES = (0.5 - _SQRT3 / 6, 0.5 + _SQRT3 / 6)
_CF4_A1 = (3 - 2 * _SQRT3) / 12
_CF4_A2 = (3 + 2 * _SQRT3) / 12


def canonical_method(name: str) -> str:
    name = METHOD_ALIASES.get(name, name)
    if name not in METHODS:
        raise ValueError(f"unknown method {name!r}; expected one of {METHODS + tuple(METHOD_ALIASES)}")
    return name


@dataclass(frozen=True)
class PropagationSettings:
    """Integrator choice. ``step=None`` selects ``min(T, 1/||H||_sup) / 64``."""

    step: float | None = None
    method: str = "magnus-cf4"
    richardson: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", canonical_method(self.method))
        if self.step is not None and not (math.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be positive, got {self.step}")

    def resolve_step(self, h: HarmonicPoly, omega_cap: float) -> float:
        if self.step is not None:
            return float(self.step)
        return default_step(h, omega_cap)


def default_step(h: HarmonicPoly, omega_cap: float) -> float:
    period = 2 * math.pi / omega_cap
    scale, _ = h.sup_norm(omega_cap, 256)
    horizon = period if scale <= 0 else min(period, 1.0 / scale)
    return horizon / STEPS_PER_SCALE


class Trajectory(NamedTuple):
    times: np.ndarray
    unitaries: np.ndarray
    error_estimate: np.ndarray | None = None


class DistanceCurve(NamedTuple):
    times: np.ndarray
    distances: np.ndarray
    error_estimate: np.ndarray | None = None


def _check_generator(h: HarmonicPoly, omega_cap: float) -> None:
    if not omega_cap > 0:
        raise ValueError(f"frequency must be positive, got {omega_cap}")
    if not h.is_hermitian_function():
        raise NotHermitianError("Hamiltonian series is not Hermitian")


def _step_propagators(h, omega_cap, t0, dt, method):
    if method == "exp-midpoint-2":
        return expm_hermitian_batch(h.evaluate_many(omega_cap, t0 + 0.5 * dt), dt)
    h1 = h.evaluate_many(omega_cap, t0 + _GL_NODES[0] * dt)
    h2 = h.evaluate_many(omega_cap, t0 + _GL_NODES[1] * dt)
    early = expm_hermitian_batch(_CF4_A2 * h1 + _CF4_A1 * h2, dt)
    late = expm_hermitian_batch(_CF4_A1 * h1 + _CF4_A2 * h2, dt)
    return late @ early


def _node_grid(targets: np.ndarray, step: float) -> np.ndarray:
    t_end = float(targets[-1]) if targets.size else 0.0
    n = int(math.ceil(t_end / step - 1e-9)) if t_end > 0 else 0
    uniform = np.arange(n + 1) * step
    uniform = uniform[uniform < t_end]
    return np.union1d(uniform, np.concatenate([[0.0], targets]))


def _propagate_nodes(h, omega_cap, nodes, method, keep):
    """Unitaries at ``nodes[keep]``; ``keep`` is a boolean mask over ``nodes``."""
    d = h.dim
    u = np.eye(d, dtype=complex)
    out = np.empty((int(np.count_nonzero(keep)), d, d), dtype=complex)
    slot = 0
    if keep[0]:
        out[0] = u
        slot = 1
    t0_all, dt_all = nodes[:-1], np.diff(nodes)
    for start in range(0, dt_all.size, _CHUNK):
        steps = _step_propagators(
            h, omega_cap, t0_all[start : start + _CHUNK], dt_all[start : start + _CHUNK], method
        )
        flags = keep[start + 1 : start + 1 + _CHUNK]
        for p, flag in zip(steps, flags):
            u = p @ u
            if flag:
                out[slot] = u
                slot += 1
    return out


def _solve(h, omega_cap, targets, step, method):
    nodes = _node_grid(targets, step)
    keep = np.isin(nodes, targets)
    at_nodes = _propagate_nodes(h, omega_cap, nodes, method, keep)
    # map back in case of duplicate targets
    idx = np.searchsorted(nodes[keep], targets)
    return at_nodes[idx]


def _validate_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float).ravel()
    if times.size == 0:
        raise ValueError("no output times requested")
    if np.any(times < 0) or np.any(np.diff(times) < 0) or not np.all(np.isfinite(times)):
        raise ValueError("times must be finite, non-negative and sorted")
    return times


def propagate_at(
    h: HarmonicPoly, omega_cap: float, times, s: PropagationSettings | None = None
) -> Trajectory:
    """Exact propagator ``U(t)`` at the requested (sorted) times."""
    s = s or PropagationSettings()
    _check_generator(h, omega_cap)
    times = _validate_times(times)
    step = s.resolve_step(h, omega_cap)
    coarse = _solve(h, omega_cap, times, step, s.method)
    if not s.richardson:
        return Trajectory(times, coarse)
    fine = _solve(h, omega_cap, times, step / 2, s.method)
    return Trajectory(times, fine, operator_norms(coarse - fine))


def propagate_exact(
    h: HarmonicPoly, omega_cap: float, t_final: float, s: PropagationSettings | None = None
) -> Trajectory:
    """Propagator on the full step grid ``0, dt, 2 dt, ..., t_final``."""
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    s = s or PropagationSettings()
    _check_generator(h, omega_cap)
    step = s.resolve_step(h, omega_cap)
    n = max(1, int(math.ceil(t_final / step - 1e-9))) if t_final > 0 else 0
    times = np.minimum(np.arange(n + 1) * step, t_final) if n else np.array([0.0])
    times[-1] = t_final
    return propagate_at(h, omega_cap, times, s)


def effective_unitaries(h_eff, times) -> np.ndarray:
    h_eff = as_matrix(h_eff)
    # validates Hermiticity once
    expm_skew_hermitian(h_eff, 0.0)
    w, v = np.linalg.eigh(0.5 * (h_eff + h_eff.conj().T))
    phases = np.exp(-1j * np.outer(np.asarray(times, dtype=float), w))
    return (v[None] * phases[:, None, :]) @ v.conj().T[None]


def distances(trajectory: Trajectory, h_eff) -> np.ndarray:
    """``||U(t) - exp(-i H_eff t)||`` along a trajectory."""
    return operator_norms(trajectory.unitaries - effective_unitaries(h_eff, trajectory.times))


def distance_curve(
    h: HarmonicPoly,
    omega_cap: float,
    h_eff,
    times,
    s: PropagationSettings | None = None,
) -> DistanceCurve:
    traj = propagate_at(h, omega_cap, times, s)
    return DistanceCurve(traj.times, distances(traj, h_eff), traj.error_estimate)
