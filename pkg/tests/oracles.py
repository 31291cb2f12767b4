"""Independent reference computations used by the tests.

Nothing here touches the harmonic algebra or the propagator under test.
"""

import math

import numpy as np
from scipy.integrate import solve_ivp


def taylor_expm(a: np.ndarray, terms: int = 64) -> np.ndarray:
    """exp(a) by scaling-and-squaring around a plain Taylor sum."""
    norm = np.linalg.norm(a, 1)
    s = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0.5 else 0
    b = a / 2**s
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ b / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


class TrigModel:
    """H(t) = H0 + sum_n (e^{i n W t} A_n + h.c.), evaluated pointwise."""

    def __init__(self, h0, harmonics, omega_cap):
        self.h0 = np.asarray(h0, dtype=complex)
        self.harmonics = {n: np.asarray(a, dtype=complex) for n, a in harmonics.items()}
        self.omega_cap = omega_cap

    def __call__(self, t):
        out = self.h0.copy()
        for n, a in self.harmonics.items():
            ph = np.exp(1j * n * self.omega_cap * t)
            out = out + ph * a + np.conj(ph) * a.conj().T
        return out

    @property
    def period(self):
        return 2 * math.pi / self.omega_cap


def random_trig_model(rng, d, n_harm=2, omega_cap=None, scale=1.0):
    def herm():
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        return scale * (m + m.conj().T) / 2

    def gen():
        return scale * (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / 2

    w = rng.uniform(2.0, 8.0) if omega_cap is None else omega_cap
    return TrigModel(herm(), {n: gen() for n in range(1, n_harm + 1)}, w)


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def magnus_first_two(model: TrigModel, nodes: int = 80):
    """Floquet-Magnus terms (1/T) int H and (1/2iT) int int_{t2<t1} [H(t1), H(t2)] by Gauss-Legendre."""
    T = model.period
    x, w = _gauss(nodes)
    t1 = 0.5 * T * (x + 1)
    w1 = 0.5 * T * w
    hs = np.array([model(t) for t in t1])
    h0 = np.einsum("k,kij->ij", w1, hs) / T
    h1 = np.zeros_like(h0)
    for ta, wa, ha in zip(t1, w1, hs):
        t2 = 0.5 * ta * (x + 1)
        w2 = 0.5 * ta * w
        inner = np.einsum("k,kij->ij", w2, np.array([model(t) for t in t2]))
        h1 = h1 + wa * (ha @ inner - inner @ ha)
    h1 = h1 / (2j * T)
    return h0, h1


def reference_unitary(hfun, t_final, times=None, rtol=1e-12, atol=1e-12):
    """dU/dt = -i H(t) U by an adaptive explicit Runge-Kutta method."""
    d = hfun(0.0).shape[0]

    def rhs(t, y):
        return (-1j * hfun(t) @ y.reshape(d, d)).ravel()

    sol = solve_ivp(
        rhs,
        (0.0, t_final),
        np.eye(d, dtype=complex).ravel(),
        t_eval=times,
        method="DOP853",
        rtol=rtol,
        atol=atol,
    )
    return sol.y.T.reshape(-1, d, d)
