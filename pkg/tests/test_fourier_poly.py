import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad_vec

from floqbound.fourier_poly import HarmonicPoly, NonOscillatoryError
from floqbound.linalg import I2, SIGMA_MINUS, SIGMA_PLUS, X, Y, Z, DimensionError, operator_norm

G, W = 1.0, 5.0  # Rabi drive strength and frequency; series frequency is 2W


def rabi_series(g=G, delta=0.0):
    return HarmonicPoly.from_harmonics(
        2, {0: 0.5 * g * X + 0.5 * delta * Z, 1: 0.5 * g * SIGMA_PLUS, -1: 0.5 * g * SIGMA_MINUS}
    )


def rabi_pointwise(t, g=G, w=W, delta=0.0):
    return 0.5 * delta * Z + 0.5 * g * X + 0.5 * g * (np.cos(2 * w * t) * X - np.sin(2 * w * t) * Y)


def random_poly(seed, d=2, max_deg=2, max_n=2, hermitian=False):
    rng = np.random.default_rng(seed)
    terms = {}
    for j in range(max_deg + 1):
        for n in range(-max_n, max_n + 1):
            if rng.random() < 0.6:
                terms[(j, n)] = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    if hermitian:
        terms = {k: a for k, a in terms.items() if k[1] >= 0}
        for (j, n), a in list(terms.items()):
            if n == 0:
                terms[(j, 0)] = a + a.conj().T
            else:
                terms[(j, -n)] = a.conj().T
    if not terms:
        terms[(0, 1)] = np.eye(d)
    return HarmonicPoly(d, terms)


seeds = st.integers(0, 2**32 - 1)


# construction ----------------------------------------------------------------


def test_constant_series():
    h0 = 0.3 * X + 0.1 * Z
    f = HarmonicPoly.from_harmonics(2, {0: h0})
    for t in (0.0, 0.4, 3.3):
        assert np.allclose(f.evaluate(7.0, t), h0)


@pytest.mark.parametrize("t", np.linspace(0, 1.3, 7))
def test_rabi_series_matches_rotating_frame(t):
    assert np.allclose(rabi_series().evaluate(2 * W, t), rabi_pointwise(t), atol=1e-14)


def test_detuning_adds_z_to_harmonic_zero():
    f = rabi_series(delta=0.4)
    assert np.allclose(f.coefficient(0, 0), 0.5 * X + 0.2 * Z)
    assert np.allclose(f.evaluate(2 * W, 0.77), rabi_pointwise(0.77, delta=0.4), atol=1e-14)


def test_from_harmonics_dimension_mismatch():
    with pytest.raises(DimensionError):
        HarmonicPoly.from_harmonics(2, {0: np.eye(3)})


def test_pruning_drops_dust():
    f = HarmonicPoly(2, {(0, 0): 1e-16 * X, (0, 1): X})
    assert len(f) == 1


def test_hermitian_flag():
    assert rabi_series().is_hermitian_function()
    assert not HarmonicPoly.from_harmonics(2, {1: SIGMA_PLUS}).is_hermitian_function()


# algebra -----------------------------------------------------------------------


def test_mul_identity(rng):
    g = random_poly(5)
    assert HarmonicPoly.identity(2).mul(g).terms.keys() == g.terms.keys()
    for k, a in HarmonicPoly.identity(2).mul(g):
        assert np.allclose(a, g.coefficient(*k))


def test_mul_exponent_arithmetic():
    f = HarmonicPoly(2, {(0, 1): SIGMA_PLUS})
    g = HarmonicPoly(2, {(0, -1): SIGMA_MINUS})
    p = f.mul(g)
    assert list(p.terms) == [(0, 0)]
    assert np.allclose(p.coefficient(0, 0), SIGMA_PLUS @ SIGMA_MINUS)


def test_mul_rabi_with_first_action_pointwise():
    h = rabi_series()
    s1 = h.deviation().integrate_deviation()
    prod = h.mul(s1)
    ts = np.linspace(0, np.pi / W, 64, endpoint=False)
    for t in ts:
        s1_closed = G / (4 * W) * (np.sin(2 * W * t) * X - (1 - np.cos(2 * W * t)) * Y)
        assert np.allclose(prod.evaluate(2 * W, t), rabi_pointwise(t) @ s1_closed, atol=1e-14)


def test_mul_dimension_mismatch():
    with pytest.raises(DimensionError):
        HarmonicPoly.identity(2).mul(HarmonicPoly.identity(3))


def test_average_examples():
    assert np.allclose(rabi_series().average().coefficient(0, 0), 0.5 * G * X)
    assert rabi_series().average().is_constant_in_theta()
    assert HarmonicPoly(2, {(0, 1): X}).average().is_zero()
    assert np.allclose(HarmonicPoly.constant(Y).average().coefficient(0, 0), Y)


def test_deviation_examples():
    assert HarmonicPoly.constant(Z).deviation().is_zero()
    dev = rabi_series().deviation()
    assert set(dev.terms) == {(0, 1), (0, -1)}
    assert np.allclose(dev.coefficient(0, 1), 0.5 * G * SIGMA_PLUS)
    assert np.allclose(dev.coefficient(0, -1), 0.5 * G * SIGMA_MINUS)


@given(seeds)
def test_average_of_deviation_vanishes(seed):
    assert random_poly(seed).deviation().average().is_zero()


def test_integrate_single_harmonic():
    a = np.array([[1, 2], [3, 4]], dtype=complex)
    g = HarmonicPoly(2, {(0, 1): a}).integrate_deviation()
    assert set(g.terms) == {(1, 1), (1, 0)}
    assert np.allclose(g.coefficient(1, 1), -1j * a)
    assert np.allclose(g.coefficient(1, 0), 1j * a)


@pytest.mark.parametrize("t", np.linspace(0, 0.9, 10))
def test_first_action_closed_form(t):
    s1 = rabi_series().deviation().integrate_deviation()
    closed = G / (4 * W) * (np.sin(2 * W * t) * X - (1 - np.cos(2 * W * t)) * Y)
    assert np.allclose(s1.evaluate(2 * W, t), closed, atol=1e-15)


def test_integrate_rejects_average_part():
    with pytest.raises(NonOscillatoryError, match="non-oscillatory"):
        rabi_series().integrate_deviation()


@given(seeds)
def test_integral_starts_at_zero(seed):
    g = random_poly(seed).deviation()
    if g.is_zero():
        return
    assert np.allclose(g.integrate_deviation().evaluate(3.0, 0.0), 0, atol=1e-13)


# evaluation and norms ----------------------------------------------------------


def test_evaluate_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        rabi_series().evaluate(0.0, 1.0)


def test_first_action_vanishes_at_period():
    s1 = rabi_series().deviation().integrate_deviation()
    assert np.allclose(s1.evaluate(2 * W, np.pi / W), 0, atol=1e-15)


def test_first_action_half_period_against_quadrature():
    s1 = rabi_series().deviation().integrate_deviation()
    half = np.pi / (2 * W)
    quad, _ = quad_vec(lambda s: rabi_pointwise(s) - 0.5 * G * X, 0.0, half, epsabs=1e-14)
    assert np.allclose(quad, -0.1 * Y, atol=1e-13)
    assert np.allclose(s1.evaluate(2 * W, half), quad, atol=1e-13)


def test_sup_norm_constant():
    a = 0.3 * X - 0.7j * Y
    num, cert = HarmonicPoly.constant(a).sup_norm(1.0)
    assert num == pytest.approx(operator_norm(a))
    assert cert == pytest.approx(operator_norm(a))


def test_sup_norm_first_action():
    # ||S1(t)|| = g/(4w) sqrt(2 - 2 cos 2wt), maximal g/(2w) at theta = pi;
    # termwise triangle bound: three terms of norm (g/2)/Omega each.
    s1 = rabi_series().deviation().integrate_deviation()
    num, cert = s1.sup_norm(2 * W, 4096)
    ts = np.linspace(0, np.pi / W, 20001)
    dense = max(G / (4 * W) * np.sqrt(2 - 2 * np.cos(2 * W * ts)))
    assert num == pytest.approx(0.1, abs=1e-12)
    assert num == pytest.approx(dense, abs=1e-9)
    assert cert == pytest.approx(0.15, abs=1e-14)


def test_sup_norm_two_harmonics():
    a = np.array([[0.2, 1.0], [0.0, -0.5]], dtype=complex)
    f = HarmonicPoly(2, {(0, 1): a, (0, 2): a})
    num, cert = f.sup_norm(4.0, 256)
    assert cert == pytest.approx(2 * operator_norm(a))
    assert cert >= num - 1e-10


def test_sup_norm_grid_minimum():
    with pytest.raises(ValueError):
        rabi_series().sup_norm(1.0, 8)


# properties --------------------------------------------------------------------


@settings(max_examples=40)
@given(seeds, seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(s1, s2, a, b):
    f, g = random_poly(s1), random_poly(s2)
    lhs = (f.scale(a) + g.scale(b)).average()
    rhs = f.average().scale(a) + g.average().scale(b)
    assert np.allclose((lhs - rhs).evaluate(2.0, 0.3), 0, atol=1e-12)
    fd, gd = f.deviation(), g.deviation()
    lhs = (fd.scale(a) + gd.scale(b)).integrate_deviation()
    rhs = fd.integrate_deviation().scale(a) + gd.integrate_deviation().scale(b)
    for t in (0.1, 1.7):
        assert np.allclose(lhs.evaluate(2.0, t), rhs.evaluate(2.0, t), atol=1e-12)


@settings(max_examples=40)
@given(seeds, seeds, st.floats(0.5, 20), st.floats(-5, 5))
def test_evaluate_is_multiplicative(s1, s2, omega, t):
    f, g = random_poly(s1, d=3), random_poly(s2, d=3)
    lhs = f.mul(g).evaluate(omega, t)
    rhs = f.evaluate(omega, t) @ g.evaluate(omega, t)
    assert np.allclose(lhs, rhs, atol=1e-11 * max(1.0, np.abs(rhs).max()))


@settings(max_examples=40)
@given(seeds, st.floats(0.5, 20))
def test_integral_vanishes_at_multiples_of_period(seed, omega):
    g = random_poly(seed).deviation()
    if g.is_zero():
        return
    G_ = g.integrate_deviation()
    for m in range(4):
        assert np.allclose(G_.evaluate(omega, m * 2 * np.pi / omega), 0, atol=1e-12)


@settings(max_examples=30)
@given(seeds, st.floats(1.0, 10.0), st.floats(0.0, 3.0))
def test_integral_derivative_recovers_integrand(seed, omega, t):
    f = random_poly(seed).deviation()
    if f.is_zero():
        return
    G_ = f.integrate_deviation()
    h = 1e-6
    fd = (G_.evaluate(omega, t + h) - G_.evaluate(omega, t - h)) / (2 * h)
    assert np.allclose(fd, f.evaluate(omega, t), atol=1e-6 * max(1.0, np.abs(fd).max()))


@settings(max_examples=30)
@given(seeds, st.floats(0.0, 5.0))
def test_hermitian_flag_preserved(seed, t):
    f = random_poly(seed, hermitian=True)
    assert f.is_hermitian_function()
    assert f.average().is_hermitian_function()
    assert f.deviation().is_hermitian_function()
    m = f.mul(f).evaluate(3.0, t)
    assert np.allclose(m, m.conj().T, atol=1e-10)
