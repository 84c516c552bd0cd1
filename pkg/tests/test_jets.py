import numpy as np
import pytest
from hypothesis import given, strategies as st

from tubemass.jets import (Jet2, JetDomainError, SmoothMax, jet_eval, jet_product, log_field,
                           positive_part_squared, real_to_complex_jet, smooth_max, sqrt_field,
                           square_field)
from tubemass.polynomial import Polynomial


def fd_complex_jet(func, z, h=1e-4):
    """Central finite differences in real coordinates, converted to (d/dz, d^2/dz dzbar)."""
    x0 = np.concatenate([z.real, z.imag])
    d = x0.size
    n = d // 2

    def f(x):
        return func(x[:n] + 1j * x[n:])

    grad = np.zeros(d)
    hess = np.zeros((d, d))
    for i in range(d):
        e = np.zeros(d)
        e[i] = h
        grad[i] = (f(x0 + e) - f(x0 - e)) / (2 * h)
        for j in range(d):
            e2 = np.zeros(d)
            e2[j] = h
            hess[i, j] = (f(x0 + e + e2) - f(x0 + e - e2) - f(x0 - e + e2) + f(x0 - e - e2)) / (4 * h * h)
    return real_to_complex_jet(f(x0), grad, hess)


def test_norm_squared_jet():
    z = np.array([1 + 2j, -0.5j])
    j = jet_eval(Polynomial.norm_squared(2), z)
    assert j.value == pytest.approx(5.25)
    np.testing.assert_allclose(j.grad, z.conj())
    np.testing.assert_allclose(j.hess, np.eye(2), atol=1e-15)


def test_imaginary_part_squared():
    # y^2 = -(z - zbar)^2 / 4, so d^2/dz dzbar = 1/2
    y = Polynomial.y(1, 0)
    j = jet_eval(y * y, np.array([0.3 + 0.7j]))
    assert j.hess[0, 0] == pytest.approx(0.5)
    assert j.grad[0] == pytest.approx(-1j * 0.7)


def test_real_and_complex_point_layouts_agree():
    p = Polynomial.norm_squared(2) * Polynomial.x(2, 1)
    z = np.array([0.1 + 0.2j, 0.3 - 0.4j])
    a = jet_eval(p, z)
    b = jet_eval(p, np.array([0.1, 0.3, 0.2, -0.4]))
    np.testing.assert_allclose(a.hess, b.hess)


def test_batch_shapes():
    z = np.zeros((4, 3, 2), complex)
    j = jet_eval(Polynomial.norm_squared(2), z)
    assert j.value.shape == (4, 3) and j.grad.shape == (4, 3, 2) and j.hess.shape == (4, 3, 2, 2)
    with pytest.raises(ValueError):
        jet_eval(Polynomial.norm_squared(2), np.zeros(3, complex))


def test_constant_jet():
    c = Jet2.constant(2.0, 3, (5,))
    assert c.value.shape == (5,) and not c.grad.any() and not c.hess.any()


def test_product_rule_matches_fd(rng):
    a = Polynomial.x(2, 0) * Polynomial.y(2, 1) + Polynomial.norm_squared(2)
    b = Polynomial.x(2, 1) ** 2 + 1
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    j = jet_product(jet_eval(a, z), jet_eval(b, z))
    ref = fd_complex_jet(lambda w: (a * b).value(w), z)
    np.testing.assert_allclose(j.hess, ref.hess, atol=1e-5)
    np.testing.assert_allclose(j.grad, ref.grad, atol=1e-6)


@pytest.mark.parametrize("wrap", [sqrt_field, square_field, log_field, positive_part_squared])
def test_chain_rule_matches_fd(rng, wrap):
    inner = Polynomial.norm_squared(2) + 0.5 * Polynomial.x(2, 0) + 1.0
    field = wrap(inner)
    z = 0.4 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    j = jet_eval(field, z)
    ref = fd_complex_jet(lambda w: field.value(w), z)
    assert j.value == pytest.approx(ref.value)
    np.testing.assert_allclose(j.hess, ref.hess, atol=1e-5)


def test_chain_domain_error():
    with pytest.raises(JetDomainError):
        jet_eval(log_field(Polynomial.x(1, 0)), np.array([-1.0 + 0j]))


def test_smooth_max_limits_and_fd(rng):
    a = Polynomial.norm_squared(2)
    b = Polynomial.x(2, 0) + 0.3
    eps = 0.05
    z = 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    field = SmoothMax(a, b, eps)
    ref = fd_complex_jet(lambda w: field.value(w), z)
    np.testing.assert_allclose(jet_eval(field, z).hess, ref.hess, atol=1e-4)
    big = smooth_max(Jet2.constant(5.0, 1), Jet2.constant(0.0, 1), 1e-9)
    assert big.value == pytest.approx(5.0)
    with pytest.raises(ValueError):
        smooth_max(Jet2.constant(1.0, 1), Jet2.constant(0.0, 1), 0.0)


@given(st.integers(0, 2**32 - 1))
def test_random_polynomial_jets_match_fd(seed):
    rng = np.random.default_rng(seed)
    exps = rng.integers(0, 3, size=(4, 4))
    coeffs = rng.normal(size=4)
    p = Polynomial(exps, coeffs, n=2)
    z = 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
    ref = fd_complex_jet(lambda w: p.value(w), z, h=1e-3)
    j = jet_eval(p, z)
    np.testing.assert_allclose(j.grad, ref.grad, atol=1e-5)
    np.testing.assert_allclose(j.hess, ref.hess, atol=1e-4)
