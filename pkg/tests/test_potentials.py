import numpy as np
import pytest
from hypothesis import given, strategies as st

from tubemass import library
from tubemass.jets import log_field
from tubemass.manifold import WeightedPointCloud, sample_surface
from tubemass.polynomial import Polynomial
from tubemass.potentials import (exp_bound_check, exp_integral, jensen_sides, kernel_on_M,
                                 kernel_sum, newton_potential, nu_monotone, radial_mass)


def _cloud(points, weights=None):
    points = np.asarray(points, complex)
    w = np.ones(len(points)) if weights is None else np.asarray(weights, float)
    return WeightedPointCloud(points, w)


def _sphere_cloud(rng, radius, count):
    x = rng.normal(size=(count, 4))
    x *= radius / np.linalg.norm(x, axis=1, keepdims=True)
    return _cloud(x[:, :2] + 1j * x[:, 2:], np.full(count, 1.0 / count))


def test_radial_mass_uses_open_balls():
    rm = radial_mass(_cloud([[1, 0]]), [0, 0], [0.5, 1.0, 1.5])
    np.testing.assert_array_equal(rm.cumulative, [0, 0, 1])
    np.testing.assert_allclose(rm.normalized, [0, 0, 1 / 1.5 ** 2])
    with pytest.raises(ValueError):
        radial_mass(_cloud([[1, 0]]), [0, 0], [0.0, 1.0])


@given(st.integers(0, 2**32 - 1))
def test_radial_mass_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    cloud = _cloud(rng.normal(size=(50, 2)) + 1j * rng.normal(size=(50, 2)), rng.uniform(size=50))
    z = rng.normal(size=2) + 1j * rng.normal(size=2)
    s = np.sort(rng.uniform(0.1, 4, size=20))
    r = np.linalg.norm(cloud.points - z, axis=1)
    brute = [(cloud.weights * (r < si)).sum() for si in s]
    np.testing.assert_allclose(radial_mass(cloud, z, s).cumulative, brute, rtol=1e-12)


def test_nu_monotone_examples(rng):
    s = np.linspace(0.2, 1.0, 5)
    ok, drop = nu_monotone(radial_mass(_cloud([[0.1, 0]]), [0, 0], s))
    assert not ok and drop > 0.5
    ball = rng.uniform(-1, 1, size=(400_000, 4))
    ball = ball[np.linalg.norm(ball, axis=1) < 1]
    cloud = _cloud(ball[:, :2] + 1j * ball[:, 2:])
    assert nu_monotone(radial_mass(cloud, [0, 0], s), rtol=1e-2)[0]
    with pytest.raises(ValueError):
        nu_monotone(radial_mass(cloud, [0, 0], [0.5]))


def test_newton_potential_of_sphere(rng):
    cloud = _sphere_cloud(rng, 1.5, 200_000)
    assert newton_potential(cloud, [0.3, 0.2j]).value == pytest.approx(1 / 1.5 ** 2, rel=1e-2)
    z = np.array([3.0, 0.0])
    assert newton_potential(cloud, z).value == pytest.approx(1 / 9, rel=1e-2)


def test_kernel_scaling_and_clipping(rng):
    cloud = _cloud(rng.normal(size=(30, 2)) + 1j * rng.normal(size=(30, 2)))
    scaled = _cloud(2 * cloud.points)
    z = np.array([0.1, 0.2j])
    assert kernel_sum(scaled, 2 * z, 2.5).value == pytest.approx(2 ** -2.5 * kernel_sum(cloud, z, 2.5).value)
    hit = kernel_sum(cloud, cloud.points[0], 2.0)
    assert hit.clipped == 1
    with pytest.raises(ValueError):
        newton_potential(_cloud([[1.0]]), [0.0])


def test_newton_potential_is_linear(rng):
    a = _cloud(rng.normal(size=(10, 2)) + 0j, rng.uniform(size=10))
    b = _cloud(rng.normal(size=(10, 2)) + 0j, rng.uniform(size=10))
    both = _cloud(np.concatenate([a.points, b.points]), np.concatenate([a.weights, 3 * b.weights]))
    z = np.array([0.5j, 0.1])
    expect = newton_potential(a, z).value + 3 * newton_potential(b, z).value
    assert newton_potential(both, z).value == pytest.approx(expect)


def test_exp_bound_check(rng):
    cloud = _sphere_cloud(rng, 1.0, 5000)
    cloud = WeightedPointCloud(cloud.points, 4 * cloud.weights)
    table = exp_bound_check(cloud, [[0, 0], cloud.points[0]], alpha=0.5)
    assert table.mass_factor == pytest.approx(4.0)
    assert table.U[0] == pytest.approx(1.0)
    assert table.excluded.tolist() == [False, True]
    assert table.sup_C == pytest.approx(table.implied_C[0])
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            exp_bound_check(cloud, [[0, 0]], alpha=bad)


@given(st.integers(0, 2**32 - 1), st.floats(0.1, 0.9))
def test_jensen_identity(seed, alpha):
    rng = np.random.default_rng(seed)
    cloud = _cloud(rng.uniform(-1, 1, size=(40, 2)) + 1j * rng.uniform(-1, 1, size=(40, 2)),
                   rng.uniform(size=40))
    direct, by_parts = jensen_sides(radial_mass(cloud, [0, 0], [0.5, 1.0]), alpha)
    assert by_parts == pytest.approx(direct, rel=1e-10)


def test_jensen_rejects_centre_atom():
    with pytest.raises(ValueError):
        jensen_sides(radial_mass(_cloud([[0, 0]]), [0, 0], [0.5]), 0.5)


def test_kernel_on_real_plane():
    ds = library.real_space(2)
    coarse = sample_surface(ds, N=50)
    res = kernel_on_M(coarse, [0, 0.3j], 0.5, ds)
    assert res.d == pytest.approx(0.3) and res.sparse
    dense = sample_surface(ds, N=20_000)
    assert not kernel_on_M(dense, [0, 0.3j], 0.5, ds).sparse


def test_exp_integral_examples():
    # phi = log|z1| on R^2 over [-1,1]^2: int |x1|^-alpha = 4 / (1 - alpha)
    k = 4000
    mid = -1 + (np.arange(k) + 0.5) * 2 / k
    x1, x2 = np.meshgrid(mid, mid[::50], indexing="ij")
    pts = np.stack([x1.ravel(), x2.ravel()], -1).astype(complex)
    cloud = _cloud(pts, np.full(len(pts), 4.0 / len(pts)))
    z1 = Polynomial.z(2, 0)
    phi = log_field(z1 * z1.conj()) * 0.5
    half = exp_integral(phi, cloud, 0.5)
    assert half.converged and half.verdict == "converged"
    assert half.estimates[-1] == pytest.approx(8.0, rel=1e-2)
    assert np.all(np.diff(half.estimates) >= 0)
    two = exp_integral(phi, cloud, 2.0)
    assert not two.converged
    assert two.verdict == "integrability not confirmed at this alpha"
    with pytest.raises(ValueError):
        exp_integral(phi, cloud, 0.5, clip_levels=[1e-2, 1e-1])
