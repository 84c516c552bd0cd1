import numpy as np
import pytest
from scipy.integrate import quad

from tubemass.currents import (Divisor, ParametrizedVariety, SmoothPotential, check_psh,
                               current_mass, divisor_mass, kappa, smooth_mass,
                               trace_density_smooth, variety_mass)
from tubemass.jets import log_field
from tubemass.polynomial import Polynomial
from tubemass.regions import Ball, Region

BALL = Region(4, [Ball(np.zeros(4), 1.0)])


def _smoothed_divisor(delta):
    z1 = Polynomial.z(2, 0)
    return log_field(z1 * z1.conj() + delta ** 2) * (1 / (2 * np.pi))


def test_kappa_values():
    assert [kappa(n) for n in (1, 2, 3)] == [1.0, 2.0, 4.0]


def test_kappa_matches_smoothed_log_modulus():
    # (1/2pi) i ddbar log(|z1|^2 + d^2) tends to the current of {z1 = 0}; its trace
    # mass in the unit ball must approach kappa(2) * area(unit disc) = 2 pi.
    for delta in (1e-2, 1e-3):
        phi = _smoothed_divisor(delta)

        def dens(r):
            return trace_density_smooth(phi, np.array([r + 0j, 0j]))

        mass = quad(lambda r: dens(r) * np.pi * (1 - r * r) * 2 * np.pi * r, 0, 1,
                    points=[delta, 10 * delta], limit=200)[0]
        assert mass == pytest.approx(kappa(2) * np.pi, rel=3 * delta)


def test_trace_density_closed_form(rng):
    delta = 0.1
    z = rng.normal(size=(20, 2)) + 1j * rng.normal(size=(20, 2))
    r2 = np.abs(z[:, 0]) ** 2
    exact = 4 / (2 * np.pi) * delta ** 2 / (r2 + delta ** 2) ** 2
    np.testing.assert_allclose(trace_density_smooth(_smoothed_divisor(delta), z), exact, rtol=1e-12)


def test_norm_squared_mass_is_lebesgue_volume():
    est = smooth_mass(Polynomial.norm_squared(2), BALL, samples=200_000)
    # density 2^2 * tr(I) = 8 on a ball of volume pi^2 / 2
    assert abs(est.value - 4 * np.pi ** 2) < 4 * est.se


def test_psh_flags():
    assert check_psh(Polynomial.norm_squared(2), np.zeros((3, 2), complex))
    bad = -1.0 * Polynomial.norm_squared(2)
    dens, flags = trace_density_smooth(bad, np.zeros((3, 2), complex), return_flags=True)
    assert flags.all() and (dens < 0).all()


def test_divisor_mass_of_coordinate_hyperplane():
    dm = divisor_mass(Polynomial.z(2, 0), BALL, samples=400_000, seed=4)
    assert abs(dm.area - np.pi) < 4 * dm.area_se + 5e-3
    assert dm.mass == pytest.approx(kappa(2) * dm.area)
    assert not dm.flagged


def test_divisor_multiplicity_counts():
    # {z1^2 = w} is two discs of area pi (1 - |w|); averaged over |w| < eps
    # the coarea estimator targets 2 pi (1 - 2 eps / 3)
    z1 = Polynomial.z(2, 0)
    dm = divisor_mass(z1 * z1, BALL, samples=400_000, seed=4)
    target = 2 * np.pi * (1 - 2 * dm.eps / 3)
    assert abs(dm.area - target) < 4 * dm.area_se


def test_divisor_validation():
    with pytest.raises(ValueError):
        Divisor(Polynomial.constant(2, 0.0))
    with pytest.raises(ValueError):
        Divisor(Polynomial.x(2, 0))


def test_variety_area_of_graph_line():
    # w -> (w, w/2): a complex line; inside the unit ball it is a disc of radius 2/sqrt(5)
    w = Polynomial.z(1, 0)
    pv = ParametrizedVariety((w, 0.5 * w), {"type": "disc", "radius": 2.0})
    assert variety_mass(pv) == pytest.approx(np.pi * 4 * 1.25, rel=1e-10)
    inside = variety_mass(pv, BALL, nodes=400)
    assert inside == pytest.approx(np.pi * 4 / 5 * 1.25, rel=1e-2)
    mass, se = current_mass(pv, BALL)
    assert se == 0.0 and mass == pytest.approx(kappa(2) * variety_mass(pv, BALL))


def test_variety_validation():
    w = Polynomial.z(1, 0)
    with pytest.raises(ValueError):
        ParametrizedVariety((w,), {"type": "disc", "radius": 1.0})
    with pytest.raises(ValueError):
        ParametrizedVariety((w, Polynomial.x(1, 0)), {"type": "disc", "radius": 1.0})


def test_current_mass_dispatch():
    with pytest.raises(TypeError):
        current_mass(object(), BALL)
    value, se = current_mass(SmoothPotential(Polynomial.norm_squared(2)), BALL, samples=50_000)
    assert abs(value - 4 * np.pi ** 2) < 4 * se
