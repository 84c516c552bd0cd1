import json
import warnings

import numpy as np
import pytest

from tubemass import library
from tubemass.currents import Divisor, SmoothPotential
from tubemass.manifold import build_tube_weight
from tubemass.mass_profile import (MassProfile, almost_monotone_report, convex_profile,
                                   default_t_grid, loglog_slope, monotone_within, sigma_profile,
                                   sigma_u_profile)
from tubemass.polynomial import Polynomial
from tubemass.regions import BallBody
from tubemass.runner import hyperplane_r2_profile


def _profile(sigma, se=None, exponent=1.0):
    t = np.array([0.1, 0.2, 0.3, 0.4])
    se = np.zeros(4) if se is None else se
    return MassProfile(t, sigma, se, exponent)


def test_profile_validation_and_ratio():
    p = _profile([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(p.ratio, 1.0)
    with pytest.raises(ValueError):
        MassProfile([0.2, 0.1, 0.3], [1, 1, 1], [0, 0, 0], 1)


def test_default_grid():
    g = default_t_grid(0.5)
    assert g[0] == pytest.approx(0.005) and g[-1] == pytest.approx(0.5) and len(g) == 12


def test_monotone_report_examples():
    assert almost_monotone_report(_profile([0.1, 0.2, 0.3, 0.4])).C_measured == pytest.approx(1.0)
    rep = almost_monotone_report(_profile([0.2, 0.2, 0.3, 0.4]))
    assert rep.C_measured == pytest.approx(2.0) and rep.worst_pair == (0.1, 0.2)
    assert almost_monotone_report(_profile([0, 0, 0, 0])).C_measured == 1.0
    with pytest.raises(ValueError):
        almost_monotone_report(MassProfile([0.1, 0.2], [1, 1], [0, 0], 1))


def test_monotone_within_uses_error_bars():
    p = _profile([0.1, 0.19, 0.3, 0.4], se=np.full(4, 0.01))
    ok, worst = monotone_within(p)
    assert ok and worst < 3
    ok, _ = monotone_within(_profile([0.3, 0.2, 0.3, 0.4], se=np.full(4, 1e-3)))
    assert not ok


def test_loglog_slope():
    x = np.geomspace(0.01, 1, 10)
    assert loglog_slope(x, 3 * x ** 2.5) == pytest.approx(2.5)


def test_write_csv_and_sidecar(tmp_path):
    p = _profile([0.1, 0.2, 0.3, 0.4])
    p.metadata["seed"] = 7
    p.extra["ratio_alt"] = np.ones(4)
    path = p.write_csv(tmp_path / "profile.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "t,sigma,se,ratio,ratio_se,ratio_alt"
    assert len(lines) == 5
    meta = json.loads((tmp_path / "profile.json").read_text())
    assert meta == {"exponent": 1.0, "seed": 7}


def test_hyperplane_profile_matches_closed_form():
    ds = library.real_space(2)
    cur = Divisor(Polynomial.z(2, 0))
    t = np.array([0.05, 0.1, 0.2])
    prof = sigma_profile(cur, ds, 0.9, t, samples=200_000, seed=1)
    exact = hyperplane_r2_profile(t, 0.9)
    assert np.all(np.abs(prof.sigma - exact) < 4 * prof.se + 0.01 * exact)
    assert prof.exponent == 1


def test_sigma_profile_guards():
    ds = library.real_space(2)
    cur = Divisor(Polynomial.z(2, 0))
    with pytest.raises(ValueError):
        sigma_profile(cur, ds, 1.0, [0.1])
    with pytest.warns(RuntimeWarning):
        prof = sigma_profile(cur, ds, 0.5, [0.05, 0.1, 0.3], samples=2000, t0=0.2)
    assert len(prof.t_grid) == 2


def test_sigma_profile_is_reproducible():
    ds = library.real_space(2)
    cur = Divisor(Polynomial.z(2, 0))
    a = sigma_profile(cur, ds, 0.5, [0.1, 0.2], samples=5000, seed=3)
    b = sigma_profile(cur, ds, 0.5, [0.1, 0.2], samples=5000, seed=3)
    np.testing.assert_array_equal(a.sigma, b.sigma)


def test_convex_profile_of_point():
    # |z|^2 has trace density 8 in C^2; around a point sigma(t) = 8 * pi^2 t^4 / 2
    cur = SmoothPotential(Polynomial.norm_squared(2))
    t = np.array([0.1, 0.2, 0.4])
    prof = convex_profile(cur, BallBody(np.zeros(2), 0.0), 2, t, samples=100_000)
    exact = 4 * np.pi ** 2 * t ** 4
    assert np.all(np.abs(prof.sigma - exact) < 4 * prof.se + 1e-3 * exact)
    assert loglog_slope(t, prof.ratio) == pytest.approx(3, abs=0.05)
    with pytest.raises(TypeError):
        convex_profile(cur, "ball", 2, t)
    with pytest.raises(ValueError):
        convex_profile(cur, BallBody(np.zeros(3), 0.0), 3, t)


def test_sigma_u_profile_real_plane():
    ds = library.real_space(2)
    tw = build_tube_weight(ds, 0.0)
    pot = SmoothPotential(Polynomial.norm_squared(2))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        prof = sigma_u_profile(pot, tw, ds, [0.05, 0.1, 0.2], samples=20_000, validated=True)
    assert prof.exponent == 1
    assert np.all(np.diff(prof.sigma) > 0)
    assert set(prof.extra) == {"ratio_alt", "ratio_alt_se"}
    with pytest.warns(RuntimeWarning):
        sigma_u_profile(pot, tw, ds, [0.1], samples=2000, validated=False)
