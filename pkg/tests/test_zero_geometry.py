import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.distance import cdist

from tubemass import library
from tubemass.polynomial import Polynomial
from tubemass.zero_geometry import (PackingResult, ball_area_bound, greedy_pack,
                                    hausdorff_estimate, packing_bound, unit_ball_volume,
                                    write_rows, zeros_on_M)

R2 = library.real_space(2)
Z1 = Polynomial.z(2, 0)


def _circle(radius):
    z1, z2 = Polynomial.z(2, 0), Polynomial.z(2, 1)
    return z1 * z1 + z2 * z2 - radius ** 2


@pytest.mark.parametrize("order", ["input", "chain"])
def test_segment_packing_count(order):
    pts = np.linspace(-1, 1, 2001)[:, None]
    assert greedy_pack(pts, 0.2, order=order).N in (10, 11)


def test_shuffled_segment_packing_is_maximal_but_looser():
    # any maximal 0.2-separated set on a length-2 segment has gaps <= 0.4
    pts = np.linspace(-1, 1, 2001)[:, None]
    for seed in range(5):
        assert 5 <= greedy_pack(pts, 0.2, order="shuffle", seed=seed).N <= 11


def test_packing_edge_cases():
    assert greedy_pack(np.zeros((0, 2)), 0.1).N == 0
    assert greedy_pack(np.ones((1, 2)), 0.1).N == 1
    assert greedy_pack(np.zeros((5, 2)), 0.1).N == 1
    with pytest.raises(ValueError):
        greedy_pack(np.ones((3, 2)), 0.0)
    with pytest.raises(ValueError):
        greedy_pack(np.ones((3, 2)), 0.1, order="random")


def test_shuffle_is_seeded(rng):
    pts = rng.uniform(size=(300, 2))
    a = greedy_pack(pts, 0.1, order="shuffle", seed=5)
    b = greedy_pack(pts, 0.1, order="shuffle", seed=5)
    np.testing.assert_array_equal(a.points, b.points)


@given(st.integers(0, 2**32 - 1), st.floats(0.02, 0.5), st.sampled_from(["input", "shuffle", "chain"]))
def test_packing_is_separated_and_maximal(seed, sep, order):
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(200, 3))
    pr = greedy_pack(pts, sep, order=order, seed=seed)
    d = cdist(pr.points, pr.points)
    np.fill_diagonal(d, np.inf)
    assert d.min() > sep
    assert np.all(cdist(pts, pr.points).min(axis=1) <= sep)
    assert pr.epsilon == pytest.approx(sep / 2) and pr.maximal


def test_complex_points_accepted():
    pts = np.array([[0, 0], [1j, 0], [0.05j, 0]])
    assert greedy_pack(pts, 0.2).N == 2


def test_zeros_of_coordinate_on_real_plane():
    zs = zeros_on_M(Z1, R2, grid=60)
    assert len(zs.points) > 0 and zs.skipped == 0
    assert np.abs(zs.points[:, 0]).max() < 1e-10
    x2 = zs.points[:, 1].real
    assert x2.min() < -0.95 and x2.max() > 0.95


def test_zeros_of_circle():
    zs = zeros_on_M(_circle(0.5), R2, grid=100)
    np.testing.assert_allclose(np.linalg.norm(zs.points.real, axis=1), 0.5, atol=1e-9)


def test_no_zeros():
    zs = zeros_on_M(Polynomial.constant(2, 1.0) + 0 * Z1, R2, grid=20)
    assert len(zs.points) == 0


def test_packing_bound_rules():
    pr = PackingResult(0.1, np.zeros((3, 2)), True)
    assert packing_bound(pr, 2.0, 2, 2) == pytest.approx(3 * 0.1 / 2.0)
    assert packing_bound(PackingResult(0.1, np.zeros((0, 2)), True), 0.0, 2, 2) == 0.0
    with pytest.raises(ValueError):
        packing_bound(pr, 0.0, 2, 2)


def test_unit_ball_volume():
    assert [unit_ball_volume(p) for p in (0, 1, 2)] == pytest.approx([1.0, 2.0, np.pi])


def test_hausdorff_segment_and_scaling(tmp_path):
    rows, _ = hausdorff_estimate(Z1, R2, None, [0.05, 0.1], massV=1.0)
    for row in rows:
        assert row.hausdorff_p == 1
        assert row.hausdorff_estimate == pytest.approx(2.0, rel=0.11)
    small, _ = hausdorff_estimate(_circle(0.25), R2, None, [0.02], massV=1.0)
    big, _ = hausdorff_estimate(_circle(0.5), R2, None, [0.04], massV=1.0)
    assert big[0].N == small[0].N
    assert big[0].hausdorff_estimate == pytest.approx(2 * small[0].hausdorff_estimate)
    path = write_rows(rows, tmp_path / "h.csv")
    assert path.read_text().splitlines()[0] == "epsilon,N,C_measured,hausdorff_p,hausdorff_estimate"
    with pytest.raises(ValueError):
        hausdorff_estimate(Z1, R2, None, [0.1], p=-1, massV=1.0)


def test_ball_area_minimality():
    rep = ball_area_bound(Z1, [0, 0], 0.5, samples=200_000)
    assert rep.verdict == "pass" and rep.ratio == pytest.approx(1.0, abs=0.03)
    cusp = Z1 * Z1 - Polynomial.z(2, 1) ** 3
    assert ball_area_bound(cusp, [0, 0], 0.5, samples=200_000).ratio > 1.5
    with pytest.raises(ValueError):
        ball_area_bound(Z1, [1, 0], 0.5)
