import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tubemass import library
from tubemass.currents import Divisor
from tubemass.estimators import (HausdorffPacking, LelongMonotonicityClassifier, NewtonPotential,
                                 RadialMass, TubeMassProfile)
from tubemass.manifold import WeightedPointCloud
from tubemass.polynomial import Polynomial, to_complex
from tubemass.potentials import newton_potential, radial_mass


@pytest.fixture
def X(rng):
    return rng.normal(size=(200, 4))


@pytest.mark.parametrize("cls", [NewtonPotential, RadialMass, LelongMonotonicityClassifier,
                                 HausdorffPacking, TubeMassProfile])
def test_params_roundtrip(cls):
    est = cls()
    params = est.get_params()
    twin = clone(est)
    assert twin.get_params().keys() == params.keys()


def test_set_params():
    est = RadialMass().set_params(s_grid=(0.1, 0.2))
    assert est.s_grid == (0.1, 0.2)


@pytest.mark.parametrize("cls", [NewtonPotential, RadialMass, LelongMonotonicityClassifier])
def test_not_fitted(cls):
    with pytest.raises(NotFittedError):
        est = cls()
        (est.transform if hasattr(est, "transform") else est.predict)(np.zeros((1, 4)))


def test_newton_potential_matches_function(X):
    w = np.linspace(1, 2, len(X))
    est = NewtonPotential().fit(X, sample_weight=w)
    Z = np.array([[0.1, 0.2, 0.3, 0.4]])
    cloud = WeightedPointCloud(to_complex(X), w)
    assert est.predict(Z)[0] == pytest.approx(newton_potential(cloud, to_complex(Z)[0]).value)
    assert est.exp_bound(Z).U.shape == (1,)
    with pytest.raises(ValueError):
        est.predict(np.zeros((1, 6)))


def test_input_validation(X):
    with pytest.raises(ValueError):
        NewtonPotential().fit(X[:, :3])
    with pytest.raises(ValueError):
        NewtonPotential().fit(X, sample_weight=np.ones(3))


def test_radial_mass_transform(X):
    est = RadialMass(s_grid=(0.5, 1.0)).fit(X)
    out = est.fit_transform(X[:3])
    assert out.shape == (3, 2)
    ref = radial_mass(WeightedPointCloud(to_complex(X[:3]), np.ones(3)), to_complex(X[:1])[0], (0.5, 1.0))
    np.testing.assert_allclose(out[0], ref.normalized)


def test_classifier_on_atom():
    est = LelongMonotonicityClassifier(s_grid=(0.2, 0.5, 1.0)).fit(np.array([[0.1, 0, 0, 0]]))
    assert est.predict(np.zeros((1, 4))).tolist() == [False]
    assert est.score(np.zeros((1, 4)), [False]) == 1.0


def test_hausdorff_packing():
    pts = np.column_stack([np.linspace(-1, 1, 2001), np.zeros(2001)])
    est = HausdorffPacking(epsilon=0.1).fit(pts)
    assert est.n_points_ in (10, 11) and len(est.points_) == est.n_points_


def test_tube_mass_profile():
    est = TubeMassProfile(library.real_space(2), Divisor(Polynomial.z(2, 0)), r=0.9, samples=20_000)
    est.fit([0.05, 0.1, 0.2])
    assert est.ratio_.shape == (3,) and est.C_measured_ >= 1.0
