"""Estimator-style wrappers around the functional API.

Point data is passed as real arrays ``(N, 2n)`` in ``(x, y)`` order.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .manifold import WeightedPointCloud
from .mass_profile import almost_monotone_report, sigma_profile
from .polynomial import to_complex
from .potentials import exp_bound_check, newton_potential, nu_monotone, radial_mass
from .zero_geometry import greedy_pack


def _cloud(X, sample_weight=None) -> WeightedPointCloud:
    X = check_array(X, ensure_min_samples=1)
    if X.shape[1] % 2:
        raise ValueError("points need an even number of real coordinates")
    w = np.ones(len(X)) if sample_weight is None else np.asarray(sample_weight, float)
    if w.shape != (len(X),):
        raise ValueError("sample_weight must have one entry per point")
    return WeightedPointCloud(to_complex(X), w)


def _centers(estimator, Z) -> np.ndarray:
    check_is_fitted(estimator, "cloud_")
    Z = check_array(Z)
    if Z.shape[1] != estimator.n_features_in_:
        raise ValueError(f"expected {estimator.n_features_in_} coordinates, got {Z.shape[1]}")
    return to_complex(Z)


class _CloudEstimator(BaseEstimator):
    def fit(self, X, y=None, sample_weight=None):
        self.cloud_ = _cloud(X, sample_weight)
        self.n_features_in_ = np.asarray(X).shape[1]
        return self


class NewtonPotential(_CloudEstimator):
    """Newtonian potential of a weighted point cloud; ``predict`` gives ``U(z)``."""

    def predict(self, Z):
        return np.array([newton_potential(self.cloud_, z).value for z in _centers(self, Z)])

    def exp_bound(self, Z, alpha: float = 0.5):
        check_is_fitted(self, "cloud_")
        return exp_bound_check(self.cloud_, _centers(self, Z), alpha)


class RadialMass(TransformerMixin, _CloudEstimator):
    """Maps centres to their normalised radial mass ``nu_z`` on ``s_grid``."""

    def __init__(self, s_grid=(0.25, 0.5, 1.0)):
        self.s_grid = s_grid

    def transform(self, Z):
        return np.stack([radial_mass(self.cloud_, z, self.s_grid).normalized
                         for z in _centers(self, Z)])


class LelongMonotonicityClassifier(ClassifierMixin, _CloudEstimator):
    """Predicts whether ``nu_z`` is nondecreasing along ``s_grid`` at each centre."""

    def __init__(self, s_grid=(0.25, 0.5, 1.0), rtol: float = 1e-9):
        self.s_grid = s_grid
        self.rtol = rtol

    def fit(self, X, y=None, sample_weight=None):
        super().fit(X, y, sample_weight)
        self.classes_ = np.array([False, True])
        return self

    def predict(self, Z):
        return np.array([nu_monotone(radial_mass(self.cloud_, z, self.s_grid), self.rtol)[0]
                         for z in _centers(self, Z)])


class HausdorffPacking(BaseEstimator):
    """Greedy maximal ``2 epsilon``-separated subset of the fitted points."""

    def __init__(self, epsilon: float = 0.1, order: str = "input", seed: int = 0):
        self.epsilon = epsilon
        self.order = order
        self.seed = seed

    def fit(self, X, y=None):
        X = check_array(X)
        self.result_ = greedy_pack(X, 2 * self.epsilon, self.order, self.seed)
        self.points_ = self.result_.points
        self.n_points_ = self.result_.N
        return self


class TubeMassProfile(BaseEstimator):
    """``sigma(t)`` of a current around a manifold; ``fit`` takes the t grid."""

    def __init__(self, manifold=None, current=None, r: float = 0.9, samples: int = 400_000,
                 seed: int = 0, batches: int = 32):
        self.manifold = manifold
        self.current = current
        self.r = r
        self.samples = samples
        self.seed = seed
        self.batches = batches

    def fit(self, t_grid, y=None):
        t = check_array(np.asarray(t_grid, float).reshape(-1, 1)).ravel()
        self.profile_ = sigma_profile(self.current, self.manifold, self.r, t, self.samples,
                                      self.seed, self.batches)
        self.report_ = almost_monotone_report(self.profile_)
        self.ratio_ = self.profile_.ratio
        self.C_measured_ = self.report_.C_measured
        return self
