"""Tube-mass profiles sigma(t) and their monotonicity verdicts."""
from __future__ import annotations

import csv
import json
import logging
import warnings
from dataclasses import dataclass, field
from math import factorial
from pathlib import Path

import numpy as np

from .currents import Divisor, ParametrizedVariety, SmoothPotential, current_mass
from .forms import LEBESGUE_FACTOR, wedge_coefficient
from .jets import jet_chain
from .manifold import DefiningSystem, TubeWeight
from .montecarlo import DEFAULT_BATCHES, integrate
from .polynomial import to_complex
from .regions import (Ball, ConvexBody, ConvexTube, LinearTube, LipschitzTube, Region,
                      WeightLevel, cover as build_cover)

log = logging.getLogger(__name__)


@dataclass
class MassProfile:
    t_grid: np.ndarray
    sigma: np.ndarray
    se: np.ndarray
    exponent: float
    metadata: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, float)
        self.sigma = np.asarray(self.sigma, float)
        self.se = np.asarray(self.se, float)
        if np.any(np.diff(self.t_grid) <= 0):
            raise ValueError("t_grid must be strictly increasing")

    @property
    def ratio(self) -> np.ndarray:
        return self.sigma / self.t_grid ** self.exponent

    @property
    def ratio_se(self) -> np.ndarray:
        return self.se / self.t_grid ** self.exponent

    def rows(self):
        for i, t in enumerate(self.t_grid):
            row = {"t": t, "sigma": self.sigma[i], "se": self.se[i],
                   "ratio": self.ratio[i], "ratio_se": self.ratio_se[i]}
            for k, v in self.extra.items():
                row[k] = v[i]
            yield row

    def write_csv(self, path) -> Path:
        path = Path(path)
        rows = list(self.rows())
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(float(v)) for k, v in row.items()})
        meta = dict(self.metadata, exponent=self.exponent)
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return path


def default_t_grid(t0: float, points: int = 12) -> np.ndarray:
    return np.geomspace(t0 / 100.0, t0, points)


def tube_predicate(ds: DefiningSystem, t: float):
    return LinearTube(ds, t) if ds.is_linear else LipschitzTube(ds, t)


def _cell_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _measure(current, region, samples, seed, batches):
    return current_mass(current, region, samples, seed, batches)


def sigma_profile(current, ds: DefiningSystem, r: float, t_grid, samples: int = 1_000_000,
                  seed: int = 0, batches: int = DEFAULT_BATCHES, t0: float | None = None,
                  total_mass: bool = False) -> MassProfile:
    """Trace mass of ``current`` in ``U_t`` intersected with the ball ``rB``."""
    if r >= ds.domain_radius:
        raise ValueError("r must be smaller than the domain radius")
    t_grid = np.asarray(t_grid, float)
    if t0 is not None and t_grid.max() > t0:
        warnings.warn(f"t_grid exceeds t0={t0:.3g}; truncating", RuntimeWarning)
        t_grid = t_grid[t_grid <= t0]
    dim = 2 * ds.n
    ball = Ball(np.zeros(dim), r)
    sig, se = [], []
    for i, t in enumerate(t_grid):
        reg = Region(dim, [ball, tube_predicate(ds, t)])
        s, e = _measure(current, reg, samples, _cell_seed(seed, i), batches)
        sig.append(s)
        se.append(e)
    meta = {"n": ds.n, "m": ds.m, "r": r, "manifold": ds.name, "seed": seed,
            "current": getattr(current, "name", type(current).__name__), "samples": samples}
    if total_mass:
        whole = Region(dim, [Ball(np.zeros(dim), ds.domain_radius)])
        meta["total_mass"], meta["total_mass_se"] = _measure(
            current, whole, samples, _cell_seed(seed, len(t_grid)), batches)
    return MassProfile(t_grid, sig, se, ds.m - 1, meta)


@dataclass(frozen=True)
class MonotoneReport:
    C_measured: float
    C_se: float
    worst_pair: tuple | None


def almost_monotone_report(profile: MassProfile, exponent: float | None = None) -> MonotoneReport:
    """``C = max_{t < s} ratio(t) / ratio(s)`` with a delta-method error bar."""
    if len(profile.t_grid) < 3:
        raise ValueError("need at least three grid points")
    p = profile.exponent if exponent is None else exponent
    ratio = profile.sigma / profile.t_grid ** p
    rse = profile.se / profile.t_grid ** p
    if not np.any(ratio > 0):
        return MonotoneReport(1.0, 0.0, None)
    best, best_se, pair = 1.0, 0.0, None
    for i in range(len(ratio)):
        for j in range(i + 1, len(ratio)):
            if ratio[i] <= 0:
                continue
            q = ratio[i] / ratio[j] if ratio[j] > 0 else np.inf
            if q > best:
                rel = np.hypot(rse[i] / ratio[i], rse[j] / ratio[j]) if ratio[j] > 0 else np.inf
                best, best_se, pair = q, q * rel, (float(profile.t_grid[i]), float(profile.t_grid[j]))
    return MonotoneReport(float(best), float(best_se), pair)


def monotone_within(profile: MassProfile, n_se: float = 3.0, column: str | None = None):
    """Check ``ratio(t) <= ratio(s) + n_se * combined SE`` for all ``t < s``.

    Returns ``(ok, worst)`` where ``worst`` is the largest decrease measured in
    combined standard errors.
    """
    ratio = profile.ratio if column is None else np.asarray(profile.extra[column])
    rse = profile.ratio_se if column is None else np.asarray(profile.extra[column + "_se"])
    worst = -np.inf
    for i in range(len(ratio)):
        for j in range(i + 1, len(ratio)):
            comb = np.hypot(rse[i], rse[j])
            drop = ratio[i] - ratio[j]
            score = drop / comb if comb > 0 else (np.inf if drop > 0 else -np.inf)
            worst = max(worst, score)
    return bool(worst <= n_se), float(worst)


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


# --- Stokes-type profile for the constructed weight ------------------------------------------

def sigma_u_profile(potential: SmoothPotential, tw: TubeWeight, ds: DefiningSystem, t_grid,
                    samples: int = 400_000, seed: int = 0, batches: int = DEFAULT_BATCHES,
                    validated: bool | None = None) -> MassProfile:
    """``sigma(t) = int_{sqrt(u) < t} theta ^ (i ddbar u/2)^(m-1) ^ beta^(n-m)``.

    Also reports ``ratio_alt = int_{sqrt(u) < t} theta ^ (i ddbar sqrt(u))^(m-1) ^
    beta^(n-m)``, which equals ``sigma(t) / t^(m-1)`` by Stokes' theorem.
    """
    if validated is False:
        warnings.warn("tube weight has not passed verify_psh_bound", RuntimeWarning)
    n, m = ds.n, ds.m
    vol = factorial(n) * LEBESGUE_FACTOR ** n      # beta^n in units of Lebesgue measure
    dim = 2 * n
    phi = potential.phi

    def densities(x):
        z = to_complex(x)
        hphi = phi.jet(z).hess
        ju = tw.u.jet(z)
        root = jet_chain(np.sqrt, lambda s: 0.5 / np.sqrt(s), lambda s: -0.25 * s ** -1.5, ju)
        a = vol * wedge_coefficient([hphi] + [0.5 * ju.hess] * (m - 1), n)
        b = vol * wedge_coefficient([hphi] + [root.hess] * (m - 1), n)
        return a, b

    t_grid = np.asarray(t_grid, float)
    sig, se, alt, alt_se = [], [], [], []
    for i, t in enumerate(t_grid):
        reg = Region(dim, [_weight_ball(tw, t), WeightLevel(tw, ds, t)])
        cov = build_cover(reg)
        # same seed and cover: both integrands see identical points
        s_est = integrate(lambda x: densities(x)[0], reg, samples, _cell_seed(seed, i), batches, cov)
        b_est = integrate(lambda x: densities(x)[1], reg, samples, _cell_seed(seed, i), batches, cov)
        sig.append(s_est.value)
        se.append(s_est.se)
        alt.append(b_est.value)
        alt_se.append(b_est.se)
    meta = {"n": n, "m": m, "A": tw.A, "inner_radius": tw.inner_radius, "eps": tw.eps,
            "manifold": ds.name, "seed": seed, "samples": samples,
            "current": potential.name or "smooth"}
    return MassProfile(t_grid, sig, se, m - 1, meta,
                       {"ratio_alt": np.array(alt), "ratio_alt_se": np.array(alt_se)})


def _weight_ball(tw: TubeWeight, t: float) -> Ball:
    # sqrt(u) >= f = (|z|^2 - R^2)^2 outside the inner ball
    radius = np.sqrt(tw.inner_radius ** 2 + np.sqrt(t)) * (1 + 1e-9)
    return Ball(np.zeros(2 * tw.w.n), radius)


# --- tubes around convex bodies of R^n -----------------------------------------------------

def convex_profile(current, body: ConvexBody, n: int, t_grid, samples: int = 1_000_000,
                   seed: int = 0, batches: int = DEFAULT_BATCHES) -> MassProfile:
    """``sigma(t)`` over ``{d(z, K) < t}`` with ratio ``sigma / t^(n-1)``."""
    if not isinstance(body, ConvexBody):
        raise TypeError("convex_profile needs a ConvexBody")
    if isinstance(current, (Divisor, SmoothPotential, ParametrizedVariety)) and current.n != n:
        raise ValueError("current dimension does not match n")
    t_grid = np.asarray(t_grid, float)
    sig, se = [], []
    for i, t in enumerate(t_grid):
        reg = Region(2 * n, [ConvexTube(body, t)])
        s, e = _measure(current, reg, samples, _cell_seed(seed, i), batches)
        sig.append(s)
        se.append(e)
    meta = {"n": n, "body": type(body).__name__, "seed": seed, "samples": samples,
            "current": getattr(current, "name", "")}
    return MassProfile(t_grid, sig, se, n - 1, meta)
