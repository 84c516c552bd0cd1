"""Radial masses, Newtonian potentials and exponential integrability tests
for measures given as weighted point clouds in C^n."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .jets import ScalarField
from .manifold import DefiningSystem, WeightedPointCloud, distance

log = logging.getLogger(__name__)

KERNEL_CLIP = 1e-8


def _dist(cloud: WeightedPointCloud, z) -> np.ndarray:
    z = np.asarray(z, complex).reshape(-1)
    return np.linalg.norm(cloud.points - z, axis=-1)


# --- radial mass ---------------------------------------------------------------------

@dataclass(frozen=True)
class RadialMass:
    center: np.ndarray
    radii: np.ndarray           # sorted atom distances
    masses: np.ndarray          # cumulative mass up to and including each radius
    s_grid: np.ndarray
    cumulative: np.ndarray      # mu_z(s) = mass of the open ball B(z, s)
    n: int

    @property
    def normalized(self) -> np.ndarray:
        return self.cumulative / self.s_grid ** (2 * self.n - 2)

    def mu(self, s) -> np.ndarray:
        """``mu_z(s)`` at arbitrary radii (open balls)."""
        k = np.searchsorted(self.radii, np.asarray(s, float), side="left")
        return np.where(k > 0, self.masses[np.maximum(k - 1, 0)], 0.0)


def radial_mass(cloud: WeightedPointCloud, z, s_grid) -> RadialMass:
    s_grid = np.asarray(s_grid, float)
    if np.any(s_grid <= 0):
        raise ValueError("radii must be positive")
    r = _dist(cloud, z)
    order = np.argsort(r, kind="stable")
    radii, masses = r[order], np.cumsum(cloud.weights[order])
    rm = RadialMass(np.asarray(z, complex).reshape(-1), radii, masses, s_grid, np.zeros(0),
                    cloud.points.shape[1])
    return RadialMass(rm.center, radii, masses, s_grid, rm.mu(s_grid), rm.n)


def nu_monotone(rm: RadialMass, rtol: float = 1e-9):
    """``(monotone, worst relative drop)`` of ``nu_z`` along the grid."""
    if len(rm.s_grid) < 2:
        raise ValueError("need at least two radii")
    nu = rm.normalized
    prev, nxt = nu[:-1], nu[1:]
    rel = np.divide(prev - nxt, prev, out=np.zeros_like(prev), where=prev > 0)
    drop = np.max(rel)
    return bool(drop <= rtol), float(max(drop, 0.0))


# --- Newtonian potential --------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSum:
    value: float
    clipped: int


def kernel_sum(cloud: WeightedPointCloud, z, power: float) -> KernelSum:
    """``sum_i w_i |z - zeta_i|^(-power)`` with distances clipped at ``1e-8``."""
    r = _dist(cloud, z)
    clipped = int((r < KERNEL_CLIP).sum())
    if clipped:
        log.warning("kernel clipped at %d atoms", clipped)
    return KernelSum(float(np.dot(cloud.weights, np.maximum(r, KERNEL_CLIP) ** -power)), clipped)


def newton_potential(cloud: WeightedPointCloud, z) -> KernelSum:
    n = cloud.points.shape[1]
    if n < 2:
        raise ValueError("the Newtonian kernel needs n >= 2")
    return kernel_sum(cloud, z, 2 * n - 2)


@dataclass
class ExpBoundTable:
    z: np.ndarray
    U: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    implied_C: np.ndarray
    excluded: np.ndarray
    mass_factor: float
    alpha: float
    metadata: dict = field(default_factory=dict)

    @property
    def sup_C(self) -> float:
        ok = ~self.excluded
        return float(self.implied_C[ok].max()) if ok.any() else float("nan")

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "U", "lhs", "rhs", "implied_C", "excluded"])
            for i in range(len(self.U)):
                w.writerow([i, repr(float(self.U[i])), repr(float(self.lhs[i])),
                            repr(float(self.rhs[i])), repr(float(self.implied_C[i])),
                            int(self.excluded[i])])
        return path


def exp_bound_check(cloud: WeightedPointCloud, z_grid, alpha: float) -> ExpBoundTable:
    """Both sides of ``e^(alpha U / (2n-2)) <= C int |z - zeta|^(2-2n-alpha) dmu``
    for the cloud rescaled to unit mass, with ``C = lhs / rhs`` per point."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    unit, factor = cloud.normalized()
    n = cloud.points.shape[1]
    z_grid = np.atleast_2d(np.asarray(z_grid, complex))
    U, lhs, rhs, excl = [], [], [], []
    for z in z_grid:
        u = newton_potential(unit, z)
        r = kernel_sum(unit, z, 2 * n - 2 + alpha)
        U.append(u.value)
        lhs.append(np.inf if u.clipped else np.exp(alpha * u.value / (2 * n - 2)))
        rhs.append(r.value)
        excl.append(u.clipped > 0)
    lhs, rhs = np.array(lhs), np.array(rhs)
    return ExpBoundTable(z_grid, np.array(U), lhs, rhs, lhs / rhs, np.array(excl), factor, alpha)


# --- integration by parts on step functions ------------------------------------------------

def _power_integral(p: float, a: float, b: float) -> float:
    """``int_a^b s^p ds``."""
    if p == -1:
        return float(np.log(b / a))
    return float((b ** (p + 1) - a ** (p + 1)) / (p + 1))


def jensen_sides(rm: RadialMass, alpha: float, top: float = 1.0):
    """Both sides of ``int_0^top dmu_z / s^(2n-2+alpha) = (2n-2) int_0^top s^(-1-alpha) nu_z ds
    + int_0^top s^(-alpha) dnu_z`` evaluated exactly for the step function ``mu_z``.

    Returns ``(direct, by_parts)``.  Atoms at distance 0 are not allowed.
    """
    k = 2 * rm.n - 2
    r = rm.radii[rm.radii < top]
    if len(r) and r[0] <= 0:
        raise ValueError("atom at the centre")
    jumps = np.diff(np.concatenate([[0.0], rm.masses]))[: len(r)]
    direct = float(np.dot(jumps, r ** -(k + alpha)))
    # piecewise: on (r_j, r_{j+1}) mu is constant c_j and nu = c_j s^-k
    edges = np.concatenate([r, [top]])
    levels = rm.masses[: len(r)]
    smooth = 0.0
    dnu_cont = 0.0
    for j in range(len(r)):
        a, b, c = edges[j], edges[j + 1], levels[j]
        if b <= a:
            continue
        smooth += k * c * _power_integral(-1 - alpha - k, a, b)
        dnu_cont += -k * c * _power_integral(-alpha - k - 1, a, b)
    dnu_jump = float(np.dot(jumps * r ** -k, r ** -alpha))
    return direct, smooth + dnu_cont + dnu_jump


# --- kernel integrated over M ---------------------------------------------------------------

@dataclass(frozen=True)
class KernelOnM:
    I: float
    d: float
    sparse: bool
    near_points: int


def kernel_on_M(cloud: WeightedPointCloud, zeta, alpha: float, ds: DefiningSystem) -> KernelOnM:
    """``I = sum w |z - zeta|^-(2n-2+alpha)`` over the surface cloud and the
    distance from ``zeta`` to ``M``."""
    n = cloud.points.shape[1]
    zeta = np.asarray(zeta, complex).reshape(1, -1)
    d = float(distance(ds, zeta)[0])
    r = _dist(cloud, zeta[0])
    near = int((r < 10 * d).sum())
    sparse = near < 100
    if sparse:
        log.warning("kernel_on_M: only %d cloud points within 10 d", near)
    return KernelOnM(kernel_sum(cloud, zeta[0], 2 * n - 2 + alpha).value, d, sparse, near)


# --- exponential integrability ----------------------------------------------------------------

@dataclass
class ExpIntegral:
    levels: np.ndarray
    estimates: np.ndarray
    alpha: float

    @property
    def increments(self) -> np.ndarray:
        return np.abs(np.diff(self.estimates)) / np.abs(self.estimates[1:])

    @property
    def converged(self) -> bool:
        return bool(np.isfinite(self.estimates[-1]) and self.increments[-1] < 0.01)

    @property
    def verdict(self) -> str:
        return "converged" if self.converged else "integrability not confirmed at this alpha"

    def write_csv(self, path) -> Path:
        path = Path(path)
        inc = np.concatenate([[np.nan], self.increments])
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["level", "log_level", "estimate", "relative_increment"])
            for lv, est, dv in zip(self.levels, self.estimates, inc):
                w.writerow([repr(float(lv)), repr(float(np.log(lv))), repr(float(est)), repr(float(dv))])
        return path


def exp_integral(phi: ScalarField, cloud: WeightedPointCloud, alpha: float,
                 clip_levels=(np.exp(-4), np.exp(-6), np.exp(-8), np.exp(-10))) -> ExpIntegral:
    """``int_K e^(-alpha max(phi, log L)) dM`` for each clip level ``L``."""
    levels = np.asarray(clip_levels, float)
    if len(levels) < 2 or np.any(np.diff(levels) >= 0):
        raise ValueError("clip levels must be strictly decreasing, at least two")
    with np.errstate(divide="ignore"):
        vals = np.real(phi.value(cloud.points))
    est = np.array([np.dot(cloud.weights, np.exp(-alpha * np.maximum(vals, np.log(L))))
                    for L in levels])
    return ExpIntegral(levels, est, alpha)
