"""Positive closed (1,1)-currents: divisors, parametrised varieties, smooth potentials.

Trace measure is ``theta ^ beta^(n-1) / (n-1)!`` with ``beta = i ddbar |z|^2``.
On a complex hypersurface ``beta`` restricts to twice the Euclidean area
form per complex direction, so the trace measure of the current of
integration over ``V`` is ``kappa(n) = 2^(n-1)`` times Hausdorff area
``H_{2n-2}``.  The value is checked numerically in the test suite by
integrating the trace density of ``(1/2 pi) i ddbar log(|z_1|^2 + delta^2)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .forms import LEBESGUE_FACTOR
from .jets import ScalarField, as_complex_points
from .montecarlo import DEFAULT_BATCHES, MCEstimate, integrate
from .polynomial import Polynomial, to_complex, to_real
from .regions import ModulusBelow, Region

log = logging.getLogger(__name__)


def kappa(n: int) -> float:
    """Trace mass of the divisor current per unit (2n-2)-dimensional area."""
    return LEBESGUE_FACTOR ** (n - 1)


# --- current specs ----------------------------------------------------------------

@dataclass(frozen=True)
class Divisor:
    f: Polynomial
    name: str = ""

    def __post_init__(self):
        if self.f.is_zero():
            raise ValueError("divisor of the zero function")
        if not self.f.is_holomorphic(1e-12):
            raise ValueError("divisor payload is not holomorphic")

    @property
    def n(self) -> int:
        return self.f.n


@dataclass(frozen=True)
class ParametrizedVariety:
    """Image of a holomorphic map ``w -> (F_1(w), ..., F_n(w))`` with
    ``w`` in C^(n-1), over a disc (n = 2) or a box of real parameters."""

    maps: tuple
    domain: dict
    name: str = ""

    def __post_init__(self):
        maps = tuple(self.maps)
        object.__setattr__(self, "maps", maps)
        k = maps[0].n
        if any(p.n != k for p in maps):
            raise ValueError("component maps disagree in parameter dimension")
        if len(maps) != k + 1:
            raise ValueError("a hypersurface in C^n needs n - 1 complex parameters")
        for p in maps:
            if not p.is_holomorphic(1e-12):
                raise ValueError("parametrisation is not holomorphic")

    @property
    def n(self) -> int:
        return len(self.maps)


@dataclass(frozen=True)
class SmoothPotential:
    phi: ScalarField
    name: str = ""

    @property
    def n(self) -> int:
        return self.phi.n


def check_psh(phi: ScalarField, points, tol: float = 1e-10) -> bool:
    hess = phi.jet(points).hess
    return bool(np.linalg.eigvalsh(hess).min() >= -tol)


def trace_density_smooth(phi: ScalarField, z, tol: float = 1e-10, return_flags: bool = False):
    """Lebesgue density ``2^n tr(H_phi)`` of the trace measure of ``i ddbar phi``."""
    z = as_complex_points(z, phi.n)
    hess = phi.jet(z).hess
    dens = LEBESGUE_FACTOR ** phi.n * np.real(np.trace(hess, axis1=-2, axis2=-1))
    if return_flags:
        return dens, np.linalg.eigvalsh(hess)[..., 0] < -tol
    return dens


# --- divisor mass via the coarea formula --------------------------------------------

@dataclass(frozen=True)
class DivisorMass:
    area: float
    area_se: float
    eps: float
    estimate: MCEstimate
    n: int
    flagged: bool

    @property
    def mass(self) -> float:
        return kappa(self.n) * self.area

    @property
    def mass_se(self) -> float:
        return kappa(self.n) * self.area_se


def default_coarea_width(region: Region) -> float:
    return 0.02 * region.thickness


def divisor_mass(f: Polynomial, region: Region, eps: float | None = None,
                 samples: int = 1_000_000, seed: int = 0,
                 batches: int = DEFAULT_BATCHES) -> DivisorMass:
    """Hausdorff area of ``{f = 0}`` in ``region`` (and trace mass ``kappa * area``).

    Coarea estimator: ``(1 / pi eps^2) int_{region, |f| < eps} |df|^2 d(lambda)``
    averages the areas of the level sets ``{f = w}``, ``|w| < eps``; zeros of
    higher multiplicity are weighted automatically.
    """
    n = f.n
    if eps is None:
        eps = default_coarea_width(region)
    shell = Region(region.dim, region.predicates + [ModulusBelow(f, eps)])
    norm = 1.0 / (np.pi * eps * eps)

    def integrand(x):
        g = f.holomorphic_gradient(to_complex(x))
        return norm * (np.abs(g) ** 2).sum(-1)

    est = integrate(integrand, shell, samples, seed, batches)
    flagged = est.value > 0 and est.rel_se > 0.2
    if flagged:
        log.warning("divisor_mass: relative SE %.2f exceeds 20%%; raise samples or eps", est.rel_se)
    return DivisorMass(est.value, est.se, eps, est, n, flagged)


def smooth_mass(phi: ScalarField, region: Region, samples: int = 1_000_000, seed: int = 0,
                batches: int = DEFAULT_BATCHES) -> MCEstimate:
    """Trace mass of ``i ddbar phi`` in ``region``."""
    return integrate(lambda x: trace_density_smooth(phi, to_complex(x)), region, samples,
                     seed, batches)


# --- parametrised varieties -------------------------------------------------------------

def _parameter_rule(domain: dict, k: int, nodes: int):
    """Quadrature nodes (complex, (Q, k)) and weights for the parameter domain."""
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes)
    kind = domain.get("type", "disc")
    if kind == "disc":
        if k != 1:
            raise ValueError("disc domains need exactly one complex parameter")
        R = float(domain["radius"])
        c = complex(*domain.get("center", (0.0, 0.0)))
        r = 0.5 * R * (gl_x + 1)
        wr = 0.5 * R * gl_w * r
        theta = (np.arange(nodes) + 0.5) * 2 * np.pi / nodes
        wt = np.full(nodes, 2 * np.pi / nodes)
        pts = c + (r[:, None] * np.exp(1j * theta)[None, :]).ravel()
        return pts[:, None], (wr[:, None] * wt[None, :]).ravel()
    if kind == "box":
        lo, hi = np.asarray(domain["lo"], float), np.asarray(domain["hi"], float)
        if lo.shape != (2 * k,):
            raise ValueError("box domain needs 2(n-1) real bounds (x then y)")
        axes = [0.5 * (b - a) * (gl_x + 1) + a for a, b in zip(lo, hi)]
        wts = [0.5 * (b - a) * gl_w for a, b in zip(lo, hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        wmesh = np.meshgrid(*wts, indexing="ij")
        real = np.stack([m.ravel() for m in mesh], -1)
        w = np.prod(np.stack([m.ravel() for m in wmesh], -1), -1)
        return to_complex(real), w
    raise ValueError(f"unknown parameter domain {kind!r}")


def variety_mass(pv: ParametrizedVariety, region: Region | None = None, nodes: int = 64) -> float:
    """Area of the parametrised hypersurface (inside ``region``), by tensor
    Gauss quadrature of ``det(J^* J)`` over the parameter domain."""
    k = pv.n - 1
    w, wt = _parameter_rule(pv.domain, k, nodes)
    img = np.stack([p.evaluate_real(to_real(w)) for p in pv.maps], -1)
    jac = np.stack([p.holomorphic_gradient(w) for p in pv.maps], -2)   # (Q, n, k)
    elem = np.real(np.linalg.det(np.conj(np.swapaxes(jac, -1, -2)) @ jac))
    if region is not None:
        elem = elem * region.contains(to_real(img))
    return float((elem * wt).sum())


def current_mass(current, region: Region, samples: int = 1_000_000, seed: int = 0,
                 batches: int = DEFAULT_BATCHES, eps: float | None = None):
    """Trace mass ``(value, se)`` of any supported current in ``region``."""
    if isinstance(current, Divisor):
        dm = divisor_mass(current.f, region, eps, samples, seed, batches)
        return dm.mass, dm.mass_se
    if isinstance(current, SmoothPotential):
        est = smooth_mass(current.phi, region, samples, seed, batches)
        return est.value, est.se
    if isinstance(current, ParametrizedVariety):
        return kappa(current.n) * variety_mass(current, region), 0.0
    raise TypeError(f"unsupported current {type(current).__name__}")
