"""Real submanifolds M = {rho = 0} of C^n, their tubes and tube weights."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from .forms import positivity_margin
from .jets import (ScalarField, SmoothMax, as_complex_points, positive_part_squared,
                   sqrt_field, square_field)
from .polynomial import Polynomial, to_complex, to_real

log = logging.getLogger(__name__)


class ChartMissingError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """Parametrisation of (a patch of) M by a box in R^d.

    ``map`` takes parameters ``(N, d)`` to real points ``(N, 2n)``;
    ``jacobian`` returns ``(N, 2n, d)``.
    """

    lo: np.ndarray
    hi: np.ndarray
    map: Callable
    jacobian: Callable
    description: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @classmethod
    def linear(cls, origin, basis, lo, hi) -> "Chart":
        origin = np.asarray(origin, float)
        basis = np.asarray(basis, float)          # (2n, d)
        return cls(np.asarray(lo, float), np.asarray(hi, float),
                   lambda u: origin + np.asarray(u) @ basis.T,
                   lambda u: np.broadcast_to(basis, np.asarray(u).shape[:-1] + basis.shape),
                   {"type": "linear", "origin": origin.tolist(), "basis": basis.tolist()})

    @classmethod
    def graph(cls, n: int, free, dependent: dict, lo, hi) -> "Chart":
        """Graph chart: free real coordinates are parameters, the others are
        polynomials (in the full real coordinates, only free ones used)."""
        free = list(free)
        dep = {int(k): v for k, v in dependent.items()}
        dim = 2 * n

        def embed(u):
            u = np.asarray(u, float)
            x = np.zeros(u.shape[:-1] + (dim,))
            x[..., free] = u
            return x

        def cmap(u):
            x = embed(u)
            for i, p in dep.items():
                x[..., i] = p.evaluate_real(x)
            return x

        def jac(u):
            x = embed(u)
            j = np.zeros(x.shape[:-1] + (dim, len(free)))
            for a, i in enumerate(free):
                j[..., i, a] = 1.0
            for i, p in dep.items():
                _, g, _ = p.real_derivs(x)
                j[..., i, :] = g[..., free]
            return j

        return cls(np.asarray(lo, float), np.asarray(hi, float), cmap, jac,
                   {"type": "graph", "free": free})

    def grid(self, per_axis: int) -> np.ndarray:
        axes = [np.linspace(a, b, per_axis) for a, b in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class WeightedPointCloud:
    points: np.ndarray      # complex (N, n)
    weights: np.ndarray     # (N,)

    def __post_init__(self):
        w = np.asarray(self.weights, float)
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", np.asarray(self.points, complex))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> tuple["WeightedPointCloud", float]:
        mass = self.total_mass
        return WeightedPointCloud(self.points, self.weights / mass), mass

    def __len__(self):
        return len(self.weights)


class DefiningSystem:
    """``M = {rho_1 = ... = rho_m = 0}`` inside the ball of radius ``domain_radius``."""

    def __init__(self, rho, domain_radius: float = 1.0, chart: Chart | None = None,
                 name: str = "", kind: str | None = None):
        self.rho = list(rho)
        if not self.rho:
            raise ValueError("need at least one defining function")
        self.n = self.rho[0].n
        for p in self.rho:
            if not isinstance(p, Polynomial) or not p.is_real or p.n != self.n:
                raise ValueError("defining functions must be real polynomials of equal dimension")
        if self.m > self.n:
            raise ValueError(
                f"codimension m={self.m} exceeds n={self.n}: the complex differentials of "
                f"{self.m} defining functions cannot be independent in C^{self.n}, so M is never "
                "generating")
        self.domain_radius = float(domain_radius)
        self.chart = chart
        self.name = name
        self.is_linear = all(p.degree <= 1 for p in self.rho)
        self.kind = kind or ("linear" if self.is_linear else "polynomial")
        if self.is_linear:
            lin = np.zeros((self.m, 2 * self.n))
            off = np.zeros(self.m)
            for j, p in enumerate(self.rho):
                for row, c in zip(p.exponents, p.coeffs):
                    if row.sum() == 0:
                        off[j] = c
                    else:
                        lin[j, int(np.argmax(row))] = c
            gram = lin @ lin.T
            evals, evecs = np.linalg.eigh(gram)
            if evals.min() <= 1e-14 * max(evals.max(), 1.0):
                raise ValueError("linear defining functions are dependent (d rho_1 ^ ... ^ d rho_m = 0)")
            whiten = evecs @ np.diag(evals ** -0.5) @ evecs.T
            self.normal_rows = whiten @ lin          # orthonormal rows
            self.normal_offset = whiten @ off

    @property
    def m(self) -> int:
        return len(self.rho)

    def require_chart(self) -> Chart:
        if self.chart is None:
            raise ChartMissingError(f"manifold {self.name or '<unnamed>'} has no chart")
        return self.chart

    def rho_values(self, x: np.ndarray) -> np.ndarray:
        return np.stack([p.evaluate_real(x) for p in self.rho], axis=-1)

    def rho_derivs(self, x: np.ndarray):
        vals, grads, hesss = zip(*(p.real_derivs(x) for p in self.rho))
        return np.stack(vals, -1), np.stack(grads, -2), np.stack(hesss, -3)

    def complex_differentials(self, z) -> np.ndarray:
        """Matrix ``(..., m, n)`` with rows ``d rho_j / d z_k``."""
        z = as_complex_points(z, self.n)
        return np.stack([p.jet(z).grad for p in self.rho], axis=-2)

    def __repr__(self):
        return f"DefiningSystem({self.name or self.kind}, n={self.n}, m={self.m})"


# --- generating condition -------------------------------------------------

def generating_rank(ds: DefiningSystem, p, tol: float = 1e-10):
    """Complex rank of ``(d rho_j)`` at ``p`` and its smallest singular value."""
    p = as_complex_points(p, ds.n)
    resid = np.abs(ds.rho_values(to_real(p))).max()
    if resid >= 1e-8:
        raise ValueError(f"point is not on M (|rho| = {resid:.3g})")
    sv = np.linalg.svd(ds.complex_differentials(p), compute_uv=False)
    rank = int((sv > tol * max(sv.max(), 1.0)).sum())
    return rank, float(sv.min())


@dataclass(frozen=True)
class GeneratingReport:
    generating: bool
    delta_min: float
    min_rank: int
    samples: int


def assert_generating(ds: DefiningSystem, samples: int = 400, seed: int = 0) -> GeneratingReport:
    """Test rank ``(d rho_j) = m`` at chart samples; ``delta_min`` is the
    smallest squared singular value seen."""
    chart = ds.require_chart()
    rng = np.random.default_rng(seed)
    u = rng.uniform(chart.lo, chart.hi, size=(samples, chart.dim))
    pts = to_complex(chart.map(u))
    sv = np.linalg.svd(ds.complex_differentials(pts), compute_uv=False)
    smax = max(sv.max(), 1.0)
    ranks = (sv > 1e-10 * smax).sum(axis=-1)
    min_rank = int(ranks.min())
    return GeneratingReport(min_rank == ds.m, float((sv[:, -1] ** 2).min()), min_rank, samples)


# --- distance ---------------------------------------------------------------

@dataclass
class DistanceInfo:
    distance: np.ndarray
    foot: np.ndarray          # real coordinates of the projected point
    converged: np.ndarray     # False where the grid fallback was used


def _seed_points(ds: DefiningSystem, x: np.ndarray, grid_per_axis: int):
    chart = ds.chart
    if chart is None:
        return _constraint_projection(ds, x.copy())
    key = ("grid", grid_per_axis)
    cache = ds.__dict__.setdefault("_grid_cache", {})
    if key not in cache:
        nodes = chart.map(chart.grid(grid_per_axis))
        cache[key] = (nodes, cKDTree(nodes))
    nodes, tree = cache[key]
    _, idx = tree.query(x)
    return nodes[idx]


def _constraint_projection(ds, p, iters: int = 30):
    """Minimal-norm Newton steps onto {rho = 0}; used to seed chart-free manifolds."""
    for _ in range(iters):
        r, g, _ = ds.rho_derivs(p)
        step = np.linalg.pinv(g) @ r[..., None]
        p = p - step[..., 0]
        if np.abs(r).max() < 1e-13:
            break
    return p


def distance(ds: DefiningSystem, z, *, max_iter: int = 50, tol: float = 1e-10,
             grid_per_axis: int = 20, return_info: bool = False):
    """Euclidean distance to ``{rho = 0}``.

    Linear systems use the closed form.  Otherwise the Lagrange system
    ``p - x + J^T lam = 0, rho(p) = 0`` is solved by Newton's method from the
    nearest chart-grid node; points that fail to converge fall back to the
    grid minimum and are flagged in ``DistanceInfo.converged``.
    """
    z = as_complex_points(z, ds.n)
    x = to_real(z)
    shape = x.shape[:-1]
    x = x.reshape(-1, 2 * ds.n)
    if ds.is_linear:
        r = x @ ds.normal_rows.T - ds.normal_offset
        d = np.linalg.norm(r, axis=-1)
        foot = x - r @ ds.normal_rows
        info = DistanceInfo(d.reshape(shape), foot.reshape(shape + (2 * ds.n,)),
                            np.ones(shape, bool))
        return info if return_info else info.distance

    dim, m = 2 * ds.n, ds.m
    seed = _seed_points(ds, x, grid_per_axis)
    p = seed.copy()
    _, g, _ = ds.rho_derivs(p)
    lam = np.einsum("nij,nj->ni", np.linalg.pinv(np.swapaxes(g, -1, -2)), x - p)
    converged = np.zeros(len(x), bool)
    active = np.arange(len(x))
    for _ in range(max_iter):
        if active.size == 0:
            break
        pa, la, xa = p[active], lam[active], x[active]
        r, g, h = ds.rho_derivs(pa)
        f1 = pa - xa + np.einsum("nji,nj->ni", g, la)
        f2 = r
        jac = np.zeros((len(active), dim + m, dim + m))
        jac[:, :dim, :dim] = np.eye(dim) + np.einsum("nj,njab->nab", la, h)
        jac[:, :dim, dim:] = np.swapaxes(g, -1, -2)
        jac[:, dim:, :dim] = g
        rhs = -np.concatenate([f1, f2], axis=-1)
        try:
            step = np.linalg.solve(jac, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.einsum("nij,nj->ni", np.linalg.pinv(jac), rhs)
        p[active] = pa + step[:, :dim]
        lam[active] = la + step[:, dim:]
        done = np.linalg.norm(step, axis=-1) < tol
        converged[active[done]] = True
        active = active[~done]
    resid = np.abs(ds.rho_values(p)).max(axis=-1) if len(p) else np.zeros(0)
    d = np.linalg.norm(p - x, axis=-1)
    seed_d = np.linalg.norm(seed - x, axis=-1)
    bad = ~converged | (resid > 1e-8) | (d > seed_d + 1e-12)
    if bad.any():
        log.debug("distance: %d of %d projections fell back to the grid", bad.sum(), len(x))
        p[bad] = seed[bad]
        d[bad] = seed_d[bad]
    info = DistanceInfo(d.reshape(shape), p.reshape(shape + (dim,)), (~bad).reshape(shape))
    return info if return_info else info.distance


# --- surface measure ----------------------------------------------------------

def gram_factor(jac: np.ndarray) -> np.ndarray:
    """``sqrt(det(J^T J))`` for a batch of ``(2n, d)`` Jacobians."""
    return np.sqrt(np.abs(np.linalg.det(np.swapaxes(jac, -1, -2) @ jac)))


def sample_surface(ds: DefiningSystem, box=None, N: int = 10000, seed: int = 0) -> WeightedPointCloud:
    """Pseudorandom points on the chart patch over ``box`` with area weights."""
    chart = ds.require_chart()
    if N <= 0:
        raise ValueError("N must be positive")
    lo, hi = (chart.lo, chart.hi) if box is None else map(np.asarray, box)
    rng = np.random.default_rng(seed)
    u = rng.uniform(lo, hi, size=(N, chart.dim))
    vol = float(np.prod(np.asarray(hi) - np.asarray(lo)))
    w = gram_factor(chart.jacobian(u)) * vol / N
    return WeightedPointCloud(to_complex(chart.map(u)), w)


def graded_surface_quadrature(ds: DefiningSystem, focus, box=None, *, levels: int = 20,
                              ratio: float = 0.5, order: int = 6) -> WeightedPointCloud:
    """Tensor Gauss-Legendre quadrature on a mesh graded geometrically toward
    the parameter point ``focus``; for integrands singular near one point."""
    chart = ds.require_chart()
    lo, hi = (chart.lo, chart.hi) if box is None else map(np.asarray, box)
    focus = np.asarray(focus, float)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    axes_pts, axes_w = [], []
    for a, b, f in zip(lo, hi, focus):
        breaks = {a, b, f}
        for side in (a, b):
            span = side - f
            for k in range(1, levels + 1):
                breaks.add(f + span * ratio ** k)
        br = np.array(sorted(v for v in breaks if a <= v <= b))
        left, right = br[:-1], br[1:]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        axes_pts.append((mid[:, None] + half[:, None] * nodes).ravel())
        axes_w.append((half[:, None] * weights).ravel())
    mesh = np.meshgrid(*axes_pts, indexing="ij")
    wmesh = np.meshgrid(*axes_w, indexing="ij")
    u = np.stack([g.ravel() for g in mesh], axis=-1)
    w = np.prod(np.stack([g.ravel() for g in wmesh], axis=-1), axis=-1)
    w = w * gram_factor(chart.jacobian(u))
    return WeightedPointCloud(to_complex(chart.map(u)), w)


# --- tube weights --------------------------------------------------------------

@dataclass(frozen=True)
class TubeWeight:
    w: Polynomial
    h: ScalarField
    v: ScalarField
    u_tilde: ScalarField
    u: ScalarField
    cutoff: ScalarField
    A: float
    inner_radius: float
    eps: float


def build_tube_weight(ds: DefiningSystem, A: float, inner_radius: float | None = None,
                      eps: float | None = None, seed: int = 0) -> TubeWeight:
    """``w = |rho|^2/2, h = sqrt(w), v = h + A w, u~ = v^2, u = smax(u~, f^2)``
    with the convex cutoff ``f = max(0, |z|^2 - R^2)^2``."""
    if A < 0:
        raise ValueError("A must be nonnegative")
    R = 0.8 * ds.domain_radius if inner_radius is None else float(inner_radius)
    if R >= ds.domain_radius:
        raise ValueError("inner_radius must be smaller than domain_radius")
    n = ds.n
    w = sum((p * p for p in ds.rho), Polynomial.constant(n, 0.0)) * 0.5
    h = sqrt_field(w)
    v = h + A * w if A else h
    u_tilde = square_field(v)
    cutoff = positive_part_squared(Polynomial.norm_squared(n) - R * R)
    if eps is None:
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(512, 2 * n))
        pts *= (ds.domain_radius * rng.uniform(size=(512, 1)) ** (1 / (2 * n))
                / np.linalg.norm(pts, axis=1, keepdims=True))
        wv = w.evaluate_real(pts)
        scale = float(np.max((np.sqrt(wv) + A * wv) ** 2))
        eps = 1e-6 * max(scale, 1e-12)
    u = SmoothMax(u_tilde, square_field(cutoff), eps)
    return TubeWeight(w, h, v, u_tilde, u, cutoff, float(A), R, float(eps))


def sample_tube(ds: DefiningSystem, N: int, t_max: float, seed: int = 0,
                inside_radius: float | None = None) -> np.ndarray:
    """Points ``p + nu`` with ``p`` on the chart patch and ``nu`` a normal
    vector of length ``< t_max``; every point lies in the tube ``U_{t_max}``."""
    chart = ds.require_chart()
    rng = np.random.default_rng(seed)
    u = rng.uniform(chart.lo, chart.hi, size=(N, chart.dim))
    base = chart.map(u)
    _, g, _ = ds.rho_derivs(base)
    q, _ = np.linalg.qr(np.swapaxes(g, -1, -2))      # (N, 2n, m) orthonormal normals
    xi = rng.normal(size=(N, ds.m))
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    xi *= t_max * rng.uniform(1e-6, 1.0, size=(N, 1)) ** (1.0 / ds.m)
    pts = base + np.einsum("nij,nj->ni", q, xi)
    if inside_radius is not None:
        pts = pts[np.linalg.norm(pts, axis=1) < inside_radius]
    return to_complex(pts)


@dataclass(frozen=True)
class PshReport:
    delta_prime: float
    min_sqrt_coeff: float
    points: int
    t_max: float
    A: float

    @property
    def passed(self) -> bool:
        return self.delta_prime > 0 and self.min_sqrt_coeff >= -1e-8


def verify_psh_bound(tw: TubeWeight, ds: DefiningSystem, samples: int = 2000,
                     t_max: float = 0.1, seed: int = 0) -> PshReport:
    """Measure the comparability constant of ``(i ddbar u~)^(m-1) ^ beta^(n-m)``
    against ``beta^(n-1)`` and the positivity of the same power of
    ``i ddbar u~^(1/2)`` at tube samples inside the inner ball."""
    z = sample_tube(ds, samples, t_max, seed=seed, inside_radius=tw.inner_radius)
    if len(z) == 0:
        raise ValueError("no tube samples inside the inner ball")
    k = ds.m - 1
    hu = tw.u_tilde.jet(z).hess
    hv = tw.v.jet(z).hess
    delta = positivity_margin([hu] * k, ds.n)
    sqrt_coeff = positivity_margin([hv] * k, ds.n)
    return PshReport(float(np.min(delta)), float(np.min(sqrt_coeff)), len(z), t_max, tw.A)


A_SWEEP = (1.0, 4.0, 16.0, 64.0, 256.0)


def select_A(ds: DefiningSystem, t_max: float, candidates=A_SWEEP, samples: int = 2000,
             seed: int = 0, inner_radius: float | None = None):
    """Smallest sweep value of A whose tube weight passes ``verify_psh_bound``."""
    for A in candidates:
        tw = build_tube_weight(ds, A, inner_radius)
        rep = verify_psh_bound(tw, ds, samples, t_max, seed)
        if rep.passed:
            return A, rep
    return None, rep


def find_t0(ds: DefiningSystem, A: float, candidates=None, samples: int = 2000,
            seed: int = 0, inner_radius: float | None = None) -> float | None:
    """Largest candidate radius such that the bound passes at it and all smaller ones."""
    if candidates is None:
        candidates = np.geomspace(0.01, 0.5 * ds.domain_radius, 8)
    tw = build_tube_weight(ds, A, inner_radius)
    t0 = None
    for t in sorted(candidates):
        if not verify_psh_bound(tw, ds, samples, float(t), seed).passed:
            break
        t0 = float(t)
    return t0
