"""Zeros of a holomorphic polynomial on M, separated packings, and the
packing and Hausdorff-measure estimates built on them."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from math import gamma, pi, factorial
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .currents import divisor_mass
from .manifold import DefiningSystem
from .polynomial import Polynomial, to_complex, to_real
from .regions import Ball, BoxBody, ConvexTube, Region

log = logging.getLogger(__name__)

ZERO_TOL = 1e-10


# --- zeros on M ---------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroSearch:
    points: np.ndarray          # complex (N, n)
    params: np.ndarray          # chart parameters (N, d)
    skipped: int
    seeds: int


def _restricted(f: Polynomial, chart, u):
    """Value ``(Re f, Im f)`` of ``f o chart`` and its real Jacobian ``(N, 2, d)``."""
    x = chart.map(u)
    val = f.evaluate_real(x)
    g = f.holomorphic_gradient(to_complex(x))              # df/dz_k
    # df/dx_k = g_k, df/dy_k = i g_k for holomorphic f
    dreal = np.concatenate([g, 1j * g], axis=-1)          # (N, 2n)
    jac = np.einsum("ni,nid->nd", dreal, chart.jacobian(u))
    F = np.stack([val.real, val.imag], -1)
    J = np.stack([jac.real, jac.imag], -2)
    return F, J


def _newton(f, chart, u, iters: int = 40):
    u = np.array(u, float)
    active = np.ones(len(u), bool)
    for _ in range(iters):
        if not active.any():
            break
        F, J = _restricted(f, chart, u[active])
        step = np.einsum("nij,nj->ni", np.linalg.pinv(J), F)
        u[active] -= step
        res = np.linalg.norm(F, axis=-1)
        done = (res < ZERO_TOL * 1e-2) | (np.linalg.norm(step, axis=-1) < 1e-15)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    F, _ = _restricted(f, chart, u)
    ok = np.isfinite(F).all(-1) & (np.linalg.norm(F, axis=-1) < ZERO_TOL)
    return u, ok


def zeros_on_M(f: Polynomial, ds: DefiningSystem, K=None, grid: int = 200) -> ZeroSearch:
    """Points of ``{f = 0}`` on ``M`` over the chart sub-box ``K = (lo, hi)``.

    Seeds are the chart grid nodes where ``|f|`` is below its first-order
    variation across a cell; each seed is refined by minimum-norm Newton on
    ``f o chart``.  Seeds that fail are retried from the centres of their
    ``2^d`` sub-cells; failures after that are counted in ``skipped``.
    """
    chart = ds.require_chart()
    lo, hi = (chart.lo, chart.hi) if K is None else (np.asarray(K[0], float), np.asarray(K[1], float))
    d = chart.dim
    axes = [np.linspace(a, b, grid) for a, b in zip(lo, hi)]
    step = (hi - lo) / (grid - 1)
    nodes = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], -1)
    F, J = _restricted(f, chart, nodes)
    reach = np.linalg.norm(J, axis=(-2, -1)) * np.linalg.norm(step) * 0.5
    seeds = nodes[np.linalg.norm(F, axis=-1) <= reach]
    if len(seeds) == 0:
        return ZeroSearch(np.zeros((0, ds.n), complex), np.zeros((0, d)), 0, 0)
    u, ok = _newton(f, chart, seeds)
    found = [u[ok]]
    skipped = 0
    bad = seeds[~ok]
    if len(bad):
        corners = np.stack(np.meshgrid(*[[-0.25, 0.25]] * d, indexing="ij"), -1).reshape(-1, d)
        sub = (bad[:, None, :] + corners[None] * step).reshape(-1, d)
        u2, ok2 = _newton(f, chart, sub)
        found.append(u2[ok2])
        skipped = int((~ok2.reshape(len(bad), -1).any(-1)).sum())
    u = np.concatenate(found)
    inside = np.all((u >= lo - 1e-12) & (u <= hi + 1e-12), axis=-1)
    u = u[inside]
    if skipped:
        log.info("zeros_on_M: %d seeds skipped after subdivision", skipped)
    return ZeroSearch(to_complex(chart.map(u)), u, skipped, len(seeds))


# --- packings ----------------------------------------------------------------------------

@dataclass(frozen=True)
class PackingResult:
    epsilon: float
    points: np.ndarray
    maximal: bool

    @property
    def N(self) -> int:
        return len(self.points)


def _chain_order(x: np.ndarray) -> np.ndarray:
    """Nearest-neighbour walk starting from the lexicographically smallest point."""
    order = np.empty(len(x), int)
    left = np.ones(len(x), bool)
    cur = int(np.lexsort(x.T[::-1])[0])
    for k in range(len(x)):
        order[k] = cur
        left[cur] = False
        if k + 1 < len(x):
            rest = np.flatnonzero(left)
            cur = int(rest[np.argmin(((x[rest] - x[cur]) ** 2).sum(-1))])
    return order


def greedy_pack(points, separation: float, order: str = "input", seed: int = 0) -> PackingResult:
    """Greedy maximal subset with pairwise distances ``> separation`` (= 2 eps).

    ``order`` is ``"input"``, ``"shuffle"`` (seeded permutation) or
    ``"chain"`` (nearest-neighbour walk, which packs curves tightly).
    """
    if separation <= 0:
        raise ValueError("separation must be positive")
    pts = np.asarray(points)
    x = to_real(pts) if np.iscomplexobj(pts) else np.asarray(pts, float)
    eps = separation / 2
    if len(x) == 0:
        return PackingResult(eps, pts[:0], True)
    if order == "shuffle":
        idx = np.random.default_rng(seed).permutation(len(x))
    elif order == "chain":
        idx = _chain_order(x)
    elif order == "input":
        idx = np.arange(len(x))
    else:
        raise ValueError(f"unknown order {order!r}")
    tree = cKDTree(x)
    blocked = np.zeros(len(x), bool)
    chosen = []
    for i in idx:
        if blocked[i]:
            continue
        chosen.append(i)
        blocked[tree.query_ball_point(x[i], separation)] = True
    chosen = np.array(chosen, int)
    sel = x[chosen]
    if len(sel) > 1:
        dmin = cKDTree(sel).query(sel, k=2)[0][:, 1].min()
        assert dmin > separation, "packing separation violated"
    return PackingResult(eps, pts[chosen], True)


def packing_bound(pr: PackingResult, massV: float, n: int, m: int) -> float:
    """``N eps^(2n-1-m) / |V|``."""
    if massV <= 0:
        if pr.N > 0:
            raise ValueError("zeros found on M but |V| = 0 in the neighbourhood")
        return 0.0
    return pr.N * pr.epsilon ** (2 * n - 1 - m) / massV


def unit_ball_volume(p: int) -> float:
    return pi ** (p / 2) / gamma(p / 2 + 1)


@dataclass(frozen=True)
class HausdorffRow:
    epsilon: float
    N: int
    C_measured: float
    hausdorff_p: int
    hausdorff_estimate: float
    coarse: bool


def neighbourhood(ds: DefiningSystem, K, eps0: float | None = None) -> Region:
    """The fixed neighbourhood of ``chart(K)`` in which ``|V|`` is measured."""
    chart = ds.require_chart()
    lo, hi = (chart.lo, chart.hi) if K is None else (np.asarray(K[0], float), np.asarray(K[1], float))
    if eps0 is None:
        eps0 = 0.2 * float(np.linalg.norm(hi - lo))
    n = ds.n
    desc = chart.description
    basis = np.asarray(desc.get("basis", np.zeros((2 * n, 0))))
    if (desc.get("type") == "linear" and basis.shape == (2 * n, n)
            and np.allclose(basis[:n], np.eye(n)) and not np.any(basis[n:])
            and not np.any(desc["origin"])):
        return Region(2 * n, [ConvexTube(BoxBody(lo, hi), eps0)])
    img = chart.map(np.stack([m.ravel() for m in np.meshgrid(
        *[np.linspace(a, b, 9) for a, b in zip(lo, hi)], indexing="ij")], -1))
    c = img.mean(0)
    return Region(2 * n, [Ball(c, np.linalg.norm(img - c, axis=1).max() + eps0)])


def hausdorff_estimate(f: Polynomial, ds: DefiningSystem, K, eps_grid, p: int | None = None,
                       grid: int | None = None, massV: float | None = None,
                       samples: int = 1_000_000, seed: int = 0):
    """Packing counts, the rearranged packing constant and ``c_p N eps^p``
    for every ``eps`` in ``eps_grid``.

    By default the zero search grid resolves the smallest ``eps`` eightfold
    (capped at four million nodes), so packings along the zero set are tight.
    """
    n, m = ds.n, ds.m
    if p is None:
        p = 2 * n - m - 1
    if p < 0:
        raise ValueError("p must be nonnegative")
    if grid is None:
        chart = ds.require_chart()
        lo, hi = (chart.lo, chart.hi) if K is None else (np.asarray(K[0]), np.asarray(K[1]))
        want = int(np.ceil(np.max(hi - lo) / (min(eps_grid) / 8))) + 1
        grid = max(50, min(want, int(4e6 ** (1 / chart.dim))))
    zs = zeros_on_M(f, ds, K, grid)
    if massV is None:
        massV = divisor_mass(f, neighbourhood(ds, K), samples=samples, seed=seed).area
    cp = unit_ball_volume(p)
    rows = []
    for eps in eps_grid:
        pr = greedy_pack(zs.points, 2 * eps, order="chain")
        C = packing_bound(pr, massV, n, m) if pr.N else 0.0
        coarse = 0 < pr.N < 5
        if coarse:
            log.warning("hausdorff_estimate: only %d packing points at eps=%g", pr.N, eps)
        rows.append(HausdorffRow(float(eps), pr.N, C, p, cp * pr.N * eps ** p, coarse))
    return rows, massV


def write_rows(rows, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epsilon", "N", "C_measured", "hausdorff_p", "hausdorff_estimate"])
        for r in rows:
            w.writerow([repr(r.epsilon), r.N, repr(r.C_measured), r.hausdorff_p,
                        repr(r.hausdorff_estimate)])
    return path


# --- minimality of linear area ------------------------------------------------------------

@dataclass(frozen=True)
class BallAreaReport:
    ratio: float
    ratio_se: float
    verdict: str


def ball_area_bound(f: Polynomial, z0, eps: float, samples: int = 1_000_000,
                    seed: int = 0) -> BallAreaReport:
    """Area of ``V`` in ``B(z0, eps)`` over the area of a flat
    ``(n-1)``-dimensional complex disc of the same radius."""
    z0 = np.asarray(z0, complex).reshape(1, -1)
    if abs(f.value(z0)[0]) >= ZERO_TOL:
        raise ValueError("centre does not lie on V")
    n = f.n
    dm = divisor_mass(f, Region(2 * n, [Ball(to_real(z0)[0], eps)]), samples=samples, seed=seed)
    flat = pi ** (n - 1) * eps ** (2 * n - 2) / factorial(n - 1)
    ratio, se = dm.area / flat, dm.area_se / flat
    if ratio == 0 or se / ratio > 0.05:
        verdict = "inconclusive"
    else:
        verdict = "pass" if ratio + 3 * se >= 0.98 else "fail"
    return BallAreaReport(ratio, se, verdict)
