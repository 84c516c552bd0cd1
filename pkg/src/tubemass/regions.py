"""Integration regions as intersections of sublevel sets ``{g < threshold}``.

Each predicate evaluates exactly at points and gives conservative lower and
upper bounds of ``g`` over axis-aligned boxes in R^{2n}.  ``cover`` refines a
starting box into cells that may meet the region, splitting boundary cells
along the axis that dominates their bound slack, so thin regions (tubes of
small radius, coarea shells ``|f| < eps``) are covered tightly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifold import DefiningSystem, TubeWeight, distance
from .polynomial import Polynomial, to_complex


class Predicate:
    threshold: float

    def value(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def contains(self, x: np.ndarray) -> np.ndarray:
        return self.value(x) < self.threshold

    def bounds(self, c: np.ndarray, h: np.ndarray):
        """``(lower, upper, per_axis_slack)`` over the boxes ``c +- h``."""
        raise NotImplementedError

    def bbox(self):
        return None

    @property
    def thickness(self) -> float:
        return 2.0 * self.threshold


def _interval_abs(c, h):
    lo = np.maximum(np.abs(c) - h, 0.0)
    hi = np.abs(c) + h
    return lo, hi


class Ball(Predicate):
    def __init__(self, center, radius: float):
        self.center = np.asarray(center, float)
        self.threshold = float(radius)

    def value(self, x):
        return np.linalg.norm(x - self.center, axis=-1)

    def bounds(self, c, h):
        lo, hi = _interval_abs(c - self.center, h)
        slack = (hi ** 2 - lo ** 2) / (2 * self.threshold)
        return np.sqrt((lo ** 2).sum(-1)), np.sqrt((hi ** 2).sum(-1)), slack

    def bbox(self):
        return self.center - self.threshold, self.center + self.threshold


class HalfSpace(Predicate):
    """``<normal, x> < offset`` (used to cut regions in half)."""

    def __init__(self, normal, offset: float = 0.0):
        self.normal = np.asarray(normal, float)
        self.threshold = float(offset)

    def value(self, x):
        return x @ self.normal

    def bounds(self, c, h):
        v = c @ self.normal
        r = np.abs(self.normal) * h
        return v - r.sum(-1), v + r.sum(-1), r

    @property
    def thickness(self):
        return np.inf


class LinearTube(Predicate):
    """Distance to a linear manifold below ``t`` (closed form)."""

    def __init__(self, ds: DefiningSystem, t: float):
        if not ds.is_linear:
            raise ValueError("LinearTube needs a linear manifold")
        self.rows, self.off, self.threshold = ds.normal_rows, ds.normal_offset, float(t)

    def value(self, x):
        return np.linalg.norm(x @ self.rows.T - self.off, axis=-1)

    def bounds(self, c, h):
        v = c @ self.rows.T - self.off
        rad = h @ np.abs(self.rows).T
        lo, hi = _interval_abs(v, rad)
        slack = h * np.abs(self.rows).sum(0)
        return np.linalg.norm(lo, axis=-1), np.linalg.norm(hi, axis=-1), slack


class LipschitzTube(Predicate):
    """Distance to a curved manifold below ``t``; uses that distance is 1-Lipschitz."""

    def __init__(self, ds: DefiningSystem, t: float):
        self.ds, self.threshold = ds, float(t)

    def value(self, x):
        return distance(self.ds, to_complex(x))

    def bounds(self, c, h):
        d = self.value(c)
        r = np.linalg.norm(h, axis=-1)
        return np.maximum(d - r, 0.0), d + r, h


class ConvexTube(Predicate):
    """Distance in C^n to a convex body ``K`` of R^n (point, ball, box or segment)."""

    def __init__(self, body: "ConvexBody", t: float):
        self.body, self.threshold = body, float(t)

    def value(self, x):
        n = x.shape[-1] // 2
        return np.sqrt((x[..., n:] ** 2).sum(-1) + self.body.distance(x[..., :n]) ** 2)

    def bounds(self, c, h):
        n = c.shape[-1] // 2
        ylo, yhi = _interval_abs(c[..., n:], h[..., n:])
        dlo, dhi = self.body.distance_bounds(c[..., :n], h[..., :n])
        lo = np.sqrt((ylo ** 2).sum(-1) + dlo ** 2)
        hi = np.sqrt((yhi ** 2).sum(-1) + dhi ** 2)
        return lo, hi, h

    def bbox(self):
        lo, hi = self.body.bbox()
        t = self.threshold
        n = len(lo)
        return (np.concatenate([lo - t, -t * np.ones(n)]),
                np.concatenate([hi + t, t * np.ones(n)]))


class ModulusBelow(Predicate):
    """``|f| < eps`` for a (complex-coefficient) polynomial ``f``."""

    def __init__(self, f: Polynomial, eps: float):
        self.f, self.threshold = f, float(eps)

    def value(self, x):
        return np.abs(self.f.evaluate_real(x))

    def bounds(self, c, h):
        v, b, per_axis = self.f.taylor_bound(c, h)
        a = np.abs(v)
        return np.maximum(a - b, 0.0), a + b, per_axis


class WeightLevel(Predicate):
    """``sqrt(u) < t`` for a tube weight, bounded through ``|rho_j|`` and ``|z|``."""

    def __init__(self, tw: TubeWeight, ds: DefiningSystem, t: float):
        self.tw, self.ds, self.threshold = tw, ds, float(t)

    def value(self, x):
        return np.sqrt(self.tw.u.value(to_complex(x)))

    def _v_from_w(self, w):
        return np.sqrt(w) + self.tw.A * w

    def bounds(self, c, h):
        wlo = np.zeros(c.shape[:-1])
        whi = np.zeros(c.shape[:-1])
        slack = np.zeros(c.shape)
        for p in self.ds.rho:
            v, b, per_axis = p.taylor_bound(c, h)
            lo, hi = _interval_abs(v, b)
            wlo += 0.5 * lo ** 2
            whi += 0.5 * hi ** 2
            slack += per_axis
        R2 = self.tw.inner_radius ** 2
        rlo, rhi = _interval_abs(c, h)
        qlo = (rlo ** 2).sum(-1) - R2
        qhi = (rhi ** 2).sum(-1) - R2
        flo = np.maximum(qlo, 0.0) ** 2
        fhi = np.maximum(qhi, 0.0) ** 2
        lower = np.maximum(self._v_from_w(wlo), flo)
        # smooth max exceeds the max by at most eps/2
        upper = np.sqrt(np.maximum(self._v_from_w(whi), fhi) ** 2 + 0.5 * self.tw.eps)
        slack = slack + (rhi ** 2 - rlo ** 2) * (fhi > 0)[..., None]
        return lower, upper, slack


# --- convex bodies in R^n ----------------------------------------------------------

class ConvexBody:
    def distance(self, x):
        raise NotImplementedError

    def distance_bounds(self, c, h):
        d = self.distance(c)
        r = np.linalg.norm(h, axis=-1)
        return np.maximum(d - r, 0.0), d + r

    def bbox(self):
        raise NotImplementedError


@dataclass(frozen=True)
class BallBody(ConvexBody):
    center: np.ndarray
    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("ball radius must be nonnegative")
        object.__setattr__(self, "center", np.asarray(self.center, float))

    def distance(self, x):
        return np.maximum(np.linalg.norm(x - self.center, axis=-1) - self.radius, 0.0)

    def distance_bounds(self, c, h):
        lo, hi = _interval_abs(c - self.center, h)
        return (np.maximum(np.sqrt((lo ** 2).sum(-1)) - self.radius, 0.0),
                np.maximum(np.sqrt((hi ** 2).sum(-1)) - self.radius, 0.0))

    def bbox(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True)
class BoxBody(ConvexBody):
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = np.asarray(self.lo, float), np.asarray(self.hi, float)
        if lo.shape != hi.shape or (lo > hi).any():
            raise ValueError("box needs lo <= hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def distance(self, x):
        gap = np.maximum(np.maximum(self.lo - x, x - self.hi), 0.0)
        return np.linalg.norm(gap, axis=-1)

    def distance_bounds(self, c, h):
        a, b = c - h, c + h
        gmin = np.maximum(np.maximum(self.lo - b, a - self.hi), 0.0)
        gmax = np.maximum(np.maximum(self.lo - a, b - self.hi), 0.0)
        return np.linalg.norm(gmin, axis=-1), np.linalg.norm(gmax, axis=-1)

    def bbox(self):
        return self.lo, self.hi


@dataclass(frozen=True)
class SegmentBody(ConvexBody):
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, float))
        object.__setattr__(self, "b", np.asarray(self.b, float))

    def distance(self, x):
        ab = self.b - self.a
        L2 = float(ab @ ab)
        s = np.clip(((x - self.a) @ ab) / L2, 0.0, 1.0) if L2 > 0 else np.zeros(x.shape[:-1])
        return np.linalg.norm(x - self.a - s[..., None] * ab, axis=-1)

    def bbox(self):
        return np.minimum(self.a, self.b), np.maximum(self.a, self.b)


def convex_body(spec: dict, n: int) -> ConvexBody:
    """Build a convex body from ``{"type": "point"|"ball"|"box"|"segment", ...}``."""
    kind = spec.get("type")
    if kind == "point":
        return BallBody(np.asarray(spec.get("center", np.zeros(n)), float), 0.0)
    if kind == "ball":
        return BallBody(np.asarray(spec.get("center", np.zeros(n)), float), float(spec["radius"]))
    if kind == "box":
        return BoxBody(spec["lo"], spec["hi"])
    if kind == "segment":
        return SegmentBody(spec["a"], spec["b"])
    raise ValueError(f"unsupported or non-convex body {kind!r}")


# --- region and cover ---------------------------------------------------------------

class Region:
    """Intersection of predicates in R^{2n}."""

    def __init__(self, dim: int, predicates):
        self.dim = dim
        self.predicates = list(predicates)

    def contains(self, x):
        inside = np.ones(x.shape[:-1], bool)
        for p in self.predicates:
            inside &= p.contains(x)
        return inside

    def bbox(self):
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for p in self.predicates:
            b = p.bbox()
            if b is not None:
                lo, hi = np.maximum(lo, b[0]), np.minimum(hi, b[1])
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("region is unbounded; add a ball or convex-body predicate")
        return lo, hi

    @property
    def thickness(self) -> float:
        return min(p.thickness for p in self.predicates)

    def __and__(self, other: "Region") -> "Region":
        return Region(self.dim, self.predicates + other.predicates)


@dataclass
class Cover:
    centers: np.ndarray
    halfwidths: np.ndarray
    interior: np.ndarray

    @property
    def volumes(self) -> np.ndarray:
        return np.prod(2 * self.halfwidths, axis=-1)

    @property
    def volume(self) -> float:
        return float(self.volumes.sum())

    def __len__(self):
        return len(self.centers)


def cover(region: Region, max_cells: int = 1 << 15, max_rounds: int = 200) -> Cover:
    """Boxes covering ``region``; interior cells are certified inside it."""
    lo, hi = region.bbox()
    c = (0.5 * (lo + hi))[None, :]
    h = (0.5 * (hi - lo))[None, :]
    for _ in range(max_rounds):
        keep = np.ones(len(c), bool)
        inside = np.ones(len(c), bool)
        score = np.zeros(c.shape)
        for p in region.predicates:
            plo, phi, slack = p.bounds(c, h)
            keep &= plo < p.threshold
            boundary = phi >= p.threshold
            inside &= ~boundary
            score += np.where(boundary[:, None], slack / p.threshold, 0.0)
        c, h, inside, score = c[keep], h[keep], inside[keep], score[keep]
        nb = int((~inside).sum())
        if nb == 0 or len(c) + nb > max_cells:
            break
        b = ~inside
        axis = np.argmax(score[b], axis=1)
        cb, hb = c[b], h[b].copy()
        rows = np.arange(len(cb))
        hb[rows, axis] *= 0.5
        shift = np.zeros_like(cb)
        shift[rows, axis] = hb[rows, axis]
        c = np.concatenate([c[inside], cb - shift, cb + shift])
        h = np.concatenate([h[inside], hb, hb])
        inside = np.concatenate([inside[inside], np.zeros(2 * len(cb), bool)])
    return Cover(c, h, inside)
