"""Seeded, batch-replicated Monte Carlo over a cell cover.

Each batch places its points by systematic sampling over the cumulative cell
volumes (a stratified design: every cell receives its proportional share up
to one point), uniformly inside each cell.  Batches use independent child
seeds; the standard error comes from the spread of the batch estimates.
Results do not depend on the number of worker threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .regions import Cover, Region, cover as build_cover

DEFAULT_BATCHES = 32


def worker_count() -> int:
    env = os.environ.get("TUBEMASS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MCEstimate:
    value: float
    se: float
    batch_values: np.ndarray
    samples: int
    cover_volume: float
    hits: int

    @property
    def rel_se(self) -> float:
        return self.se / abs(self.value) if self.value else np.inf


def _batch_points(cov: Cover, count: int, rng: np.random.Generator) -> np.ndarray:
    vols = cov.volumes
    cum = np.cumsum(vols)
    total = cum[-1]
    offsets = (np.arange(count) + rng.uniform()) / count * total
    idx = np.minimum(np.searchsorted(cum, offsets, side="right"), len(vols) - 1)
    u = rng.uniform(-1.0, 1.0, size=(count, cov.centers.shape[1]))
    return cov.centers[idx] + u * cov.halfwidths[idx]


def integrate(integrand: Callable[[np.ndarray], np.ndarray], region: Region, samples: int,
              seed: int, batches: int = DEFAULT_BATCHES, cov: Cover | None = None,
              max_cells: int = 1 << 15) -> MCEstimate:
    """Estimate ``int_region integrand d(lambda)`` (Lebesgue on R^{2n}).

    ``integrand`` receives real points ``(N, 2n)`` already known to lie in
    ``region`` and returns values ``(N,)``.
    """
    if cov is None:
        cov = build_cover(region, max_cells=max_cells)
    if len(cov) == 0:
        return MCEstimate(0.0, 0.0, np.zeros(batches), samples, 0.0, 0)
    total = cov.volume
    per_batch = max(1, samples // batches)
    children = np.random.SeedSequence(seed).spawn(batches)

    def run(child):
        rng = np.random.default_rng(child)
        x = _batch_points(cov, per_batch, rng)
        inside = region.contains(x)
        vals = np.zeros(per_batch)
        if inside.any():
            vals[inside] = integrand(x[inside])
        return total * vals.mean(), int(inside.sum())

    workers = min(worker_count(), batches)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, children))
    else:
        results = [run(c) for c in children]
    est = np.array([r[0] for r in results])
    hits = sum(r[1] for r in results)
    se = float(est.std(ddof=1) / np.sqrt(batches)) if batches > 1 else np.inf
    return MCEstimate(float(est.mean()), se, est, per_batch * batches, total, hits)
