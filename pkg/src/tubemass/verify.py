"""The built-in acceptance suite: seventeen numbered checks with tags."""
from __future__ import annotations

import csv
import filecmp
import json
import logging
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import library
from .currents import divisor_mass, kappa
from .forms import wedge_coefficient, wedge_coefficient_bruteforce
from .jets import log_field, sqrt_field
from .manifold import (WeightedPointCloud, assert_generating, build_tube_weight, find_t0,
                       select_A, verify_psh_bound)
from .polynomial import Polynomial, to_complex
from .potentials import nu_monotone, radial_mass
from .regions import Ball, Region
from .runner import EXPECTED_VIOLATION, run_scenario
from .scenario import Scenario, bundled_dir, content_hash, load
from .zero_geometry import ball_area_bound

log = logging.getLogger(__name__)


@dataclass
class CriterionResult:
    number: int
    tag: str
    title: str
    passed: bool
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{mark}] {self.number:02d} {self.tag:<13s} {self.title}: {shown}"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.4g}"
    return str(v)


class Context:
    """Shared state for one suite run: output directory, seed, scenario runner."""

    def __init__(self, out: Path, seed: int = 0):
        self.out = out
        self.seed = seed
        self._reports = {}

    def scenario(self, name: str):
        if name not in self._reports:
            sc = load(bundled_dir() / f"{name}.json")
            if self.seed:
                cfg = dict(sc.config, seed=sc.config["seed"] + self.seed)
                raw = json.dumps(cfg, sort_keys=True).encode()
                sc = Scenario(cfg, content_hash(raw), sc.path)
            self._reports[name] = run_scenario(sc, self.out / "scenarios" / name)
        return self._reports[name]

    def rng(self, number: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, number])


# --- individual criteria ---------------------------------------------------------------------

def _random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return 0.5 * (a + a.conj().T)


def c01_forms(ctx: Context) -> CriterionResult:
    rng = ctx.rng(1)
    worst = 0.0
    start = time.perf_counter()
    for _ in range(100):
        n = int(rng.integers(1, 4))
        k = int(rng.integers(1, n + 1))
        mats = [_random_hermitian(rng, n) for _ in range(k)]
        ref = wedge_coefficient_bruteforce(mats, n)
        # the scale of the multilinear form guards against cancellation to ~0
        scale = max(abs(ref), np.prod([np.abs(m).max() for m in mats]))
        worst = max(worst, abs(wedge_coefficient(mats, n) - ref) / scale)
    elapsed = time.perf_counter() - start
    return CriterionResult(1, "forms", "wedge coefficient vs exterior-algebra oracle",
                           worst < 1e-10 and elapsed < 5, {"max_rel_error": worst})


def _fd_jet(field, x, h=1e-3):
    """Complex gradient and mixed Hessian by Richardson-extrapolated central differences."""
    d = x.shape[1]
    f = lambda p: np.real(field.value(to_complex(p)))

    def once(step):
        g = np.zeros((len(x), d))
        H = np.zeros((len(x), d, d))
        E = np.eye(d) * step
        for i in range(d):
            g[:, i] = (f(x + E[i]) - f(x - E[i])) / (2 * step)
            for j in range(i, d):
                v = (f(x + E[i] + E[j]) - f(x + E[i] - E[j]) - f(x - E[i] + E[j])
                     + f(x - E[i] - E[j])) / (4 * step * step)
                H[:, i, j] = H[:, j, i] = v
        return g, H

    g1, H1 = once(h)
    g2, H2 = once(h / 2)
    g, H = (4 * g2 - g1) / 3, (4 * H2 - H1) / 3
    n = d // 2
    gc = 0.5 * (g[:, :n] - 1j * g[:, n:])
    hxx, hyy, hxy = H[:, :n, :n], H[:, n:, n:], H[:, :n, n:]
    hc = 0.25 * (hxx + hyy + 1j * (hxy - np.swapaxes(hxy, -1, -2)))
    return gc, hc


def _jet_fields():
    """Bundled real-valued fields with a sampler avoiding their non-smooth sets."""
    out = []
    for n in (2, 3):
        out.append((f"|z|^2 (n={n})", Polynomial.norm_squared(n), None))
    z1, z2 = Polynomial.z(2, 0), Polynomial.z(2, 1)
    out.append(("Re(z1^2 zbar2) + |z1 z2|^2", (z1 * z1 * z2.conj()).real_part + z1 * z2 * (z1 * z2).conj(), None))
    out.append(("log(|z1|^2 + 0.01)", log_field(z1 * z1.conj() + 0.01), None))
    for ds in (library.real_space(2), library.curved_totally_real(), library.small_graph()):
        tw = build_tube_weight(ds, 4.0)
        away = (lambda ds_: lambda x: np.sqrt(sum(np.real(p.evaluate_real(x)) ** 2 for p in ds_.rho)) > 0.1)(ds)
        for name in ("w", "h", "v", "u_tilde"):
            out.append((f"{name} on {ds.name}", getattr(tw, name), away))
        # max(0, |z|^2 - R^2)^2 is only C^1 across the sphere |z| = R
        shell = (lambda R: lambda x: np.abs(np.linalg.norm(x, axis=1) - R) > 0.02)(tw.inner_radius)
        out.append((f"cutoff on {ds.name}", tw.cutoff, shell))
        # keep the regularised maximum away from its switching layer
        gap = (lambda tw_: lambda x: np.abs(np.real(tw_.u_tilde.value(to_complex(x)))
                                            - np.real(tw_.cutoff.value(to_complex(x))) ** 2) > 1e-2)(tw)
        out.append((f"u on {ds.name}", tw.u, lambda x, a=away, g=gap: a(x) & g(x)))
    out.append(("sqrt(1 + |z|^2)", sqrt_field(Polynomial.norm_squared(2) + 1.0), None))
    return out


def c02_jets(ctx: Context) -> CriterionResult:
    rng = ctx.rng(2)
    worst, where = 0.0, ""
    for name, fld, keep in _jet_fields():
        n = fld.n
        x = rng.uniform(-1, 1, size=(4000, 2 * n))
        x = x[np.linalg.norm(x, axis=1) < 1.0]
        if keep is not None:
            x = x[keep(x)]
        x = x[:100]
        jet = fld.jet(to_complex(x))
        gc, hc = _fd_jet(fld, x)
        num = np.sqrt((np.abs(jet.grad - gc) ** 2).sum(-1) + (np.abs(jet.hess - hc) ** 2).sum((-1, -2)))
        den = np.sqrt((np.abs(gc) ** 2).sum(-1) + (np.abs(hc) ** 2).sum((-1, -2)))
        err = float(np.max(num / np.maximum(den, 1e-12)))
        if err > worst:
            worst, where = err, name
    return CriterionResult(2, "jets", "jets vs central finite differences", worst < 1e-6,
                           {"max_rel_error": worst, "worst_field": where})


def c03_generating(ctx: Context) -> CriterionResult:
    wrong = 0
    for ds, expected in library.generating_suite():
        wrong += assert_generating(ds, seed=ctx.seed).generating != expected
    deltas = [assert_generating(library.real_space(n), seed=ctx.seed).delta_min for n in (2, 3)]
    line = assert_generating(library.complex_line_c2(), seed=ctx.seed).generating
    ok = wrong == 0 and all(abs(d - 0.25) < 1e-12 for d in deltas) and not line
    return CriterionResult(3, "manifold", "generating classifier", ok,
                           {"misclassified": wrong, "delta_min_R2": deltas[0],
                            "delta_min_R3": deltas[1], "C x 0 generating": line})


def c04_divisor_calibration(ctx: Context) -> CriterionResult:
    region = Region(4, [Ball(np.zeros(4), 1.0)])
    z1, z2 = Polynomial.z(2, 0), Polynomial.z(2, 1)
    start = time.perf_counter()
    single = divisor_mass(z1, region, samples=1_000_000, seed=ctx.seed + 4)
    elapsed = time.perf_counter() - start
    double = divisor_mass(z1 * z2, region, samples=1_000_000, seed=ctx.seed + 5)
    area1 = single.mass / kappa(2)
    area2 = double.mass / kappa(2)
    e1, e2 = abs(area1 / np.pi - 1), abs(area2 / (2 * np.pi) - 1)
    return CriterionResult(4, "currents", "divisor-mass calibration",
                           e1 < 0.02 and e2 < 0.03 and elapsed < 60,
                           {"area_z1/pi": area1 / np.pi, "area_z1z2/2pi": area2 / (2 * np.pi)})


def c05_hyperplane_profile(ctx: Context) -> CriterionResult:
    rep = ctx.scenario("r2_hyperplane_tube")
    s = rep.summary
    ok = rep.verdict == "pass" and s["max_rel_error"] < 0.05 and s["C_measured"] < 1.2
    return CriterionResult(5, "mass_profile", "R^2 / {z1=0} profile vs closed form", ok,
                           {"max_rel_error": s["max_rel_error"], "C_measured": s["C_measured"]})


def c06_weight_monotone(ctx: Context) -> CriterionResult:
    a = ctx.scenario("r2_weight_monotone")
    b = ctx.scenario("hypersurface_monotone")
    ok = a.summary["monotone"] and b.summary["monotone"]
    return CriterionResult(6, "mass_profile", "exact monotonicity for the constructed weight", ok,
                           {"worst_drop_se": a.summary["worst_drop_se"],
                            "worst_drop_se_alt": a.summary["worst_drop_se_alt"],
                            "m=1 worst_drop_se": b.summary["worst_drop_se"]})


def c07_psh_bound(ctx: Context) -> CriterionResult:
    ok, metrics = True, {}
    for ds, generating in library.generating_suite():
        if not generating:
            continue
        A, _ = select_A(ds, 0.1 * ds.domain_radius, seed=ctx.seed)
        t0 = find_t0(ds, A, seed=ctx.seed) if A is not None else None
        if t0 is None:
            ok = False
            metrics[ds.name] = "no A/t0"
            continue
        rep = verify_psh_bound(build_tube_weight(ds, A), ds, t_max=t0, seed=ctx.seed)
        ok &= rep.delta_prime > 0 and rep.min_sqrt_coeff >= -1e-8
        metrics[f"{ds.name} delta'"] = rep.delta_prime
    curved = library.curved_totally_real()
    bare = verify_psh_bound(build_tube_weight(curved, 0.0), curved, t_max=0.1, seed=ctx.seed)
    metrics["curved A=0 min_sqrt_coeff"] = bare.min_sqrt_coeff
    ok &= bare.min_sqrt_coeff < 0
    return CriterionResult(7, "manifold", "plurisubharmonicity bound for the tube weight", bool(ok),
                           metrics)


def c08_convex(ctx: Context) -> CriterionResult:
    point, box = ctx.scenario("convex_point"), ctx.scenario("convex_box")
    slope = point.summary["ratio_slope"]
    ok = point.summary["monotone"] and box.summary["monotone"] and abs(slope - 1) <= 0.1
    return CriterionResult(8, "mass_profile", "tubes around convex bodies", bool(ok),
                           {"point slope": slope, "point worst_drop_se": point.summary["worst_drop_se"],
                            "box worst_drop_se": box.summary["worst_drop_se"]})


def c09_counterexample(ctx: Context) -> CriterionResult:
    rep = ctx.scenario("counterexample_c3")
    rows = _read_csv(ctx.out / "scenarios" / "counterexample_c3" / "profile.csv")
    t = np.array([float(r["t"]) for r in rows])
    ratio = np.array([float(r["ratio"]) for r in rows])
    lo, hi = np.argmin(t), np.argmax(t)
    growth = ratio[lo] / ratio[hi]
    ok = rep.verdict == EXPECTED_VIOLATION and t[hi] / t[lo] <= 10 + 1e-9 and growth > 10
    return CriterionResult(9, "mass_profile", "non-generating counterexample", bool(ok),
                           {"t range": f"{t[lo]:g}..{t[hi]:g}", "ratio growth": growth})


def c10_packing(ctx: Context) -> CriterionResult:
    rep = ctx.scenario("line_packing")
    return CriterionResult(10, "zero_geometry", "packing constant stable over eps",
                           rep.summary["C_spread"] < 2, {"C_spread": rep.summary["C_spread"],
                                                        "N": rep.summary["N"]})


def c11_hausdorff(ctx: Context) -> CriterionResult:
    line, circle = ctx.scenario("line_hausdorff"), ctx.scenario("circle_hausdorff")
    packing = ctx.scenario("line_packing")
    C = max(packing.summary["C"])
    bound = 2.0 * C * line.summary["massV"]          # unit 1-ball has length 2
    ok = (line.summary["rel_error"] < 0.1 and circle.summary["rel_error"] < 0.1
          and line.summary["estimate"] <= bound * (1 + 1e-12))
    return CriterionResult(11, "zero_geometry", "Hausdorff estimates", bool(ok),
                           {"segment": line.summary["estimate"], "circle/2pi":
                            circle.summary["estimate"] / (2 * np.pi), "bound": bound})


def c12_ball_area(ctx: Context) -> CriterionResult:
    z1, z2 = Polynomial.z(2, 0), Polynomial.z(2, 1)
    lin = ball_area_bound(z1 - 0.3, [0.3, 0.0], 0.5, seed=ctx.seed + 12)
    cusp = ball_area_bound(z1 - z2 * z2, [0.0, 0.0], 0.5, seed=ctx.seed + 13)
    cross = ball_area_bound(z1 * z2, [0.0, 0.0], 0.5, seed=ctx.seed + 14)
    ok = (abs(lin.ratio - 1) <= 0.03 and cusp.ratio + 3 * cusp.ratio_se >= 1
          and abs(cross.ratio / 2 - 1) <= 0.03
          and "inconclusive" not in (lin.verdict, cusp.verdict, cross.verdict))
    return CriterionResult(12, "zero_geometry", "ball-area minimality", bool(ok),
                           {"linear": lin.ratio, "z1-z2^2": cusp.ratio, "z1 z2": cross.ratio})


def _sobol(dim, m, seed):
    return qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)


def psh_clouds(seed: int):
    """Trace-measure clouds of plurisubharmonic functions in C^2."""
    # Lebesgue measure on the ball of radius 2: one low-discrepancy sequence on the cube
    x = 4.0 * _sobol(4, 19, seed) - 2.0
    x = x[np.linalg.norm(x, axis=1) < 2.0]
    ball = WeightedPointCloud(to_complex(x), np.full(len(x), 1.0 / len(x)))
    # area measure of {z1 = 0} in the same ball (the trace measure of log|z1|^2 up to a constant)
    d = _sobol(2, 14, seed + 2)
    rad, ang = 2.0 * np.sqrt(d[:, 0]), 2 * np.pi * d[:, 1]
    line = WeightedPointCloud(np.stack([np.zeros(len(rad)), rad * np.exp(1j * ang)], -1),
                              np.full(len(rad), 1.0 / len(rad)))
    return {"ball": ball, "line": line}


CLOUD_RTOL = 0.05


def c13_classifier(ctx: Context) -> CriterionResult:
    rng = ctx.rng(13)
    s_grid = np.geomspace(0.3, 0.95, 10)
    centers = to_complex(_in_ball(rng, 50, 0.7))
    errors = 0
    for cloud in psh_clouds(ctx.seed).values():
        errors += sum(not nu_monotone(radial_mass(cloud, z, s_grid), CLOUD_RTOL)[0] for z in centers)
    atom = WeightedPointCloud(np.zeros((1, 2)), [1.0])
    off = to_complex(_in_ball(rng, 50, 0.7, inner=0.05))
    errors += sum(nu_monotone(radial_mass(atom, z, s_grid), 1e-9)[0] for z in off)
    return CriterionResult(13, "potentials", "Lelong monotonicity classifier", errors == 0,
                           {"errors": errors, "centers per family": 50})


def _in_ball(rng, count, radius, inner=0.0):
    g = rng.normal(size=(count, 4))
    r = radius * rng.uniform((inner / radius) ** 4, 1.0, size=(count, 1)) ** 0.25
    return g / np.linalg.norm(g, axis=1, keepdims=True) * r


def c14_exp_bound(ctx: Context) -> CriterionResult:
    rep = ctx.scenario("ball_potential")
    s = rep.summary
    ok = rep.verdict == "pass"
    return CriterionResult(14, "potentials", "exponential bound: implied C and by-parts identity",
                           ok, {"sup_C": "/".join(f"{v:.4g}" for v in s["sup_C"]),
                                "spread": s["sup_C_spread"], "identity_rel_error": s["jensen_rel_error"]})


def c15_kernel(ctx: Context) -> CriterionResult:
    rep = ctx.scenario("kernel_r2")
    return CriterionResult(15, "potentials", "kernel on M: slope in d", rep.verdict == "pass",
                           {"slope": rep.summary["slope"], "expected": rep.summary["expected_slope"]})


def c16_expint(ctx: Context) -> CriterionResult:
    half, two = ctx.scenario("expint_half"), ctx.scenario("expint_divergent")
    ok = half.verdict == "pass" and two.verdict == EXPECTED_VIOLATION
    return CriterionResult(16, "potentials", "exponential integrability on M", ok,
                           {"alpha=1/2 estimate": half.summary["estimates"][-1],
                            "last increment": half.summary["last_increment"],
                            "alpha=2": two.summary["status"]})


DETERMINISM_SCENARIOS = ("r2_hyperplane_tube", "line_packing")


def c17_determinism(ctx: Context) -> CriterionResult:
    same, compared = True, 0
    with tempfile.TemporaryDirectory() as tmp:
        for name in DETERMINISM_SCENARIOS:
            dirs = []
            for k in range(2):
                d = Path(tmp) / f"{name}_{k}"
                run_scenario(bundled_dir() / f"{name}.json", d, plot=True)
                dirs.append(d)
            files = sorted(p.name for p in dirs[0].iterdir())
            match, mismatch, errs = filecmp.cmpfiles(dirs[0], dirs[1], files, shallow=False)
            same &= not mismatch and not errs
            compared += len(match)
    return CriterionResult(17, "runner", "byte-identical reruns", bool(same),
                           {"files compared": compared})


CRITERIA: list[Callable[[Context], CriterionResult]] = [
    c01_forms, c02_jets, c03_generating, c04_divisor_calibration, c05_hyperplane_profile,
    c06_weight_monotone, c07_psh_bound, c08_convex, c09_counterexample, c10_packing,
    c11_hausdorff, c12_ball_area, c13_classifier, c14_exp_bound, c15_kernel, c16_expint,
    c17_determinism,
]

TAGS = {1: "forms", 2: "jets", 3: "manifold", 4: "currents", 5: "mass_profile",
        6: "mass_profile", 7: "manifold", 8: "mass_profile", 9: "mass_profile",
        10: "zero_geometry", 11: "zero_geometry", 12: "zero_geometry", 13: "potentials",
        14: "potentials", 15: "potentials", 16: "potentials", 17: "runner"}


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _write_metrics(res: CriterionResult, out: Path):
    path = out / f"criterion_{res.number:02d}.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        w.writerow(["passed", int(res.passed)])
        for k, v in res.metrics.items():
            w.writerow([k, v if isinstance(v, str) else repr(v if not isinstance(v, np.generic) else v.item())])


def select(filter_tag: str | None = None):
    """Criteria whose tag (or number) matches ``filter_tag``."""
    if not filter_tag:
        return list(CRITERIA)
    keys = {k.strip() for k in filter_tag.split(",")}
    return [c for i, c in enumerate(CRITERIA, 1)
            if TAGS[i] in keys or str(i) in keys or f"{i:02d}" in keys]


def verify_suite(filter_tag: str | None = None, out_dir=None, seed: int = 0,
                 echo: Callable[[str], None] | None = print) -> list[CriterionResult]:
    out = Path(out_dir) if out_dir is not None else Path("verify_out")
    out.mkdir(parents=True, exist_ok=True)
    ctx = Context(out, seed)
    results = []
    for crit in select(filter_tag):
        with np.errstate(all="ignore"):
            res = crit(ctx)
        _write_metrics(res, out)
        results.append(res)
        if echo:
            echo(res.line())
    if echo:
        passed = sum(r.passed for r in results)
        echo(f"{passed}/{len(results)} criteria passed")
    return results
