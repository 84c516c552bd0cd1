"""Acceptance criteria 1-17, one test each; a PASS/FAIL line per criterion is
printed in the terminal summary."""
import filecmp
import time

import numpy as np
import pytest

from tubemass.cli import main
from tubemass.verify import CRITERIA, TAGS, Context, _write_metrics

LINES: list[str] = []
TIMINGS: dict[int, float] = {}
BUDGET_SECONDS = 15 * 60


@pytest.fixture(scope="module")
def ctx(tmp_path_factory):
    return Context(tmp_path_factory.mktemp("acceptance"), seed=0)


@pytest.mark.parametrize("crit", CRITERIA, ids=[f"c{i:02d}_{TAGS[i]}" for i in range(1, 18)])
def test_criterion(ctx, crit):
    start = time.perf_counter()
    with np.errstate(all="ignore"):
        res = crit(ctx)
    TIMINGS[res.number] = time.perf_counter() - start
    _write_metrics(res, ctx.out)
    LINES.append(res.line())
    assert res.passed, res.line()


def test_suite_fits_time_budget():
    if len(TIMINGS) < len(CRITERIA):
        pytest.skip("needs the full criterion run in the same session")
    total = sum(TIMINGS.values())
    LINES.append(f"[{'PASS' if total < BUDGET_SECONDS else 'FAIL'}] suite wall time {total:.1f}s "
                 f"(budget {BUDGET_SECONDS}s)")
    assert total < BUDGET_SECONDS


def test_full_rerun_csvs_are_byte_identical(ctx, tmp_path, capsys):
    if len(TIMINGS) < len(CRITERIA):
        pytest.skip("needs the full criterion run in the same session")
    again = tmp_path / "again"
    assert main(["verify", "--out", str(again)]) == 0
    assert capsys.readouterr().out.strip().endswith(f"{len(CRITERIA)}/{len(CRITERIA)} criteria passed")
    first = sorted(p.relative_to(ctx.out) for p in ctx.out.rglob("*.csv"))
    second = sorted(p.relative_to(again) for p in again.rglob("*.csv"))
    assert first == second and len(first) > len(CRITERIA)
    differing = [str(p) for p in first if (ctx.out / p).read_bytes() != (again / p).read_bytes()]
    LINES.append(f"[{'PASS' if not differing else 'FAIL'}] rerun of `tubemass verify`: "
                 f"{len(first)} CSV files compared, {len(differing)} differ")
    assert not differing


def test_verify_filter_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    start = time.perf_counter()
    assert main(["verify", "--filter", "forms", "--out", str(a)]) == 0
    assert time.perf_counter() - start < 5
    first = capsys.readouterr().out
    assert main(["verify", "--filter", "forms", "--out", str(b)]) == 0
    assert capsys.readouterr().out == first
    names = sorted(p.name for p in a.iterdir() if p.is_file())
    assert names == ["criterion_01.csv"]
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert match == names and not mismatch and not errors
