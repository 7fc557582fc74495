"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``[PASS]`` or ``[FAIL]`` line; the lines are repeated in a
summary section at the end of the pytest run.
"""

import math

import numpy as np
import pytest

from fae.bench import (
    BenchConfig,
    accounting_violations,
    coverage_floor,
    fit_all,
    run_bench,
    to_csv,
)
from fae.bounds import competitor_bound, error_for_ell, theorem1_bound
from fae.simulator import rotation_identity_error
from fae.verify import atan_suite, chernoff_suite

FULL = BenchConfig(
    amplitudes=(0.1, 0.2, 0.3, 0.4), ell_min=3, ell_max=14, trials=1000,
    delta_c=0.01, master_seed=2020,
)
LARGE_ELLS = (12, 13, 14)


@pytest.fixture(scope="module")
def full_bench():
    return run_bench(FULL)


def test_criterion_1_rotation_identity(acceptance_log):
    grid = np.linspace(0.0, math.pi / 2, 50)
    err = rotation_identity_error(grid, 1000)
    ok = acceptance_log(1, "rotation identity", err < 1e-10,
                        f"max |p11 - sin^2((2m+1)theta)| = {err:.2e} over 50 angles, m = 0..1000")
    assert ok


def test_criterion_2_scaling_and_j0(full_bench, acceptance_log):
    fits = fit_all(full_bench)
    slopes = {a: fits[a].free_slope for a in FULL.amplitudes}
    slope_ok = all(-1.15 <= s <= -0.85 for s in slopes.values())
    j0_rows = {ell: [full_bench.cell(a, ell).j0_mode for a in FULL.amplitudes] for ell in LARGE_ELLS}
    j0_ok = all(all(x >= y for x, y in zip(r, r[1:])) for r in j0_rows.values())
    detail = ("free slopes " + ", ".join(f"a={a:g}: {s:.3f}" for a, s in slopes.items())
              + "; j0 by amplitude " + ", ".join(f"ell={ell}: {r}" for ell, r in j0_rows.items()))
    assert acceptance_log(2, "scaling fit and j0 ordering", slope_ok and j0_ok, detail)


def test_criterion_3_coverage(full_bench, acceptance_log):
    short = []
    worst = math.inf
    for cell in full_bench.cells:
        floor = coverage_floor(cell.ell, cell.j0_mode, cell.delta_c, cell.trials)
        worst = min(worst, cell.coverage_rate - floor)
        if cell.coverage_rate < floor:
            short.append((cell.amplitude, cell.ell, cell.coverage_rate, floor))
    ok = acceptance_log(3, "coverage", not short,
                        f"{len(short)} of {len(full_bench.cells)} cells below floor; "
                        f"smallest margin {worst:.4f}")
    assert ok, short


def test_criterion_4_conditional_error(full_bench, acceptance_log):
    checked = violations = 0
    for cell in full_bench.cells:
        bound = error_for_ell(cell.ell)
        for r in cell.ok:
            if r.all_pass:
                checked += 1
                violations += not r.error < bound
    ok = acceptance_log(4, "conditional error bound", violations == 0 and checked > 0,
                        f"{violations} violations among {checked} fully passing trials")
    assert ok


def test_criterion_5_accounting(full_bench, acceptance_log):
    bad = accounting_violations(full_bench)
    total = sum(len(c.ok) for c in full_bench.cells)
    # the same formula with the unrounded shot counts, for reference only
    log_term = math.log(2 / FULL.delta_c)
    overshoot = max(
        r.n_orac_paper / (log_term * (1944 * (2**r.j0 - 1) + 1944 * (2**c.ell - 2**r.j0))) - 1
        for c in full_bench.cells for r in c.ok
    )
    ok = acceptance_log(5, "query accounting", not bad,
                        f"{len(bad)} of {total} trials exceed the staged or closed-form query bound "
                        f"(integer shot counts; unrounded formula exceeded by at most "
                        f"{overshoot:.1e} relative)")
    assert ok, bad[:5]


def test_criterion_6_atan_bound(acceptance_log):
    res = atan_suite(samples=1_000_000)
    assert acceptance_log(6, "atan error bound", res.ok, res.lines[0][1]), res.report()


def test_criterion_7_chernoff(acceptance_log):
    res = chernoff_suite()
    detail = "; ".join(msg for _, msg in res.lines)
    assert acceptance_log(7, "Chernoff coverage", res.ok, detail), res.report()


def test_criterion_8_constant_factor(acceptance_log):
    eps = np.logspace(-6, -3, 61)
    ratios = [theorem1_bound(e, 0.05) / competitor_bound(e, 0.05) for e in eps]
    worst = max(ratios)
    ok = acceptance_log(8, "constant factor", worst <= 1 / 100,
                        f"max FAE/IQAE ratio {worst:.5f} (1/{1 / worst:.1f}) over eps in [1e-6, 1e-3]")
    assert ok


def test_criterion_9_determinism(full_bench, acceptance_log):
    first = to_csv(full_bench.rows())
    second = to_csv(run_bench(FULL).rows())
    ok = acceptance_log(9, "determinism", first == second,
                        f"two full sweeps, {len(first)} CSV bytes each, identical={first == second}")
    assert ok
