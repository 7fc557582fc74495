import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fae.bench import (
    CSV_HEADER,
    BenchConfig,
    CellResult,
    TrialRecord,
    TrialSet,
    coverage_floor,
    export,
    fit_all,
    fit_scaling,
    quantile_error,
    read_csv,
    run_bench,
    run_cell,
    to_csv,
)
from fae.errors import DomainError

SMALL = BenchConfig(amplitudes=(0.2, 0.4), ell_min=3, ell_max=6, trials=40, master_seed=7)


@pytest.fixture(scope="module")
def small_set():
    return run_bench(SMALL)


def brute_quantile(errors, q):
    ordered = sorted(errors)
    for e in ordered:
        if sum(x <= e for x in ordered) >= q * len(ordered):
            return e


def test_quantile_examples():
    assert quantile_error(list(range(1, 101)), 0.95) == 95
    assert quantile_error([3.5], 0.01) == 3.5
    assert quantile_error([3.5], 0.99) == 3.5
    with pytest.raises(DomainError):
        quantile_error([], 0.5)
    with pytest.raises(DomainError):
        quantile_error([1.0], 1.0)


@given(errs=st.lists(st.floats(0, 1), min_size=1, max_size=60), q=st.floats(0.01, 0.99))
def test_quantile_matches_brute_force(errs, q):
    assert quantile_error(errs, q) == brute_quantile(errs, q)


def test_quantile_on_uniform_sample():
    rng = np.random.default_rng(0)
    errs = list(rng.uniform(size=1000))
    for q in (0.5, 0.9, 0.95, 0.99):
        assert quantile_error(errs, q) == brute_quantile(errs, q)


def test_fit_examples():
    fit = fit_scaling([(1e-2, 1e5), (1e-3, 1e6)])
    assert fit.intercept_b == pytest.approx(3.0)
    assert fit.free_slope == pytest.approx(-1.0)
    assert fit.residual_rms == pytest.approx(0.0, abs=1e-12)
    pts = [(e, 10**2.5 / e) for e in (1e-1, 1e-2, 1e-4, 3e-5)]
    fit = fit_scaling(pts)
    assert fit.intercept_b == pytest.approx(2.5)
    assert fit.residual_rms == pytest.approx(0.0, abs=1e-12)
    assert fit.n_points == 4


@pytest.mark.parametrize("pts", [[(1e-2, 1e5)], [(0.0, 1.0), (1e-2, 1e4)], [(1e-2, -1.0), (1e-3, 1.0)]])
def test_fit_rejects(pts):
    with pytest.raises(DomainError):
        fit_scaling(pts)


def test_config_validation():
    with pytest.raises(DomainError):
        BenchConfig(trials=0)
    with pytest.raises(DomainError):
        BenchConfig(ell_min=5, ell_max=4)
    with pytest.raises(DomainError):
        BenchConfig(amplitudes=(1.5,))
    with pytest.raises(DomainError):
        BenchConfig(percentile=1.0)


def test_cells_and_aggregates(small_set):
    assert len(small_set.cells) == 2 * 4
    for cell in small_set.cells:
        assert cell.trials == 40 and cell.failures == 0
        row = cell.row(SMALL.master_seed)
        assert tuple(row) == CSV_HEADER
        assert row["err_q95"] == brute_quantile(list(cell.errors), 0.95)
        assert row["n_orac_exact_min"] <= row["n_orac_exact_median"] <= row["n_orac_exact_max"]
        assert 0.0 <= row["coverage_rate"] <= 1.0


def test_single_trial_deterministic():
    cfg = BenchConfig(amplitudes=(0.3,), ell_min=5, ell_max=5, trials=1, master_seed=3)
    assert to_csv(run_bench(cfg).rows()) == to_csv(run_bench(cfg).rows())


def test_trials_seeded_by_index():
    short = run_cell(BenchConfig(trials=5, master_seed=1), 0.3, 6)
    long = run_cell(BenchConfig(trials=12, master_seed=1), 0.3, 6)
    assert short.records == long.records[:5]


def test_permutation_invariance(small_set):
    rev = BenchConfig(amplitudes=(0.4, 0.2), ell_min=3, ell_max=6, trials=40, master_seed=7)
    other = run_bench(rev, workers=2)
    for cell in small_set.cells:
        twin = other.cell(cell.amplitude, cell.ell)
        assert cell.row(7) == twin.row(7)
        # reversing execution order within a cell
        shuffled = CellResult(cell.amplitude, cell.ell, cell.delta_c, cell.percentile,
                              list(reversed(cell.records)))
        assert shuffled.row(7) == cell.row(7)


def test_j0_mode_tie_break():
    recs = [TrialRecord(i, 0.1, 10, 10, j0, True, True) for i, j0 in enumerate([4, 3, 4, 3, 5])]
    assert CellResult(0.1, 6, 0.01, 0.95, recs).j0_mode == 3


def test_failures_recorded_not_raised():
    recs = [TrialRecord(0, 0.1, 10, 10, 3, True, True),
            TrialRecord(1, math.nan, -1, -1, -1, False, False, failure="degenerate")]
    cell = CellResult(0.1, 6, 0.01, 0.95, recs)
    assert cell.failures == 1 and cell.coverage_rate == 0.5
    assert cell.err_q == 0.1


def test_coverage_floor():
    assert coverage_floor(3, 3, 0.01, 1000) == pytest.approx(0.97 - 3 * math.sqrt(0.97 * 0.03 / 1000))
    assert coverage_floor(100, 1, 0.01, 10) == 0.0


def test_csv_round_trip(small_set, tmp_path):
    path = tmp_path / "out.csv"
    export(small_set, fit_all(small_set), "csv", path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    rows = read_csv(path)
    assert rows == small_set.rows()


def test_empty_set_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    export(TrialSet(SMALL, []), {}, "csv", path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"
    assert read_csv(path) == []


def test_json_export(small_set, tmp_path):
    path = tmp_path / "out.json"
    cfg = BenchConfig(amplitudes=(0.3,), ell_min=3, ell_max=5, trials=5, keep_trials=True)
    tset = run_bench(cfg)
    export(tset, fit_all(tset), "json", path)
    doc = json.loads(path.read_text())
    assert doc["config"]["trials"] == 5
    assert len(doc["cells"]) == 3 and len(doc["trials"]) == 15
    assert set(doc["fits"]["0.3"]) >= {"intercept_b", "residual_rms", "free_slope"}


def test_svg_export(small_set, tmp_path):
    path = tmp_path / "fig.svg"
    export(small_set, fit_all(small_set), "svg", path)
    text = path.read_text()
    ET.fromstring(text)
    assert "<script" not in text
    again = tmp_path / "fig2.svg"
    export(small_set, fit_all(small_set), "svg", again)
    assert again.read_text() == text


def test_export_errors(small_set, tmp_path):
    with pytest.raises(OSError):
        export(small_set, {}, "csv", tmp_path / "missing" / "x.csv")
    with pytest.raises(DomainError):
        export(small_set, {}, "xml", tmp_path / "x.xml")
