import math

import pytest

from fae.bounds import (
    bound_report,
    choose_ell,
    competitor_bound,
    error_for_ell,
    staged_count,
    theorem1_bound,
    worst_case_count,
)
from fae.errors import DomainError

# 30-digit mpmath values
THEOREM1_1E3 = 27809707.92776
COMPETITOR_1E3 = 6223979072.2389
WORST_5 = 319297.7977776509


def test_choose_ell_examples():
    assert choose_ell(2 * math.pi / 3) == 1
    assert choose_ell(1e-3) == 12
    assert choose_ell(1e-2) == 8
    assert choose_ell(5.0) == 1


@pytest.mark.parametrize("eps", [0.0, -1.0, math.inf, math.nan])
def test_choose_ell_rejects(eps):
    with pytest.raises(DomainError):
        choose_ell(eps)


@pytest.mark.parametrize("ell", range(1, 31))
def test_choose_ell_round_trip(ell):
    assert choose_ell(error_for_ell(ell)) == ell


def test_theorem1_examples():
    assert theorem1_bound(1e-3, 0.05) == pytest.approx(THEOREM1_1E3, rel=1e-12)
    assert f"{theorem1_bound(1e-3, 0.05):.3g}" == "2.78e+07"
    assert math.log(math.log2(2 * math.pi / (3 * 1e-20))) <= 6


@pytest.mark.parametrize("eps", [10.0 ** -k for k in range(2, 9)])
def test_theorem1_near_heisenberg(eps):
    ratio = theorem1_bound(eps / 2, 0.05) / theorem1_bound(eps, 0.05)
    assert 2 < ratio < 2.2


@pytest.mark.parametrize("eps,delta", [(0.0, 0.05), (2.1, 0.05), (1e-3, 0.0), (1e-3, 1.0)])
def test_theorem1_domain(eps, delta):
    with pytest.raises(DomainError):
        theorem1_bound(eps, delta)


def test_worst_case_examples():
    log_term = math.log(200)
    assert worst_case_count(1, 0.01) == pytest.approx(1944 * log_term)
    assert worst_case_count(5, 0.01) == pytest.approx(WORST_5, rel=1e-13)
    assert f"{worst_case_count(5, 0.01):.4g}" == "3.193e+05"
    for ell in range(1, 25):
        for delta_c in (0.1, 0.01, 1e-4):
            assert worst_case_count(ell, delta_c) <= 1944 * 2**ell * math.log(2 / delta_c)


def test_staged_count_reduces_to_worst_case():
    n1, n2 = 1944 * math.log(200), 972 * math.log(200)
    for ell in range(1, 15):
        assert staged_count(ell, 1, n1, n2) == pytest.approx(worst_case_count(ell, 0.01))
    assert staged_count(5, 5, 10, 3) == 10 * 31
    with pytest.raises(DomainError):
        staged_count(5, 6, 10, 3)


def test_competitor_examples():
    assert competitor_bound(1e-3, 0.05) == pytest.approx(COMPETITOR_1E3, rel=1e-12)
    assert f"{competitor_bound(1e-3, 0.05):.3g}" == "6.22e+09"
    eps = [10.0 ** -k for k in range(1, 10)]
    values = [competitor_bound(e, 0.05) for e in eps]
    assert all(a < b for a, b in zip(values, values[1:]))
    with pytest.raises(DomainError):
        competitor_bound(0.5, 0.05)


def test_bound_report():
    rep = bound_report(1e-3, 0.05)
    assert rep.ell == 12
    assert rep.delta_c == pytest.approx(0.05 / 24)
    assert rep.ratio == pytest.approx(COMPETITOR_1E3 / THEOREM1_1E3)
    assert round(rep.ratio) == 224
    assert set(rep.to_dict()) >= {"fae_bound", "competitor_bound", "ratio", "ell"}


@pytest.mark.parametrize("eps", [0.1, 1e-2, 1e-4, 1e-8])
@pytest.mark.parametrize("delta", [1e-6, 0.05, 0.5])
def test_fae_below_competitor(eps, delta):
    assert theorem1_bound(eps, delta) < competitor_bound(eps, delta)
