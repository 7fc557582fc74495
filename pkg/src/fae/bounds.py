"""Closed-form query-count bounds and iteration planning."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DomainError

FAE_CONSTANT = 4.1e3
COMPETITOR_CONSTANT = 1.15e6
SHOT_CONSTANT = 1944


def _check_delta(delta: float, name: str = "delta") -> None:
    if not 0.0 < delta < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {delta!r}")


def error_for_ell(ell: int) -> float:
    """Amplitude error guaranteed after ``ell`` iterations, ``pi / (3 2^(ell-1))``."""
    return math.pi / (3 * 2 ** (ell - 1))


def choose_ell(epsilon: float) -> int:
    """Smallest ``ell >= 1`` with ``error_for_ell(ell) <= epsilon``."""
    if not epsilon > 0 or math.isinf(epsilon):
        raise DomainError(f"epsilon must be positive and finite, got {epsilon!r}")
    ell = max(1, math.ceil(math.log2(2 * math.pi / (3 * epsilon))))
    # log2 can land one off either side of an exact power of two
    while ell > 1 and error_for_ell(ell - 1) <= epsilon:
        ell -= 1
    while error_for_ell(ell) > epsilon:
        ell += 1
    return ell


def theorem1_bound(epsilon: float, delta: float) -> float:
    """``(4.1e3 / eps) ln(4 log2(2 pi / (3 eps)) / delta)``."""
    if not 0.0 < epsilon < 2 * math.pi / 3:
        raise DomainError(f"epsilon must lie in (0, 2pi/3), got {epsilon!r}")
    _check_delta(delta)
    return FAE_CONSTANT / epsilon * math.log(4 * math.log2(2 * math.pi / (3 * epsilon)) / delta)


def worst_case_count(ell: int, delta_c: float) -> float:
    """Grover calls when the second stage starts at ``j = 1`` (real-valued shots)."""
    if ell < 1:
        raise DomainError(f"ell must be >= 1, got {ell!r}")
    _check_delta(delta_c, "delta_c")
    log_term = math.log(2 / delta_c)
    return SHOT_CONSTANT * log_term + SHOT_CONSTANT * (2 ** ell - 2) * log_term


def staged_count(ell: int, j0: int, n_shot_first: int, n_shot_second: int) -> int:
    """Worst-case-convention Grover calls for a run that switched stage at ``j0``.

    Each first-stage iteration ``j`` costs ``n_first 2^(j-1)``; each
    second-stage iteration costs ``2 n_second 2^(j-1)``. With ``j0 = 1`` and
    real-valued shot counts this is :func:`worst_case_count`.
    """
    if not 1 <= j0 <= ell:
        raise DomainError(f"need 1 <= j0 <= ell, got j0={j0!r}, ell={ell!r}")
    return n_shot_first * (2 ** j0 - 1) + 2 * n_shot_second * (2 ** ell - 2 ** j0)


def competitor_bound(epsilon: float, delta: float) -> float:
    """Iterative-QAE bound ``(1.15e6 / eps) ln((2 / delta) log3(3 pi / (20 eps)))``."""
    if not 0.0 < epsilon < 3 * math.pi / 20:
        raise DomainError(f"epsilon must lie in (0, 3pi/20), got {epsilon!r}")
    _check_delta(delta)
    return COMPETITOR_CONSTANT / epsilon * math.log(
        2 / delta * math.log(3 * math.pi / (20 * epsilon), 3)
    )


@dataclass(frozen=True)
class BoundReport:
    epsilon: float
    delta: float
    ell: int
    delta_c: float
    fae_bound: float
    worst_case_count: float
    competitor_bound: float

    @property
    def ratio(self) -> float:
        return self.competitor_bound / self.fae_bound

    def to_dict(self) -> dict:
        return {**asdict(self), "ratio": self.ratio}


def bound_report(epsilon: float, delta: float) -> BoundReport:
    """Plan ``ell`` for ``epsilon`` and split ``delta`` evenly as ``delta_c = delta / (2 ell)``."""
    ell = choose_ell(epsilon)
    delta_c = delta / (2 * ell)
    return BoundReport(
        epsilon=epsilon,
        delta=delta,
        ell=ell,
        delta_c=delta_c,
        fae_bound=theorem1_bound(epsilon, delta),
        worst_case_count=worst_case_count(ell, delta_c),
        competitor_bound=competitor_bound(epsilon, delta),
    )
