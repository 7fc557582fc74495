"""Chernoff intervals for cosine estimates and the extended arctangent."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class ConfidenceInterval:
    lo: float
    hi: float
    delta_c: float

    @property
    def half_width(self) -> float:
        return (self.hi - self.lo) / 2

    def __contains__(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def chernoff_half_width(n_shot: int, delta_c: float) -> float:
    """Unclamped half-width ``sqrt(12 ln(2/delta_c) / n_shot)``."""
    if not 0.0 < delta_c < 1.0:
        raise DomainError(f"delta_c must lie in (0, 1), got {delta_c!r}")
    if n_shot < 1:
        raise DomainError(f"n_shot must be >= 1, got {n_shot!r}")
    return math.sqrt(math.log(2 / delta_c) * 12 / n_shot)


def chernoff(c_hat: float, n_shot: int, delta_c: float) -> ConfidenceInterval:
    """Confidence interval for a cosine estimate, clamped to [-1, 1].

    The true cosine falls outside the interval with probability at most
    ``delta_c``.
    """
    w = chernoff_half_width(n_shot, delta_c)
    return ConfidenceInterval(lo=max(-1.0, c_hat - w), hi=min(1.0, c_hat + w), delta_c=delta_c)


def atan_ext(s: float, c: float) -> float:
    """Extended arctangent on the closed square ``[-1, 1]^2`` with range ``[-pi, pi]``.

    Unlike ``math.atan2`` the origin maps to 0 and ``c < 0, s = 0`` maps to
    ``+pi`` regardless of the sign of zero.
    """
    if not (-1.0 <= s <= 1.0 and -1.0 <= c <= 1.0):
        raise DomainError(f"atan_ext needs s, c in [-1, 1], got s={s!r}, c={c!r}")
    if c > 0:
        return math.atan(s / c)
    if c == 0:
        if s > 0:
            return math.pi / 2
        if s < 0:
            return -math.pi / 2
        return 0.0
    if s >= 0:
        return math.pi + math.atan(s / c)
    return -math.pi + math.atan(s / c)


def atan_ext_array(s: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Vectorized :func:`atan_ext`, elementwise over broadcast arrays."""
    s, c = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(c, dtype=float))
    if np.any(np.abs(s) > 1) or np.any(np.abs(c) > 1):
        raise DomainError("atan_ext needs s, c in [-1, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        base = np.arctan(s / c)
    out = np.where(c > 0, base, 0.0)
    out = np.where((c == 0) & (s > 0), np.pi / 2, out)
    out = np.where((c == 0) & (s < 0), -np.pi / 2, out)
    out = np.where((c < 0) & (s >= 0), np.pi + base, out)
    out = np.where((c < 0) & (s < 0), -np.pi + base, out)
    return out


def atan_error_bound(delta_c_err: float, delta_s_err: float) -> float:
    """Worst-case angle error of :func:`atan_ext` given cosine/sine input errors.

    Valid for ``delta_s_err < 1/2`` and ``delta_c_err < 1/4`` when the
    perturbation box does not straddle the branch cut.
    """
    if not (0 <= delta_c_err < 0.25 and 0 <= delta_s_err < 0.5):
        raise DomainError(
            f"need 0 <= delta_c < 1/4 and 0 <= delta_s < 1/2, got {delta_c_err!r}, {delta_s_err!r}"
        )
    return max(2 * delta_c_err + 2 * delta_s_err, 3 * delta_c_err)


def crosses_branch_cut(c: float, s: float, dc: float, ds: float) -> bool:
    """Whether the box ``[c-dc, c+dc] x [s-ds, s+ds]`` touches ``{c <= 0, s = 0}``."""
    return c - dc <= 0 and s - ds <= 0 <= s + ds


@dataclass(frozen=True)
class AngleEstimate:
    """An angle in ``[-pi, pi]`` with a connected or wrap-around confidence set.

    A connected estimate carries ``bounds=(a, b)``. A disconnected one carries
    ``bounds=(c, d)`` meaning ``[-pi, c] U [d, pi]``.
    """

    value: float
    interval_kind: Literal["connected", "disconnected"]
    bounds: tuple[float, float]

    def __post_init__(self) -> None:
        lo, hi = self.bounds
        if self.interval_kind == "connected":
            ok = lo <= self.value <= hi
        elif self.interval_kind == "disconnected":
            ok = -math.pi <= self.value <= lo or hi <= self.value <= math.pi
        else:
            raise DomainError(f"unknown interval kind {self.interval_kind!r}")
        if not ok:
            raise DomainError(f"value {self.value!r} outside {self.interval_kind} bounds {self.bounds!r}")

    @property
    def half_width(self) -> float:
        """Largest distance from the value to an end of its confidence set."""
        lo, hi = self.bounds
        if self.interval_kind == "connected":
            return max(self.value - lo, hi - self.value)
        if self.value <= lo:
            return max(2 * math.pi + self.value - hi, lo - self.value)
        return max(self.value - hi, 2 * math.pi + lo - self.value)


def angle_estimate(
    s: float, c: float, c_interval: ConfidenceInterval, s_interval: ConfidenceInterval
) -> AngleEstimate:
    """Confidence set of ``atan_ext(s, c)`` from independent cosine/sine intervals.

    The image of the box under ``atan_ext`` is spanned by its corners unless the
    box straddles the negative cosine axis, in which case the set wraps through
    ``+-pi``. Boxes around the origin are not handled and yield the full circle.
    """
    value = atan_ext(s, c)
    c_lo, c_hi = c_interval.lo, c_interval.hi
    s_lo, s_hi = max(-1.0, s_interval.lo), min(1.0, s_interval.hi)
    if c_lo <= 0 <= c_hi and s_lo <= 0 <= s_hi:
        return AngleEstimate(value, "connected", (-math.pi, math.pi))
    corners = [atan_ext(sv, cv) for sv in (s_lo, s_hi) for cv in (c_lo, c_hi)]
    if c_hi < 0 and s_lo < 0 <= s_hi:
        upper = [a for a in corners if a >= 0]
        lower = [a for a in corners if a < 0]
        return AngleEstimate(value, "disconnected", (max(lower), min(upper)))
    return AngleEstimate(value, "connected", (min(corners + [value]), max(corners + [value])))
