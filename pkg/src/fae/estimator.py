"""The two-stage amplitude estimator.

Iteration ``j`` measures the cosine of ``K_j theta`` with ``K_j = 2^(j+1) + 2``
using ``m = 2^(j-1)`` Grover applications. While ``K_j theta < pi`` is
guaranteed (first stage) the cosine inverts unambiguously. Once
``2^(j+1) theta_max`` reaches ``3 pi / 8`` the estimator memorizes
``nu ~ 2^(j0+1) theta`` and afterwards recovers the sine through a second,
shifted measurement, resolving the ``2 pi`` winding from the previous
interval (second stage).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np

from . import _backend
from .confidence import ConfidenceInterval, atan_ext, chernoff
from .errors import DegenerateNuError, DomainError
from .oracle import BernoulliOracle, ExactOracle, ProblemSpec

ROUNDED_THETA_MAX = 0.252
#: ``arcsin(1/4) = 0.2526802...`` rounded up at the fourth decimal.
SAFE_THETA_MAX = 0.2527
SHOT_CONSTANT_FIRST = 1944
SHOT_CONSTANT_SECOND = 972
NU_GUARD = 0.1
TRANSITION_ANGLE = 3 * math.pi / 8
MARGIN = math.pi / 3


def k_factor(j: int) -> int:
    """Angle multiplier ``2^(j+1) + 2`` probed at iteration ``j``."""
    return 2 ** (j + 1) + 2


def default_shots(delta_c: float) -> tuple[int, int]:
    if not 0.0 < delta_c < 1.0:
        raise DomainError(f"delta_c must lie in (0, 1), got {delta_c!r}")
    log_term = math.log(2 / delta_c)
    return math.ceil(SHOT_CONSTANT_FIRST * log_term), math.ceil(SHOT_CONSTANT_SECOND * log_term)


@dataclass(frozen=True)
class EstimatorConfig:
    delta_c: float = 0.01
    ell: int = 8
    n_shot_first: int | None = None
    n_shot_second: int | None = None
    initial_theta_max: float = SAFE_THETA_MAX

    def __post_init__(self) -> None:
        first, second = default_shots(self.delta_c)
        if self.n_shot_first is None:
            object.__setattr__(self, "n_shot_first", first)
        if self.n_shot_second is None:
            object.__setattr__(self, "n_shot_second", second)
        if self.ell < 1:
            raise DomainError(f"ell must be >= 1, got {self.ell!r}")
        if self.n_shot_first < 1 or self.n_shot_second < 1:
            raise DomainError("shot counts must be positive")
        if not 0.0 < self.initial_theta_max <= math.pi / 6:
            raise DomainError(f"initial_theta_max out of range: {self.initial_theta_max!r}")

    @classmethod
    def rounded_bound(cls, delta_c: float = 0.01, ell: int = 8) -> "EstimatorConfig":
        """Configuration with the rounded ``0.252`` initial bound."""
        return cls(delta_c=delta_c, ell=ell, initial_theta_max=ROUNDED_THETA_MAX)


def first_stage_update(c_interval: ConfidenceInterval, j: int) -> tuple[float, float]:
    """Invert a cosine interval into ``(theta_min, theta_max)``."""
    k = k_factor(j)
    return math.acos(c_interval.hi) / k, math.acos(c_interval.lo) / k


def estimate_sin(c_hat_j: float, c_hat_shifted: float, nu: float) -> float:
    """Recover ``sin(phi)`` from ``cos(phi)`` and ``cos(phi + nu)``, clamped to [-1, 1]."""
    sin_nu = math.sin(nu)
    if abs(sin_nu) < NU_GUARD:
        raise DegenerateNuError(nu)
    raw = (c_hat_j * math.cos(nu) - c_hat_shifted) / sin_nu
    return min(1.0, max(-1.0, raw))


def resolve_winding(theta_max_prev: float, rho_j: float, j: int) -> int:
    """Number of whole turns in ``K_j theta`` given the previous upper bound.

    Floored at zero because ``theta >= 0`` rules out negative windings.
    """
    n = math.floor((k_factor(j) * theta_max_prev - rho_j + MARGIN) / (2 * math.pi))
    return max(0, n)


def second_stage_bounds(rho_j: float, n_j: int, j: int) -> tuple[float, float]:
    """Unclamped second-stage bounds, width exactly ``(2 pi / 3) / K_j``."""
    k = k_factor(j)
    base = 2 * math.pi * n_j + rho_j
    return (base - MARGIN) / k, (base + MARGIN) / k


def second_stage_update(
    rho_j: float, n_j: int, j: int, theta_cap: float = SAFE_THETA_MAX
) -> tuple[float, float]:
    """Second-stage ``(theta_min, theta_max)`` clamped to ``[0, theta_cap]``."""
    lo, hi = second_stage_bounds(rho_j, n_j, j)
    return min(theta_cap, max(0.0, lo)), min(theta_cap, max(0.0, hi))


class TrialArrays(NamedTuple):
    """Flat per-iteration output shared by both kernel backends.

    Second-stage-only columns hold NaN (or -1 for ``n_wind``) in first-stage rows.
    """

    j0: int
    nu: float
    first_stage: np.ndarray
    theta_min: np.ndarray
    theta_max: np.ndarray
    c_hat: np.ndarray
    c_lo: np.ndarray
    c_hi: np.ndarray
    c_shift: np.ndarray
    s_hat: np.ndarray
    rho: np.ndarray
    n_wind: np.ndarray
    exact_q_calls: int
    paper_q_calls: int
    state_preparations: int


def run_trial_python(
    oracle: BernoulliOracle | ExactOracle,
    ell: int,
    delta_c: float,
    n_first: int,
    n_second: int,
    theta_cap: float,
) -> TrialArrays:
    """Pure-Python trial kernel; the compiled kernel must match it bit for bit."""
    first_stage = np.ones(ell, dtype=bool)
    theta_min = np.empty(ell)
    theta_max = np.empty(ell)
    c_hat = np.empty(ell)
    c_lo = np.empty(ell)
    c_hi = np.empty(ell)
    c_shift = np.full(ell, np.nan)
    s_hat = np.full(ell, np.nan)
    rho = np.full(ell, np.nan)
    n_wind = np.full(ell, -1, dtype=np.int64)

    in_first = True
    j0 = ell
    nu = math.nan
    t_max_prev = theta_cap
    for j in range(1, ell + 1):
        i = j - 1
        m = 2 ** (j - 1)
        if in_first:
            c = oracle.cos(m, n_first)
            ci = chernoff(c, n_first, delta_c)
            t_lo, t_hi = first_stage_update(ci, j)
            if 2 ** (j + 1) * t_hi >= TRANSITION_ANGLE and j < ell:
                j0 = j
                nu = 2 ** j0 * (t_hi + t_lo)
                in_first = False
        else:
            first_stage[i] = False
            c = oracle.cos(m, n_second)
            ci = chernoff(c, n_second, delta_c)
            c2 = oracle.cos(m + 2 ** (j0 - 1), n_second, billed_power=m)
            try:
                s = estimate_sin(c, c2, nu)
            except DegenerateNuError as exc:
                raise DegenerateNuError(nu, j) from exc
            r = atan_ext(s, c)
            n_j = resolve_winding(t_max_prev, r, j)
            t_lo, t_hi = second_stage_update(r, n_j, j, theta_cap)
            c_shift[i], s_hat[i], rho[i], n_wind[i] = c2, s, r, n_j
        c_hat[i], c_lo[i], c_hi[i] = c, ci.lo, ci.hi
        theta_min[i], theta_max[i] = t_lo, t_hi
        t_max_prev = t_hi

    led = oracle.ledger
    return TrialArrays(
        j0, nu, first_stage, theta_min, theta_max, c_hat, c_lo, c_hi, c_shift, s_hat, rho, n_wind,
        led.exact_q_calls, led.paper_q_calls, led.state_preparations,
    )


def run_trial(
    theta: float,
    config: EstimatorConfig,
    rng: np.random.Generator,
    backend: str | None = None,
) -> TrialArrays:
    """Run one shot-noise trial on the selected backend (default: fastest available)."""
    args = (config.ell, config.delta_c, config.n_shot_first, config.n_shot_second,
            config.initial_theta_max)
    if _backend.resolve(backend) == "cython":
        return _backend.compiled().run_trial(theta, *args, rng.bit_generator, TrialArrays)
    return run_trial_python(BernoulliOracle(theta, rng), *args)


def _opt(x: float) -> float | None:
    return None if math.isnan(x) else float(x)


@dataclass(frozen=True)
class IterationRecord:
    j: int
    stage: Literal["first", "second"]
    theta_min: float
    theta_max: float
    c_hat: float
    c_interval: ConfidenceInterval
    c_shifted: float | None = None
    s_hat: float | None = None
    rho: float | None = None
    n_winding: int | None = None

    def to_flat(self) -> dict:
        return {
            "j": self.j, "stage": self.stage,
            "theta_min": self.theta_min, "theta_max": self.theta_max,
            "c_hat": self.c_hat, "c_lo": self.c_interval.lo, "c_hi": self.c_interval.hi,
            "s_hat": self.s_hat, "rho": self.rho, "n_winding": self.n_winding,
        }


@dataclass(frozen=True)
class EstimationResult:
    theta_hat: float
    amplitude_hat: float
    j0: int
    nu: float | None
    ell: int
    delta_c: float
    trace: tuple[IterationRecord, ...]
    ledger: tuple[int, int, int]
    success_prob_bound: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "success_prob_bound", 1 - (2 * self.ell - self.j0) * self.delta_c)

    @property
    def exact_q_calls(self) -> int:
        return self.ledger[0]

    @property
    def paper_q_calls(self) -> int:
        return self.ledger[1]

    @property
    def first_stage_only(self) -> bool:
        return self.nu is None

    def to_dict(self, trace: bool = True) -> dict:
        out = {
            "theta_hat": self.theta_hat, "amplitude_hat": self.amplitude_hat,
            "j0": self.j0, "nu": self.nu, "ell": self.ell, "delta_c": self.delta_c,
            "exact_q_calls": self.ledger[0], "paper_q_calls": self.ledger[1],
            "state_preparations": self.ledger[2],
            "success_prob_bound": self.success_prob_bound,
        }
        if trace:
            out["trace"] = [r.to_flat() for r in self.trace]
        return out

    def to_json(self, trace: bool = True) -> str:
        return json.dumps(self.to_dict(trace), sort_keys=True)


def result_from_arrays(arr: TrialArrays, config: EstimatorConfig) -> EstimationResult:
    trace = []
    for i in range(config.ell):
        first = bool(arr.first_stage[i])
        trace.append(IterationRecord(
            j=i + 1,
            stage="first" if first else "second",
            theta_min=float(arr.theta_min[i]),
            theta_max=float(arr.theta_max[i]),
            c_hat=float(arr.c_hat[i]),
            c_interval=ConfidenceInterval(float(arr.c_lo[i]), float(arr.c_hi[i]), config.delta_c),
            c_shifted=None if first else float(arr.c_shift[i]),
            s_hat=None if first else float(arr.s_hat[i]),
            rho=None if first else float(arr.rho[i]),
            n_winding=None if first else int(arr.n_wind[i]),
        ))
    theta_hat = (float(arr.theta_min[-1]) + float(arr.theta_max[-1])) / 2
    return EstimationResult(
        theta_hat=theta_hat,
        amplitude_hat=min(1.0, 4 * math.sin(theta_hat)),
        j0=int(arr.j0),
        nu=_opt(arr.nu),
        ell=config.ell,
        delta_c=config.delta_c,
        trace=tuple(trace),
        ledger=(int(arr.exact_q_calls), int(arr.paper_q_calls), int(arr.state_preparations)),
    )


def run_fae(
    config: EstimatorConfig,
    spec: ProblemSpec,
    rng: np.random.Generator | None = None,
    *,
    exact: bool = False,
    backend: str | None = None,
) -> EstimationResult:
    """Estimate ``spec.amplitude`` with ``config.ell`` iterations.

    Args:
        config: Iteration count, confidence level and shot counts.
        spec: The problem; its seed is used when ``rng`` is not given.
        rng: Generator driving the shot noise.
        exact: Use the noiseless oracle instead of sampling.
        backend: ``"cython"``, ``"python"`` or None for the fastest available.

    Raises:
        DegenerateNuError: if the memorized shift angle is unusable.
    """
    if exact:
        arr = run_trial_python(
            ExactOracle(spec.theta), config.ell, config.delta_c, config.n_shot_first,
            config.n_shot_second, config.initial_theta_max,
        )
    else:
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
        arr = run_trial(spec.theta, config, rng, backend)
    return result_from_arrays(arr, config)


# --- ground-truth diagnostics -------------------------------------------------

def wrap_angle(x: float) -> float:
    """Map an angle into ``[-pi, pi]`` consistently with :func:`atan_ext`."""
    y = math.fmod(x, 2 * math.pi)
    if y > math.pi:
        y -= 2 * math.pi
    elif y < -math.pi:
        y += 2 * math.pi
    return y


def circular_distance(a: float, b: float) -> float:
    return abs(wrap_angle(a - b))


@dataclass(frozen=True)
class IterationCheck:
    j: int
    stage: str
    covered: bool
    cos_error: float
    shifted_cos_error: float | None = None
    rho_distance: float | None = None
    rho_ok: bool | None = None
    uniqueness_ok: bool | None = None
    first_stage_sound: bool | None = None


@dataclass(frozen=True)
class DiagnosticsReport:
    """Ground-truth checks for every iteration of one run."""

    checks: tuple[IterationCheck, ...]
    delta_nu: float | None
    nu_ok: bool | None
    first_failing_j: int | None
    final_covered: bool

    @property
    def all_covered(self) -> bool:
        return all(c.covered for c in self.checks)

    @property
    def all_pass(self) -> bool:
        """Coverage, winding margin and uniqueness hold at every iteration."""
        return all(
            c.covered and c.rho_ok is not False and c.uniqueness_ok is not False
            and c.first_stage_sound is not False
            for c in self.checks
        )

    @property
    def analysis_conditions_hold(self) -> bool:
        """The sufficient conditions: ``|dnu| < pi/60`` and second-stage ``dc <= 1/9``."""
        second = [c for c in self.checks if c.stage == "second"]
        cos_ok = all(c.cos_error <= 1 / 9 and c.shifted_cos_error <= 1 / 9 for c in second)
        return cos_ok and self.nu_ok is not False


def trace_diagnostics(result: EstimationResult, spec: ProblemSpec | float) -> DiagnosticsReport:
    """Compare a run's trace against the true angle."""
    theta = spec.theta if isinstance(spec, ProblemSpec) else float(spec)
    checks = []
    prev_lo, prev_hi = 0.0, math.inf
    for rec in result.trace:
        k = k_factor(rec.j)
        covered = rec.theta_min <= theta <= rec.theta_max
        cos_err = abs(rec.c_hat - math.cos(k * theta))
        if rec.stage == "first":
            checks.append(IterationCheck(
                j=rec.j, stage="first", covered=covered, cos_error=cos_err,
                first_stage_sound=k * theta < math.pi,
            ))
        else:
            m_shift = 2 ** (rec.j - 1) + 2 ** (result.j0 - 1)
            shift_err = abs(rec.c_shifted - math.cos(2 * (2 * m_shift + 1) * theta))
            dist = circular_distance(rec.rho, k * theta)
            unique = k * (prev_hi - prev_lo) + 2 * dist < 2 * math.pi
            checks.append(IterationCheck(
                j=rec.j, stage="second", covered=covered, cos_error=cos_err,
                shifted_cos_error=shift_err, rho_distance=dist, rho_ok=dist <= MARGIN,
                uniqueness_ok=unique,
            ))
        prev_lo, prev_hi = rec.theta_min, rec.theta_max
    delta_nu = None if result.nu is None else result.nu - 2 ** (result.j0 + 1) * theta
    first_fail = next((c.j for c in checks if not c.covered), None)
    last = result.trace[-1]
    return DiagnosticsReport(
        checks=tuple(checks),
        delta_nu=delta_nu,
        nu_ok=None if delta_nu is None else abs(delta_nu) < math.pi / 60,
        first_failing_j=first_fail,
        final_covered=last.theta_min <= theta <= last.theta_max,
    )


def first_stage_error_bound(result: EstimationResult) -> float:
    """Amplitude error bound of a run that never left the first stage."""
    last = result.trace[-1]
    return (math.acos(last.c_interval.lo) - math.acos(last.c_interval.hi)) / 2 ** result.ell


def final_error_bound(ell: int) -> float:
    """Amplitude error bound ``pi / (3 2^(ell-1))`` given full coverage."""
    return math.pi / (3 * 2 ** (ell - 1))


def assert_first_stage_sound(result: EstimationResult, theta_cap: float = SAFE_THETA_MAX) -> None:
    """Raise unless every first-stage iteration had ``K_j theta_max^(j-1) < pi``.

    That prior bound is what makes the arccos inversion unambiguous.
    """
    prev_hi = theta_cap
    for rec in result.trace:
        if rec.stage == "first" and k_factor(rec.j) * prev_hi >= math.pi:
            raise AssertionError(f"first-stage iteration {rec.j} unsound: prior theta_max={prev_hi}")
        prev_hi = rec.theta_max
