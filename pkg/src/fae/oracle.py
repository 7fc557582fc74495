"""Estimation problem definition and the sampling oracle.

The sampling oracle stands in for measuring ``Q^m |Psi'>``: the number of
shots landing in ``|11>`` on the last two qubits is Binomial with success
probability ``sin^2((2m+1) theta)``.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

#: Upper end of the attenuated angle, ``arcsin(1/4)``.
THETA_CAP = math.asin(0.25)


def attenuate(amplitude: float) -> float:
    """Map an amplitude in [0, 1] to the attenuated angle ``arcsin(amplitude/4)``."""
    if not 0.0 <= amplitude <= 1.0:
        raise DomainError(f"amplitude must lie in [0, 1], got {amplitude!r}")
    return math.asin(amplitude / 4)


@dataclass(frozen=True)
class ProblemSpec:
    """An unknown amplitude together with the seed that drives its oracle."""

    amplitude: float
    seed: int = 0
    theta: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", attenuate(self.amplitude))
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")


@dataclass(frozen=True)
class CosEstimate:
    """One batch of ``n_shot`` measurements at Grover power ``m``.

    ``c_hat`` estimates ``cos(2(2m+1) theta)``. For the noiseless oracle ``n_11``
    holds the expected (non-integer) count.
    """

    m: int
    n_shot: int
    n_11: float
    c_hat: float
    interval: tuple[float, float] | None = None


@dataclass
class QueryLedger:
    """Counters for Grover-operator calls and state preparations.

    ``exact_q_calls`` adds ``m`` per shot. ``paper_q_calls`` follows the
    worst-case accounting convention in which every shot of iteration ``j``
    costs ``2^(j-1)`` calls, including the shifted second-stage batch.
    """

    exact_q_calls: int = 0
    paper_q_calls: int = 0
    state_preparations: int = 0

    def record(self, m: int, n_shot: int, billed_power: int | None = None) -> None:
        self.exact_q_calls += n_shot * m
        self.paper_q_calls += n_shot * (m if billed_power is None else billed_power)
        self.state_preparations += n_shot


def ledger_snapshot(ledger: QueryLedger) -> tuple[int, int, int]:
    """Return ``(exact_q_calls, paper_q_calls, state_preparations)``."""
    return ledger.exact_q_calls, ledger.paper_q_calls, ledger.state_preparations


def good_probability(theta: float, m: int) -> float:
    """Probability of measuring ``|11>`` after ``m`` Grover applications."""
    s = math.sin((2 * m + 1) * theta)
    return s * s


def _check_shot_args(m: int, n_shot: int) -> None:
    if m < 1:
        raise DomainError(f"Grover power m must be >= 1, got {m!r}")
    if n_shot < 1:
        raise DomainError(f"n_shot must be >= 1, got {n_shot!r}")


def measure_cos(
    spec: ProblemSpec,
    m: int,
    n_shot: int,
    rng: np.random.Generator,
    ledger: QueryLedger | None = None,
    *,
    billed_power: int | None = None,
) -> CosEstimate:
    """Sample ``n_shot`` measurements of ``Q^m |Psi'>`` and estimate the cosine.

    Args:
        spec: The problem whose angle drives the Bernoulli probability.
        m: Number of Grover applications per shot, at least 1.
        n_shot: Number of shots, at least 1.
        rng: Generator consumed by exactly one binomial draw.
        ledger: Optional counters to charge for the batch.
        billed_power: Per-shot cost under the worst-case convention; defaults to ``m``.
    """
    _check_shot_args(m, n_shot)
    n_11 = int(rng.binomial(n_shot, good_probability(spec.theta, m)))
    if ledger is not None:
        ledger.record(m, n_shot, billed_power)
    return CosEstimate(m=m, n_shot=n_shot, n_11=n_11, c_hat=1 - 2 * n_11 / n_shot)


class BernoulliOracle:
    """Shot-noise oracle bound to one problem, one RNG stream and one ledger."""

    def __init__(self, theta: float, rng: np.random.Generator, ledger: QueryLedger | None = None):
        self.theta = theta
        self.rng = rng
        self.ledger = QueryLedger() if ledger is None else ledger

    def cos(self, m: int, n_shot: int, billed_power: int | None = None) -> float:
        _check_shot_args(m, n_shot)
        n_11 = int(self.rng.binomial(n_shot, good_probability(self.theta, m)))
        self.ledger.record(m, n_shot, billed_power)
        return 1 - 2 * n_11 / n_shot


class ExactOracle:
    """Infinite-shot limit: returns ``cos(2(2m+1) theta)`` with no noise.

    Shots are still charged to the ledger so query accounting matches the
    sampling oracle.
    """

    def __init__(self, theta: float, ledger: QueryLedger | None = None):
        self.theta = theta
        self.ledger = QueryLedger() if ledger is None else ledger

    def cos(self, m: int, n_shot: int, billed_power: int | None = None) -> float:
        _check_shot_args(m, n_shot)
        self.ledger.record(m, n_shot, billed_power)
        return math.cos(2 * (2 * m + 1) * self.theta)


def float_key(x: float) -> int:
    """Bit pattern of a double as an unsigned integer, usable as a seed key."""
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent PCG64 generator for ``key`` under ``master_seed``.

    Streams depend only on ``(master_seed, key)``, never on the order in which
    they are created, so trials can run in any order or in parallel.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
