"""Self-contained verification suites behind ``fae verify``.

Each suite returns a :class:`SuiteResult` with one line per check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .confidence import atan_ext_array, chernoff_half_width
from .estimator import EstimatorConfig, run_fae, trace_diagnostics
from .oracle import ProblemSpec, substream
from .simulator import build_chi, build_grover, is_unitary, rotation_identity_error


@dataclass
class SuiteResult:
    name: str
    lines: list[tuple[bool, str]] = field(default_factory=list)

    def check(self, ok: bool, message: str) -> bool:
        self.lines.append((bool(ok), message))
        return bool(ok)

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.lines)

    def report(self) -> str:
        return "\n".join(f"[{'PASS' if ok else 'FAIL'}] {self.name}: {msg}" for ok, msg in self.lines)


def simulator_suite(n_grid: int = 50, m_max: int = 1000) -> SuiteResult:
    res = SuiteResult("simulator")
    grid = np.linspace(0.0, math.pi / 2, n_grid)
    err = rotation_identity_error(grid, m_max)
    res.check(err < 1e-10, f"max |p11 - sin^2((2m+1)theta)| = {err:.3e} over {n_grid} angles, m <= {m_max}")
    chi = build_chi(0.7)
    res.check(is_unitary(chi, 1e-12) and is_unitary(build_grover(chi)), "chi and Q unitary")
    return res


def atan_samples(n: int, rng: np.random.Generator):
    """Random admissible inputs for the atan error bound, branch-cut crossings removed.

    Returns ``(c, s, c_true, s_true, dc, ds)`` arrays.
    """
    c_true = rng.uniform(-1.0, 1.0, n)
    s_true = rng.choice([-1.0, 1.0], n) * np.sqrt(1.0 - c_true**2)
    dc = rng.uniform(0.0, 0.25, n)
    ds = rng.uniform(0.0, 0.5, n)
    c = c_true + rng.choice([-1.0, 1.0], n) * dc
    s = s_true + rng.choice([-1.0, 1.0], n) * ds
    keep = (np.abs(c) <= 1) & (np.abs(s) <= 1)
    crosses = (c_true - dc <= 0) & (s_true - ds <= 0) & (s_true + ds >= 0)
    keep &= ~crosses
    return c[keep], s[keep], c_true[keep], s_true[keep], dc[keep], ds[keep]


def atan_suite(samples: int = 1_000_000, seed: int = 0) -> SuiteResult:
    res = SuiteResult("atan")
    rng = substream(seed, 2)
    kept = 0
    violations = 0
    worst_ratio = 0.0
    while kept < samples:
        c, s, ct, st, dc, ds = atan_samples(samples - kept + 1000, rng)
        take = min(len(c), samples - kept)
        c, s, ct, st, dc, ds = (x[:take] for x in (c, s, ct, st, dc, ds))
        err = np.abs(atan_ext_array(s, c) - atan_ext_array(st, ct))
        bound = np.maximum(2 * dc + 2 * ds, 3 * dc)
        violations += int(np.sum(err >= bound))
        worst_ratio = max(worst_ratio, float(np.max(err / bound)))
        kept += take
    res.check(violations == 0,
              f"{violations} violations in {kept} admissible samples (max error/bound {worst_ratio:.4f})")
    phi = np.linspace(-math.pi, math.pi, 100_001)[1:]
    round_trip = float(np.max(np.abs(atan_ext_array(np.sin(phi), np.cos(phi)) - phi)))
    res.check(round_trip < 1e-12, f"round trip atan(sin phi, cos phi) error {round_trip:.2e}")
    return res


CHERNOFF_PS = (0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99)
CHERNOFF_SHOTS = (100, 1000, 10000)
CHERNOFF_DELTAS = (0.1, 0.01)


def chernoff_coverage(p: float, n_shot: int, delta_c: float, resamples: int,
                      rng: np.random.Generator) -> float:
    """Empirical coverage of the clamped interval for cosine ``1 - 2p``."""
    n11 = rng.binomial(n_shot, p, resamples)
    c_hat = 1 - 2 * n11 / n_shot
    w = chernoff_half_width(n_shot, delta_c)
    truth = 1 - 2 * p
    inside = (np.maximum(-1.0, c_hat - w) <= truth) & (truth <= np.minimum(1.0, c_hat + w))
    return float(np.mean(inside))


def chernoff_suite(resamples: int = 20_000, seed: int = 0) -> SuiteResult:
    res = SuiteResult("chernoff")
    rng = substream(seed, 3)
    for delta_c in CHERNOFF_DELTAS:
        sigma = math.sqrt(delta_c * (1 - delta_c) / resamples)
        floor = 1 - delta_c - 3 * sigma
        worst = min(
            (chernoff_coverage(p, n, delta_c, resamples, rng), p, n)
            for p in CHERNOFF_PS for n in CHERNOFF_SHOTS
        )
        res.check(worst[0] >= floor,
                  f"delta_c={delta_c}: min coverage {worst[0]:.4f} (p={worst[1]}, n={worst[2]}) >= {floor:.4f}")
    return res


def diagnostics_suite(trials: int = 1000, seed: int = 0) -> SuiteResult:
    res = SuiteResult("diagnostics")
    cfg = EstimatorConfig(delta_c=0.01, ell=10)
    # noiseless cosines with vanishing interval width emulate the infinite-shot limit
    limit = EstimatorConfig(delta_c=0.01, ell=10, n_shot_first=10**14, n_shot_second=10**14)
    for a in (0.0, 0.3, 1.0):
        spec = ProblemSpec(a)
        rep = trace_diagnostics(run_fae(limit, spec, exact=True), spec)
        dists = [c.rho_distance for c in rep.checks if c.rho_distance is not None]
        res.check(rep.all_pass and max(dists, default=0.0) < 1e-9,
                  f"noiseless a={a}: all checks pass, max rho distance {max(dists, default=0.0):.1e}")
    spec = ProblemSpec(0.3)
    covered = 0
    j0s = []
    for t in range(trials):
        result = run_fae(cfg, spec, substream(seed, 4, t))
        covered += trace_diagnostics(result, spec).all_covered
        j0s.append(result.j0)
    j0 = int(np.bincount(j0s).argmax())
    floor = 1 - (2 * cfg.ell - j0) * cfg.delta_c
    res.check(covered / trials >= floor,
              f"a=0.3 ell={cfg.ell}: all-iteration coverage {covered / trials:.4f} >= {floor:.4f}")
    return res


SUITES = {
    "simulator": simulator_suite,
    "atan": atan_suite,
    "chernoff": chernoff_suite,
    "diagnostics": diagnostics_suite,
}
