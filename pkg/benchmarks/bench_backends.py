"""Time the compiled and pure-Python trial kernels on identical substreams.

Usage::

    python benchmarks/bench_backends.py --trials 500 --ell 14
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from fae import _backend
from fae.estimator import EstimatorConfig, run_trial
from fae.oracle import attenuate, float_key, substream


def time_backend(backend: str, amplitudes, ell: int, trials: int) -> tuple[float, list]:
    cfg = EstimatorConfig(ell=ell)
    out = []
    start = time.perf_counter()
    for a in amplitudes:
        theta = attenuate(a)
        for t in range(trials):
            out.append(run_trial(theta, cfg, substream(0, float_key(a), ell, t), backend))
    return time.perf_counter() - start, out


def _same(x, y) -> bool:
    return all(
        np.array_equal(a, b, equal_nan=True) if isinstance(a, np.ndarray)
        else (a == b or (a != a and b != b))
        for a, b in zip(x, y)
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=500)
    parser.add_argument("--ell", type=int, default=14)
    parser.add_argument("--amplitudes", default="0.1,0.2,0.3,0.4")
    args = parser.parse_args(argv)
    amplitudes = [float(x) for x in args.amplitudes.split(",")]
    n = len(amplitudes) * args.trials

    py_time, py_out = time_backend("python", amplitudes, args.ell, args.trials)
    print(f"python : {py_time:7.3f} s  ({1e6 * py_time / n:7.1f} us/trial)")
    if not _backend.HAVE_COMPILED:
        print("cython : not built")
        return 0
    cy_time, cy_out = time_backend("cython", amplitudes, args.ell, args.trials)
    print(f"cython : {cy_time:7.3f} s  ({1e6 * cy_time / n:7.1f} us/trial)")
    print(f"speedup: {py_time / cy_time:.2f}x")
    identical = all(_same(p, c) for p, c in zip(py_out, cy_out))
    print(f"bit-identical outputs: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
