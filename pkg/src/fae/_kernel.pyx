# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trial kernel.

Mirrors ``estimator.run_trial_python`` operation for operation so both
backends return bit-identical traces for the same bit generator state. Shot
noise uses numpy's own ``random_binomial``, the routine behind
``Generator.binomial``.
"""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.math cimport acos, atan, cos, floor, log, sin, sqrt, fabs, NAN, M_PI
from libc.stdint cimport int64_t
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport binomial_t, random_binomial

from .errors import DegenerateNuError

cnp.import_array()

cdef double TRANSITION_ANGLE = 3 * M_PI / 8
cdef double MARGIN = M_PI / 3
cdef double NU_GUARD = 0.1


cdef struct Ledger:
    int64_t exact
    int64_t billed
    int64_t preps


cdef inline double measure(bitgen_t *rng, binomial_t *bs, double theta, int64_t m,
                           int64_t n_shot, int64_t billed_power, Ledger *led) noexcept nogil:
    cdef double s = sin((2 * m + 1) * theta)
    cdef int64_t n11 = random_binomial(rng, s * s, n_shot, bs)
    led.exact += n_shot * m
    led.billed += n_shot * billed_power
    led.preps += n_shot
    return 1.0 - 2.0 * n11 / n_shot


cdef inline double clamp(double x, double lo, double hi) noexcept nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


cdef double atan_ext(double s, double c) noexcept nogil:
    if c > 0:
        return atan(s / c)
    if c == 0:
        if s > 0:
            return M_PI / 2
        if s < 0:
            return -M_PI / 2
        return 0.0
    if s >= 0:
        return M_PI + atan(s / c)
    return -M_PI + atan(s / c)


def run_trial(double theta, int ell, double delta_c, int64_t n_first, int64_t n_second,
              double theta_cap, object bit_generator, object result_type):
    """Run one shot-noise trial; returns ``result_type(*fields)``."""
    capsule = bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("invalid bit generator capsule")
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")
    cdef binomial_t bs
    bs.has_binomial = 0

    first_stage_a = np.ones(ell, dtype=bool)
    theta_min_a = np.empty(ell)
    theta_max_a = np.empty(ell)
    c_hat_a = np.empty(ell)
    c_lo_a = np.empty(ell)
    c_hi_a = np.empty(ell)
    c_shift_a = np.full(ell, np.nan)
    s_hat_a = np.full(ell, np.nan)
    rho_a = np.full(ell, np.nan)
    n_wind_a = np.full(ell, -1, dtype=np.int64)

    cdef unsigned char[::1] first_stage = first_stage_a.view(np.uint8)
    cdef double[::1] theta_min = theta_min_a
    cdef double[::1] theta_max = theta_max_a
    cdef double[::1] c_hat = c_hat_a
    cdef double[::1] c_lo = c_lo_a
    cdef double[::1] c_hi = c_hi_a
    cdef double[::1] c_shift = c_shift_a
    cdef double[::1] s_hat = s_hat_a
    cdef double[::1] rho = rho_a
    cdef int64_t[::1] n_wind = n_wind_a

    cdef Ledger led
    led.exact = 0
    led.billed = 0
    led.preps = 0

    cdef double log_term = log(2.0 / delta_c)
    cdef double w1 = sqrt(log_term * 12 / n_first)
    cdef double w2 = sqrt(log_term * 12 / n_second)
    cdef bint in_first = True
    cdef int j0 = ell
    cdef double nu = NAN
    cdef double t_max_prev = theta_cap
    cdef double c, c2, lo, hi, t_lo, t_hi, s, sin_nu, r, base
    cdef int64_t m, k, n_j
    cdef int j, i
    cdef bint degenerate = False

    with _Held(bit_generator):
        with nogil:
            for j in range(1, ell + 1):
                i = j - 1
                m = (<int64_t> 1) << (j - 1)
                k = ((<int64_t> 1) << (j + 1)) + 2
                if in_first:
                    c = measure(rng, &bs, theta, m, n_first, m, &led)
                    lo = clamp(c - w1, -1.0, 1.0)
                    hi = clamp(c + w1, -1.0, 1.0)
                    t_lo = acos(hi) / k
                    t_hi = acos(lo) / k
                    if ((<int64_t> 1) << (j + 1)) * t_hi >= TRANSITION_ANGLE and j < ell:
                        j0 = j
                        nu = ((<int64_t> 1) << j0) * (t_hi + t_lo)
                        in_first = False
                else:
                    first_stage[i] = 0
                    c = measure(rng, &bs, theta, m, n_second, m, &led)
                    lo = clamp(c - w2, -1.0, 1.0)
                    hi = clamp(c + w2, -1.0, 1.0)
                    c2 = measure(rng, &bs, theta, m + ((<int64_t> 1) << (j0 - 1)), n_second, m, &led)
                    sin_nu = sin(nu)
                    if fabs(sin_nu) < NU_GUARD:
                        degenerate = True
                        break
                    s = clamp((c * cos(nu) - c2) / sin_nu, -1.0, 1.0)
                    r = atan_ext(s, c)
                    n_j = <int64_t> floor((k * t_max_prev - r + MARGIN) / (2 * M_PI))
                    if n_j < 0:
                        n_j = 0
                    base = 2 * M_PI * n_j + r
                    t_lo = clamp((base - MARGIN) / k, 0.0, theta_cap)
                    t_hi = clamp((base + MARGIN) / k, 0.0, theta_cap)
                    c_shift[i] = c2
                    s_hat[i] = s
                    rho[i] = r
                    n_wind[i] = n_j
                c_hat[i] = c
                c_lo[i] = lo
                c_hi[i] = hi
                theta_min[i] = t_lo
                theta_max[i] = t_hi
                t_max_prev = t_hi

    if degenerate:
        raise DegenerateNuError(nu, j)
    return result_type(
        j0, nu, first_stage_a, theta_min_a, theta_max_a, c_hat_a, c_lo_a, c_hi_a,
        c_shift_a, s_hat_a, rho_a, n_wind_a, led.exact, led.billed, led.preps,
    )


class _Held:
    """Hold the bit generator's lock while the kernel draws from it."""

    def __init__(self, bit_generator):
        self.lock = bit_generator.lock

    def __enter__(self):
        self.lock.acquire()

    def __exit__(self, *exc):
        self.lock.release()
