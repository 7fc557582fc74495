"""Dense statevector check of the Grover rotation on a minimal register.

Qubit order is ``register (n) | flag | attenuation``; the last two qubits
are the two least significant bits of a basis index, so the good subspace
``I_n (x) |11><11|`` is every index congruent to 3 mod 4.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

MAX_REGISTER = 3


def ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _dim(n: int) -> int:
    if not 1 <= n <= MAX_REGISTER:
        raise DomainError(f"register size must be in 1..{MAX_REGISTER}, got {n!r}")
    return 2 ** (n + 2)


def good_projector(n: int = 1) -> np.ndarray:
    """``I_n (x) |11><11|`` as a dense matrix."""
    diag = np.zeros(_dim(n))
    diag[3::4] = 1.0
    return np.diag(diag).astype(complex)


def build_chi(theta_a: float, n: int = 1) -> np.ndarray:
    """Preparation unitary ``A (x) R`` acting on ``n + 2`` qubits.

    ``A`` rotates the flag qubit so the good branch has amplitude
    ``sin(theta_a)``; ``R`` rotates the last qubit so ``R|0> = |1>/4 + sqrt(15)/4 |0>``.
    """
    eye = np.eye(_dim(n) // 4, dtype=complex)
    return np.kron(np.kron(eye, ry(2 * theta_a)), ry(2 * math.asin(0.25)))


def build_grover(chi: np.ndarray) -> np.ndarray:
    """``Q = chi (I - 2|0><0|) chi^dag (I - 2 I_n (x) |11><11|)``."""
    dim = chi.shape[0]
    n = int(round(math.log2(dim))) - 2
    zero_reflect = np.eye(dim, dtype=complex)
    zero_reflect[0, 0] = -1.0
    good_reflect = np.eye(dim, dtype=complex) - 2 * good_projector(n)
    return chi @ zero_reflect @ chi.conj().T @ good_reflect


def initial_state(chi: np.ndarray) -> np.ndarray:
    """``chi |0...0>``, the first column of ``chi``."""
    return chi[:, 0].copy()


def p11(state: np.ndarray) -> float:
    return float(np.sum(np.abs(state[3::4]) ** 2))


def p11_after(chi: np.ndarray, q: np.ndarray, m: int) -> float:
    """Probability of ``|11>`` on the last two qubits of ``q^m chi |0>``."""
    if m < 0:
        raise DomainError(f"m must be >= 0, got {m!r}")
    return p11(np.linalg.matrix_power(q, m) @ initial_state(chi))


def p11_sequence(chi: np.ndarray, q: np.ndarray, m_max: int) -> np.ndarray:
    """``p11_after(chi, q, m)`` for every ``m`` in ``0..m_max`` by repeated application."""
    out = np.empty(m_max + 1)
    state = initial_state(chi)
    for m in range(m_max + 1):
        out[m] = p11(state)
        state = q @ state
    return out


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.allclose(u @ u.conj().T, np.eye(u.shape[0]), rtol=0.0, atol=atol))


def rotation_identity_error(theta_a_grid, m_max: int = 1000, n: int = 1) -> float:
    """Largest ``|p11_after(m) - sin^2((2m+1) theta)|`` over a grid and ``m <= m_max``."""
    worst = 0.0
    ms = np.arange(m_max + 1)
    for theta_a in theta_a_grid:
        chi = build_chi(theta_a, n)
        probs = p11_sequence(chi, build_grover(chi), m_max)
        theta = math.asin(math.sin(theta_a) / 4)
        worst = max(worst, float(np.max(np.abs(probs - np.sin((2 * ms + 1) * theta) ** 2))))
    return worst
