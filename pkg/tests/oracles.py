"""Independent oracles the tests check the implementation against.

Everything here deliberately avoids the code paths under test: the matrix
exponential is Taylor series with scaling and squaring (the engine uses
eigendecomposition), the Hamiltonian is assembled from explicit Kronecker
products (the model uses index arithmetic), and the binomial tail is exact
integer combinatorics.
"""

from __future__ import annotations

import math
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SP = np.array([[0, 1], [0, 0]], dtype=complex)
SM = np.array([[0, 0], [1, 0]], dtype=complex)


def taylor_expm(a: np.ndarray, terms: int = 40) -> np.ndarray:
    """exp(a) by scaled-and-squared Taylor series."""
    a = np.asarray(a, dtype=complex)
    norm = np.linalg.norm(a, ord=np.inf)
    squarings = max(0, int(math.ceil(math.log2(norm))) + 1) if norm > 0 else 0
    b = a / (2.0**squarings)
    result = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ b / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def kron_embed(op: np.ndarray, n: int, target: int) -> np.ndarray:
    ops = [I2] * n
    ops[target] = op
    return reduce(np.kron, ops)


def kron_hamiltonian(spec, mask=None) -> np.ndarray:
    """Zeeman + flip-flop assembly straight from Kronecker products."""
    n = spec.n
    dim = 1 << n
    m = np.zeros((dim, dim), dtype=complex)
    for q in range(n):
        m -= spec.larmor(q) * kron_embed(SZ, n, q)
    for (i, j) in spec.coupled_pairs():
        factor = 1.0 if mask is None else mask.factor(i, j)
        strength = factor * spec.pair_coupling(i, j)
        flip_flop = (
            kron_embed(SP, n, i) @ kron_embed(SM, n, j)
            + kron_embed(SM, n, i) @ kron_embed(SP, n, j)
        )
        m -= strength * flip_flop
    return m


def binomial_tail(r: int, k_min: int, p: float) -> float:
    """P(X >= k_min) for X ~ Binomial(r, p), by direct summation."""
    return sum(math.comb(r, k) * p**k * (1 - p) ** (r - k) for k in range(k_min, r + 1))


def rabi_transfer_probability(j: float, delta: float, t: float) -> float:
    """Two-level transfer |<down|e^{-iHt}|up>|^2 for H = delta sz - j sx."""
    omega = math.sqrt(j * j + delta * delta)
    if omega == 0.0:
        return 0.0
    return (j * j / (omega * omega)) * math.sin(omega * t) ** 2


def five_sigma(p: float, shots: int) -> float:
    """Five binomial standard errors on an empirical frequency."""
    return 5.0 * math.sqrt(max(p * (1 - p), 1e-12) / shots)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return amps / np.linalg.norm(amps)


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    overlap = np.vdot(a, b)
    return abs(abs(overlap) - 1.0) < tol and np.allclose(
        a * (overlap / abs(overlap)), b, atol=tol
    )
