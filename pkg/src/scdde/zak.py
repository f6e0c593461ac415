"""Discrete Zak transform (DZT) and delay-Doppler grid utilities.

A length ``N = L*K`` block of time samples maps to an ``L x K`` delay-Doppler
(DD) grid: entry ``(l, k)`` is the ``k``-th bin of a unitary K-point DFT taken
over the K samples at stride L starting from offset ``l``.  Grids are plain
complex ndarrays of shape ``(L, K)``.

Vectorisation convention: ``vec`` stacks columns, so ``vec(V)[l + k*L] ==
V[l, k]``.  With that ordering the whole transform is the unitary matrix
``kron(F_K, I_L)`` (see :func:`vdzt_matrix`), which is what every matrix-form
computation in the receiver relies on.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "dft_matrix",
    "vdzt_matrix",
    "dzt",
    "idzt",
    "dzt_cols",
    "idzt_cols",
    "dd_vec",
    "dd_from_vec",
    "dd_lookup",
]


def dft_matrix(n: int) -> np.ndarray:
    """Unitary n-point DFT matrix, entry (m, q) = exp(-2j*pi*m*q/n)/sqrt(n)."""
    if n < 1:
        raise ValueError(f"DFT size must be >= 1, got {n}")
    idx = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)


def vdzt_matrix(L: int, K: int) -> np.ndarray:
    """Unitary (L*K) x (L*K) matrix sending a block to its stacked DD grid.

    Explicit Kronecker form ``kron(F_K, I_L)``; the FFT-based :func:`dzt` is
    the fast path and must agree with this matrix to numerical precision.
    """
    if L < 1 or K < 1:
        raise ValueError(f"grid dimensions must be >= 1, got ({L}, {K})")
    return np.kron(dft_matrix(K), np.eye(L))


def dzt(u: np.ndarray, L: int, K: int) -> np.ndarray:
    """(L, K)-point discrete Zak transform of a length L*K vector.

    Returns the L x K grid V with
    ``V[l, k] = (1/sqrt(K)) * sum_m u[l + m*L] * exp(-2j*pi*k*m/K)``.
    """
    u = np.asarray(u, dtype=complex)
    if u.ndim != 1 or u.size != L * K:
        raise ValueError(f"expected a flat vector of length {L * K}, got shape {u.shape}")
    sub = u.reshape((L, K), order="F")  # sub[l, m] = u[l + m*L]
    return np.fft.fft(sub, axis=1) / np.sqrt(K)


def idzt(V: np.ndarray) -> np.ndarray:
    """Inverse DZT: length L*K vector with u[l + k*L] recovered from grid V."""
    V = np.asarray(V, dtype=complex)
    if V.ndim != 2:
        raise ValueError(f"expected an L x K grid, got shape {V.shape}")
    K = V.shape[1]
    sub = np.fft.ifft(V, axis=1) * np.sqrt(K)
    return sub.reshape(-1, order="F")


def dzt_cols(A: np.ndarray, L: int, K: int) -> np.ndarray:
    """Apply the vectorised DZT to every column of A without forming the matrix."""
    A = np.asarray(A, dtype=complex)
    if A.shape[0] != L * K:
        raise ValueError(f"leading dimension must be {L * K}, got {A.shape[0]}")
    cube = A.reshape((L, K, -1), order="F")
    cube = np.fft.fft(cube, axis=1) / np.sqrt(K)
    return cube.reshape(A.shape, order="F")


def idzt_cols(A: np.ndarray, L: int, K: int) -> np.ndarray:
    """Inverse of :func:`dzt_cols`."""
    A = np.asarray(A, dtype=complex)
    if A.shape[0] != L * K:
        raise ValueError(f"leading dimension must be {L * K}, got {A.shape[0]}")
    cube = A.reshape((L, K, -1), order="F")
    cube = np.fft.ifft(cube, axis=1) * np.sqrt(K)
    return cube.reshape(A.shape, order="F")


def dd_vec(V: np.ndarray) -> np.ndarray:
    """Stack grid columns into the canonical vector: out[l + k*L] = V[l, k]."""
    return np.asarray(V).reshape(-1, order="F")


def dd_from_vec(v: np.ndarray, L: int, K: int) -> np.ndarray:
    """Undo :func:`dd_vec`."""
    v = np.asarray(v)
    if v.size != L * K:
        raise ValueError(f"expected length {L * K}, got {v.size}")
    return v.reshape((L, K), order="F")


def dd_lookup(V: np.ndarray, l: int, k: int) -> complex:
    """Quasi-periodically extended grid value at arbitrary integer (l, k).

    The grid is periodic along Doppler; along delay it is periodic up to the
    phase ``exp(2j*pi*k*m/K)`` picked up per wrap of m*L rows.  In-range
    coordinates return the stored entry unchanged.
    """
    L, K = V.shape
    wraps = l // L
    value = V[l - wraps * L, k % K]
    if wraps == 0:
        return value
    return value * np.exp(2j * np.pi * k * wraps / K)
