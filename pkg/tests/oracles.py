"""Independent reference implementations used as test oracles.

Everything here is deliberately written the slow, obvious way (direct sums,
explicit loops, closed forms) and stays independent of the package's fast
paths.
"""

import numpy as np
from scipy.special import erfc


def dzt_direct(u, L, K):
    """Stride-L short-time DFT grid by direct summation."""
    u = np.asarray(u, dtype=complex)
    V = np.zeros((L, K), dtype=complex)
    for l in range(L):
        for k in range(K):
            acc = 0.0 + 0.0j
            for m in range(K):
                acc += u[l + m * L] * np.exp(-2j * np.pi * k * m / K)
            V[l, k] = acc / np.sqrt(K)
    return V


def idzt_direct(V):
    L, K = V.shape
    u = np.zeros(L * K, dtype=complex)
    for l in range(L):
        for k in range(K):
            acc = 0.0 + 0.0j
            for m in range(K):
                acc += V[l, m] * np.exp(2j * np.pi * m * k / K)
            u[l + k * L] = acc / np.sqrt(K)
    return u


def psinc(t, n):
    """Periodic sinc pulse with period n and unit peak, complex phase included."""
    t = np.asarray(t, dtype=float)
    wrapped = ((t + n / 2.0) % n) - n / 2.0
    at_peak = np.isclose(wrapped, 0.0, atol=1e-9)
    tt = np.where(at_peak, 1.0, t)
    out = (
        np.exp(1j * np.pi * (1.0 - 1.0 / n) * tt)
        * np.sin(np.pi * tt)
        / (n * np.sin(np.pi * tt / n))
    )
    return np.where(at_peak, 1.0 + 0.0j, out)


def interpolate_direct(x, j):
    """Oversampled block by direct evaluation of the periodic-sinc expansion."""
    x = np.asarray(x, dtype=complex)
    n = x.size
    m = np.arange(j * n)
    s = np.zeros(j * n, dtype=complex)
    for idx in range(n):
        s += x[idx] * psinc(m / j - idx, n)
    return s


def dd_io_relation(Xdd, taps, L, K):
    """Received DD grid from the transmitted DD grid, path by path.

    Each path shifts the grid cyclically by its (delay, Doppler) taps and
    applies the delay-dependent Doppler phase; rows that wrapped around the
    delay axis pick up an extra Doppler-column phase.
    """
    n = L * K
    lidx = np.arange(L)[:, None]
    kidx = np.arange(K)[None, :]
    R = np.zeros((L, K), dtype=complex)
    for tap in taps:
        shifted = np.roll(np.roll(Xdd, tap.delay, axis=0), tap.doppler, axis=1)
        phase = np.exp(2j * np.pi * tap.doppler * ((lidx - tap.delay) % L) / n)
        wrap = np.where(lidx < tap.delay, np.exp(-2j * np.pi * kidx / K), 1.0)
        R += tap.gain * phase * wrap * shifted
    return R


def scalar_mmse(h, gamma):
    """MMSE coefficient for a flat channel y = h x + noise."""
    return np.conj(h) / (np.abs(h) ** 2 + 1.0 / gamma)


def qfunc(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def complex_randn(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)
