"""Doubly-selective (delay + Doppler) block-fading channel.

The discrete model is circular: the CP is assumed long enough that each block
sees a cyclic convolution, so delay acts as a cyclic shift and Doppler as a
per-sample phase progression.  Delay taps are integer multiples of the Nyquist
interval, Doppler taps integer multiples of one cycle per block.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .zak import dzt_cols

__all__ = [
    "PathTap",
    "ChannelRealization",
    "DEFAULT_PROFILE",
    "default_profile",
    "load_profile",
    "validate_profile",
    "profile_max_taps",
    "check_grid_feasible",
    "sample_rayleigh",
    "fixed_gains",
    "awgn",
    "apply_channel",
    "build_time_matrix",
    "dd_channel_matrix",
    "dd_sparse_from_taps",
    "received_snr",
]

# Standard 8-path test profile: delay taps 0..7 paired with Doppler taps
# (0, 1, 1, 2, 3, 3, 4, 4).
DEFAULT_PROFILE: tuple[tuple[int, int], ...] = (
    (0, 0),
    (1, 1),
    (2, 1),
    (3, 2),
    (4, 3),
    (5, 3),
    (6, 4),
    (7, 4),
)


@dataclass(frozen=True)
class PathTap:
    """One propagation path: complex gain, integer delay and Doppler taps."""

    gain: complex
    delay: int
    doppler: int

    def __post_init__(self) -> None:
        if self.delay < 0:
            raise ValueError("delay tap must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    """A drawn set of path taps for one block of length n."""

    taps: tuple[PathTap, ...]
    n: int

    def __post_init__(self) -> None:
        if not self.taps:
            raise ValueError("a channel needs at least one path")


def default_profile() -> list[tuple[int, int]]:
    """The fixed 8-path (delay, Doppler) tap profile used throughout."""
    return [tuple(p) for p in DEFAULT_PROFILE]


def validate_profile(profile) -> list[tuple[int, int]]:
    pairs = [(int(l), int(k)) for l, k in profile]
    if not pairs:
        raise ValueError("empty channel profile")
    if any(l < 0 for l, _ in pairs):
        raise ValueError("delay taps must be non-negative")
    if len(set(pairs)) != len(pairs):
        raise ValueError("duplicate (delay, Doppler) pair in profile")
    return pairs


def load_profile(path) -> list[tuple[int, int]]:
    """Read a profile file: {"paths": [{"l": int, "k": int}, ...]}."""
    with open(path) as fh:
        doc = json.load(fh)
    pairs = [(rec["l"], rec["k"]) for rec in doc["paths"]]
    if "p" in doc and doc["p"] != len(pairs):
        raise ValueError(f"profile declares {doc['p']} paths but lists {len(pairs)}")
    return validate_profile(pairs)


def profile_max_taps(profile) -> tuple[int, int]:
    """(max delay tap, max |Doppler tap|) of a profile."""
    pairs = validate_profile(profile)
    return max(l for l, _ in pairs), max(abs(k) for _, k in pairs)


def check_grid_feasible(L: int, K: int, profile) -> None:
    """Reject DD grids too small to separate the profile's delay/Doppler spread.

    Requires L > max delay tap and K > twice the max |Doppler| tap.
    """
    l_max, k_max = profile_max_taps(profile)
    if L <= l_max:
        raise ValueError(f"delay bins L={L} must exceed the maximum delay tap {l_max}")
    if K <= 2 * k_max:
        raise ValueError(f"Doppler bins K={K} must exceed twice the maximum Doppler tap {k_max}")


def sample_rayleigh(profile, n: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw i.i.d. complex Gaussian gains with equal power 1/P per path."""
    pairs = validate_profile(profile)
    p = len(pairs)
    scale = np.sqrt(1.0 / (2.0 * p))
    gains = scale * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    taps = tuple(PathTap(gain=g, delay=l, doppler=k) for g, (l, k) in zip(gains, pairs))
    return ChannelRealization(taps=taps, n=n)


def fixed_gains(profile, n: int) -> ChannelRealization:
    """Deterministic unit-total-power gains sqrt(1/P); P=1 gives the AWGN channel."""
    pairs = validate_profile(profile)
    g = np.sqrt(1.0 / len(pairs))
    taps = tuple(PathTap(gain=g, delay=l, doppler=k) for l, k in pairs)
    return ChannelRealization(taps=taps, n=n)


def awgn(n: int, n0: float, rng: np.random.Generator) -> np.ndarray:
    """Complex white Gaussian noise with per-sample variance n0."""
    if n0 < 0:
        raise ValueError("noise variance must be non-negative")
    if n0 == 0:
        return np.zeros(n, dtype=complex)
    scale = np.sqrt(n0 / 2.0)
    return scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def apply_channel(
    x: np.ndarray,
    ch: ChannelRealization,
    n0: float = 0.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Pass a block through the channel: cyclic delay, Doppler phase, AWGN.

    r[n] = sum_p gain_p * exp(2j*pi*doppler_p*(n - delay_p)/N) * x[(n - delay_p) mod N] + noise
    """
    x = np.asarray(x, dtype=complex)
    n = ch.n
    if x.size != n:
        raise ValueError(f"block length {x.size} does not match channel length {n}")
    idx = np.arange(n)
    r = np.zeros(n, dtype=complex)
    for tap in ch.taps:
        phase = np.exp(2j * np.pi * tap.doppler * (idx - tap.delay) / n)
        r += tap.gain * phase * np.roll(x, tap.delay)
    if n0 > 0:
        if rng is None:
            raise ValueError("rng required when noise variance is positive")
        r += awgn(n, n0, rng)
    return r


def build_time_matrix(ch: ChannelRealization) -> np.ndarray:
    """Dense N x N time-domain channel matrix (cyclic shifts times Doppler diagonals)."""
    n = ch.n
    h = np.zeros((n, n), dtype=complex)
    rows = np.arange(n)
    for tap in ch.taps:
        cols = (rows - tap.delay) % n
        h[rows, cols] += tap.gain * np.exp(2j * np.pi * tap.doppler * cols / n)
    return h


def dd_channel_matrix(h: np.ndarray, L: int, K: int) -> np.ndarray:
    """Conjugate the time-domain channel matrix into the DD domain.

    Equals Z @ h @ Z^H for the unitary stacked-grid transform Z, computed with
    batched FFTs instead of materialising Z.
    """
    h = np.asarray(h, dtype=complex)
    n = L * K
    if h.shape != (n, n):
        raise ValueError(f"expected a {n} x {n} matrix, got {h.shape}")
    zh = dzt_cols(h, L, K)
    return dzt_cols(zh.conj().T, L, K).conj().T


def dd_sparse_from_taps(ch: ChannelRealization, L: int, K: int):
    """DD-domain channel matrix assembled directly from the taps, as CSR.

    Column (l0, k0) of the grid feeds row ((l0+delay) mod L, (k0+doppler) mod K)
    for every path, weighted by gain * exp(2j*pi*doppler*l0/N); entries whose
    delay shift wrapped the grid carry the extra exp(-2j*pi*k_row/K) phase.
    Identical to conjugating the time-domain matrix, but costs O(P*N).
    """
    from scipy.sparse import coo_matrix

    n = L * K
    if ch.n != n:
        raise ValueError(f"channel block length {ch.n} does not match grid {L}x{K}")
    l0 = np.arange(n) % L
    k0 = np.arange(n) // L
    rows = []
    cols = []
    vals = []
    for tap in ch.taps:
        lr = l0 + tap.delay
        wrapped = lr >= L
        lr = lr % L
        kr = (k0 + tap.doppler) % K
        val = tap.gain * np.exp(2j * np.pi * tap.doppler * l0 / n)
        val = np.where(wrapped, val * np.exp(-2j * np.pi * kr / K), val)
        rows.append(lr + kr * L)
        cols.append(np.arange(n))
        vals.append(val)
    return coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def received_snr(profile_power: float, es: float, n0: float) -> float:
    """Mean received SNR: total path power times es / n0."""
    if n0 <= 0:
        raise ValueError("noise variance must be positive")
    return profile_power * es / n0
