"""Embedded pilot-aided channel estimation for SC blocks.

A single DD-domain pilot is placed at (l_pilot, k_pilot).  Because SC data
symbols live in the time domain, each DD delay row is controlled by exactly
one stride-L time subsequence, so the guard region must blank whole delay
rows: l_guard rows on each side of the pilot row carry nothing.  The pilot's
time-domain image is a constant-envelope comb, which is what keeps the peak
power of the SC waveform unchanged.

At the receiver every channel path shifts the pilot by its (delay, Doppler)
tap pair, so the per-path gains can be read directly off the received DD grid
inside the guard region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .zak import dd_lookup

__all__ = [
    "PilotLayout",
    "FrameAssembly",
    "validate_layout",
    "data_capacity",
    "data_positions",
    "pilot_time_vector",
    "assemble_frame",
    "extract_data",
    "estimate_taps",
]


@dataclass(frozen=True)
class PilotLayout:
    """Pilot placement and guard geometry.

    l_pilot, k_pilot   DD coordinates of the pilot entry
    l_guard            blanked delay rows on each side of the pilot row
    e_pilot            pilot energy in the DD domain (pilot value sqrt(e_pilot))
    """

    l_pilot: int
    k_pilot: int
    l_guard: int
    e_pilot: float

    def __post_init__(self) -> None:
        if self.l_pilot < 0 or self.k_pilot < 0 or self.l_guard < 0:
            raise ValueError("pilot coordinates and guard width must be non-negative")
        if self.e_pilot <= 0:
            raise ValueError("pilot energy must be positive")

    @property
    def psi(self) -> complex:
        return complex(np.sqrt(self.e_pilot))


@dataclass(frozen=True)
class FrameAssembly:
    """An assembled pilot+data block and where its data symbols live."""

    x: np.ndarray
    data_idx: np.ndarray
    n_data: int


def validate_layout(layout: PilotLayout, L: int, K: int) -> None:
    if layout.l_pilot >= L or layout.k_pilot >= K:
        raise ValueError(f"pilot ({layout.l_pilot}, {layout.k_pilot}) outside a {L} x {K} grid")
    if 2 * layout.l_guard + 1 > L:
        raise ValueError(f"guard width {layout.l_guard} infeasible for L = {L}")


def data_capacity(L: int, l_guard: int, K: int) -> tuple[int, float]:
    """Data symbols per block and the fraction of the block they occupy.

    The pilot row plus l_guard rows on each side are lost, leaving
    (L - 2*l_guard - 1) * K data symbols, a fraction 1 - (2*l_guard + 1)/L.
    """
    if 2 * l_guard + 1 > L:
        raise ValueError(f"guard width {l_guard} infeasible for L = {L}")
    n_data = (L - 2 * l_guard - 1) * K
    return n_data, 1.0 - (2 * l_guard + 1) / L


def _data_delay_slots(layout: PilotLayout, L: int) -> np.ndarray:
    """Delay rows that carry data, in cyclic order away from the pilot row."""
    l_data = L - 2 * layout.l_guard - 1
    start = layout.l_pilot + layout.l_guard + 1
    return (start + np.arange(l_data)) % L


def data_positions(layout: PilotLayout, L: int, K: int) -> np.ndarray:
    """Time indices of data symbols in fill order.

    Fill order is natural block time: all data rows of the first stride period,
    then the second, and so on, so for the pilot-at-origin layout the data
    occupies consecutive time slots between guard gaps.
    """
    validate_layout(layout, L, K)
    slots = _data_delay_slots(layout, L)
    k = np.arange(K)
    return (slots[None, :] + k[:, None] * L).reshape(-1)


def pilot_time_vector(layout: PilotLayout, L: int, K: int) -> np.ndarray:
    """Time-domain pilot comb: the inverse DZT of the single-entry pilot grid.

    Nonzero only at offsets l_pilot + k*L, each with constant magnitude
    sqrt(e_pilot / K) and a Doppler-index phase progression.
    """
    validate_layout(layout, L, K)
    x = np.zeros(L * K, dtype=complex)
    k = np.arange(K)
    x[layout.l_pilot + k * L] = (
        layout.psi / np.sqrt(K) * np.exp(2j * np.pi * layout.k_pilot * k / K)
    )
    return x


def assemble_frame(data: np.ndarray, layout: PilotLayout, L: int, K: int) -> FrameAssembly:
    """Place data symbols around the pilot comb, zeroing the guard rows."""
    data = np.asarray(data, dtype=complex)
    n_data, _ = data_capacity(L, layout.l_guard, K)
    if data.size != n_data:
        raise ValueError(f"expected {n_data} data symbols, got {data.size}")
    idx = data_positions(layout, L, K)
    x = pilot_time_vector(layout, L, K)
    x[idx] = data
    return FrameAssembly(x=x, data_idx=idx, n_data=n_data)


def extract_data(y: np.ndarray, layout: PilotLayout, L: int, K: int) -> np.ndarray:
    """Read the data-carrying positions of an equalized time-domain block."""
    y = np.asarray(y)
    if y.size != L * K:
        raise ValueError(f"expected a block of length {L * K}, got {y.size}")
    return y[data_positions(layout, L, K)]


def estimate_taps(rdd: np.ndarray, layout: PilotLayout, known_taps) -> np.ndarray:
    """Estimate per-path complex gains from the received DD grid.

    known_taps is the list of (delay, Doppler) integer pairs; the estimate for
    each path is the quasi-periodic grid value at the pilot coordinates shifted
    by that pair, divided by the pilot value (and, for a pilot off the zero
    delay row, by the Doppler phase the shift accumulates over l_pilot
    samples).  With sufficient guard the estimate is exact in the absence of
    noise; with noise each gain sees an independent error of variance
    n0 / e_pilot.
    """
    rdd = np.asarray(rdd)
    L, K = rdd.shape
    validate_layout(layout, L, K)
    pairs = [(int(l), int(k)) for l, k in known_taps]
    l_max = max(l for l, _ in pairs)
    k_max = max(abs(k) for _, k in pairs)
    if layout.l_guard < l_max:
        raise ValueError(
            f"guard width {layout.l_guard} below maximum delay tap {l_max}: "
            "pilot region would be data-contaminated"
        )
    if K <= 2 * k_max:
        raise ValueError(f"Doppler bins K={K} must exceed twice the maximum Doppler tap {k_max}")
    n = L * K
    est = np.empty(len(pairs), dtype=complex)
    for i, (lp, kp) in enumerate(pairs):
        raw = dd_lookup(rdd, layout.l_pilot + lp, layout.k_pilot + kp)
        est[i] = raw / (layout.psi * np.exp(2j * np.pi * kp * layout.l_pilot / n))
    return est
