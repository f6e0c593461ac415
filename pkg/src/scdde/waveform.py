"""Block modulators (SC, OTFS, OFDM), constellation mapping, CP handling, PAPR.

All three schemes share one physical synthesis step: a block of N Nyquist-rate
samples is interpolated by zero-padding its N-point spectrum to J*N bins and
taking the J*N-point inverse DFT.  The sqrt(J) gain is chosen so the original
N samples reappear unchanged at stride J, which keeps the mean sample power
equal to the symbol energy at every oversampling factor (PAPR itself is scale
invariant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .zak import dd_vec, idzt

__all__ = [
    "FrameConfig",
    "ModulationScheme",
    "OversampledSignal",
    "modulation",
    "modulate_bits",
    "hard_bits",
    "phase_ramp",
    "interpolate_block",
    "sc_transmit",
    "otfs_transmit",
    "otfs_waveform",
    "ofdm_transmit",
    "add_cp",
    "remove_cp",
    "papr_of_block",
]

_BITS_PER_SYMBOL = {"bpsk": 1, "ps-bpsk": 1, "qpsk": 2, "ps-qpsk": 2}
_PHASE_STEP = {"bpsk": 0.0, "ps-bpsk": np.pi / 2, "qpsk": 0.0, "ps-qpsk": np.pi / 4}


@dataclass(frozen=True)
class FrameConfig:
    """Block geometry shared by transmitter and receiver.

    n       block length in symbols (= l * k)
    l, k    delay / Doppler grid dimensions
    j       oversampling factor for waveform synthesis
    n_cp    cyclic prefix length in Nyquist samples
    es      average data symbol energy
    t0      Nyquist interval (normalised); block time is n*t0, mainlobe
            bandwidth 1/t0
    """

    n: int
    l: int
    k: int
    j: int = 1
    n_cp: int = 0
    es: float = 1.0
    t0: float = 1.0

    def __post_init__(self) -> None:
        if self.l * self.k != self.n:
            raise ValueError(f"l*k = {self.l * self.k} must equal n = {self.n}")
        if self.j < 1:
            raise ValueError("oversampling factor must be >= 1")
        if self.n_cp < 0:
            raise ValueError("CP length must be >= 0")

    @property
    def block_time(self) -> float:
        return self.n * self.t0

    @property
    def bandwidth(self) -> float:
        return 1.0 / self.t0


@dataclass(frozen=True)
class ModulationScheme:
    """PSK constellation with an optional deterministic per-index phase ramp."""

    kind: str
    es: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in _BITS_PER_SYMBOL:
            raise ValueError(f"unknown modulation {self.kind!r}")

    @property
    def bits_per_symbol(self) -> int:
        return _BITS_PER_SYMBOL[self.kind]

    @property
    def phase_step(self) -> float:
        return _PHASE_STEP[self.kind]


def modulation(kind: str, es: float = 1.0) -> ModulationScheme:
    return ModulationScheme(kind=kind, es=es)


def phase_ramp(scheme: ModulationScheme, n: int) -> np.ndarray:
    """Per-symbol rotation exp(j*step*index); all-ones for plain PSK."""
    if scheme.phase_step == 0.0:
        return np.ones(n, dtype=complex)
    return np.exp(1j * scheme.phase_step * np.arange(n))


def modulate_bits(bits: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    """Gray-map bits to symbols with average energy es.

    BPSK sends bit 0 to +sqrt(es); QPSK puts bit pairs on I/Q with the usual
    Gray quadrant labelling.  Phase-shift variants multiply symbol index n by
    exp(j*pi*n/2) (ps-bpsk) or exp(j*pi*n/4) (ps-qpsk).
    """
    bits = np.asarray(bits, dtype=np.int8).reshape(-1)
    bps = scheme.bits_per_symbol
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} not divisible by {bps} bits/symbol")
    if bps == 1:
        sym = np.sqrt(scheme.es) * (1.0 - 2.0 * bits).astype(complex)
    else:
        amp = np.sqrt(scheme.es / 2.0)
        i = 1.0 - 2.0 * bits[0::2]
        q = 1.0 - 2.0 * bits[1::2]
        sym = amp * (i + 1j * q)
    return sym * phase_ramp(scheme, sym.size)


def hard_bits(symbols: np.ndarray, scheme: ModulationScheme) -> np.ndarray:
    """Minimum-distance bit decisions; inverse of :func:`modulate_bits`."""
    z = np.asarray(symbols) * np.conj(phase_ramp(scheme, np.asarray(symbols).size))
    if scheme.bits_per_symbol == 1:
        return (z.real < 0).astype(np.int8)
    out = np.empty(2 * z.size, dtype=np.int8)
    out[0::2] = z.real < 0
    out[1::2] = z.imag < 0
    return out


@dataclass(frozen=True)
class OversampledSignal:
    """Waveform samples at spacing t0/j, with cp_samples prefix samples of CP."""

    samples: np.ndarray
    j: int
    cp_samples: int = 0

    @property
    def body(self) -> np.ndarray:
        """Samples of the CP-free block."""
        return self.samples[self.cp_samples :]


def interpolate_block(block: np.ndarray, cfg: FrameConfig, with_cp: bool = False) -> OversampledSignal:
    """Band-limited interpolation of N Nyquist samples to J*N waveform samples."""
    block = np.asarray(block, dtype=complex)
    if block.size != cfg.n:
        raise ValueError(f"expected {cfg.n} samples, got {block.size}")
    if cfg.j == 1:
        s = block.copy()
    else:
        spec = np.fft.fft(block, norm="ortho")
        padded = np.concatenate([spec, np.zeros((cfg.j - 1) * cfg.n, dtype=complex)])
        s = np.sqrt(cfg.j) * np.fft.ifft(padded, norm="ortho")
    cp = cfg.n_cp * cfg.j if with_cp else 0
    if cp:
        s = add_cp(s, cp)
    return OversampledSignal(samples=s, j=cfg.j, cp_samples=cp)


def sc_transmit(x: np.ndarray, cfg: FrameConfig, with_cp: bool = False) -> OversampledSignal:
    """Single-carrier block transmit: DFT-precode then zero-padded inverse DFT.

    Precoding followed by the padded inverse DFT is exactly band-limited
    interpolation of the symbol vector itself, so at j=1 the waveform equals x.
    """
    return interpolate_block(x, cfg, with_cp=with_cp)


def otfs_transmit(X: np.ndarray) -> np.ndarray:
    """OTFS modulation of a DD symbol grid: the inverse DZT of the grid."""
    return idzt(X)


def otfs_waveform(X: np.ndarray, cfg: FrameConfig, with_cp: bool = False) -> OversampledSignal:
    """Oversampled OTFS waveform; synthesis path identical to SC."""
    return interpolate_block(otfs_transmit(X), cfg, with_cp=with_cp)


def ofdm_transmit(x: np.ndarray, cfg: FrameConfig, with_cp: bool = False) -> OversampledSignal:
    """OFDM block transmit: x on subcarriers, i.e. the (1, N) grid special case."""
    x = np.asarray(x, dtype=complex)
    if x.size != cfg.n:
        raise ValueError(f"expected {cfg.n} symbols, got {x.size}")
    return interpolate_block(np.fft.ifft(x, norm="ortho"), cfg, with_cp=with_cp)


def add_cp(samples: np.ndarray, cp_samples: int) -> np.ndarray:
    """Prepend a copy of the trailing cp_samples samples."""
    samples = np.asarray(samples)
    if cp_samples < 0 or cp_samples > samples.size:
        raise ValueError(f"CP of {cp_samples} samples invalid for block of {samples.size}")
    if cp_samples == 0:
        return samples.copy()
    return np.concatenate([samples[-cp_samples:], samples])


def remove_cp(samples: np.ndarray, cp_samples: int) -> np.ndarray:
    """Drop the CP prefix; inverse of :func:`add_cp`."""
    samples = np.asarray(samples)
    if cp_samples < 0 or cp_samples >= samples.size:
        raise ValueError(f"cannot strip CP of {cp_samples} from block of {samples.size}")
    return samples[cp_samples:].copy()


def papr_of_block(sig: OversampledSignal) -> tuple[float, float]:
    """Peak-to-average power ratio of the CP-free block, as (linear, dB)."""
    power = np.abs(sig.body) ** 2
    mean = power.mean()
    if mean == 0.0:
        raise ValueError("PAPR undefined for a zero-power block")
    ratio = float(power.max() / mean)
    return ratio, 10.0 * np.log10(ratio)
