"""Monte-Carlo experiment engine: PAPR distributions and BER sweeps.

Every random draw is derived from (master seed, curve index, sweep-point
index, block index) through a SeedSequence, so a run is reproducible
bit-for-bit and independent of worker count or scheduling order.  Blocks are
simulated in fixed-width waves; stopping rules are evaluated only on wave
boundaries, which keeps early stopping deterministic as well.
"""

from __future__ import annotations

import configparser
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import chanest, channel, equalize, fec, waveform
from .waveform import FrameConfig
from .zak import dd_from_vec, dd_vec, dzt, idzt

__all__ = [
    "CurveSpec",
    "SimConfig",
    "SimRecord",
    "parse_config",
    "block_rng",
    "run_papr",
    "run_ber",
    "write_csv",
    "selftest",
]

CSV_HEADER = "scheme,metric,snr_db,value,num,den,seed"

SCHEMES = ("sc-dde", "otfs", "sc-fde", "ofdm")
MODULATIONS = ("bpsk", "ps-bpsk", "qpsk", "ps-qpsk")

_PAPR_WAVE = 512
_BER_WAVE = 32

BUILTIN_PROFILES = {
    "default": channel.DEFAULT_PROFILE,
    "awgn": ((0, 0),),
}


@dataclass(frozen=True)
class CurveSpec:
    """One curve of a figure: a scheme/modulation combination plus options."""

    label: str
    scheme: str
    modulation: str
    coded: bool = False
    csi: str = "ideal"
    pilot: bool = False
    l_guard: int | None = None

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.modulation not in MODULATIONS:
            raise ValueError(f"unknown modulation {self.modulation!r}")
        if self.csi not in ("ideal", "estimated"):
            raise ValueError(f"csi must be 'ideal' or 'estimated', got {self.csi!r}")

    @property
    def needs_pilot(self) -> bool:
        return self.pilot or self.csi == "estimated"


@dataclass(frozen=True)
class SimConfig:
    """Full description of one experiment (one config file)."""

    kind: str
    frame: FrameConfig
    curves: tuple[CurveSpec, ...]
    profile: tuple[tuple[int, int], ...] = channel.DEFAULT_PROFILE
    fading: str = "rayleigh"
    esn0_db: tuple[float, ...] = ()
    blocks: int = 1000
    min_bit_errors: int = 100
    min_block_errors: int = 50
    seed: int = 1
    workers: int = 1
    pilot_l: int = 0
    pilot_k: int = 0
    l_guard: int = 0
    pilot_energy_ratio: float = 1.0
    code_seed: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("papr", "ber"):
            raise ValueError(f"kind must be 'papr' or 'ber', got {self.kind!r}")
        if not self.curves:
            raise ValueError("config defines no curves")
        if self.fading not in ("rayleigh", "fixed"):
            raise ValueError(f"fading must be 'rayleigh' or 'fixed', got {self.fading!r}")
        if self.kind == "ber" and not self.esn0_db:
            raise ValueError("BER config needs an esn0_db sweep")
        needs_eq = self.kind == "ber"
        if needs_eq:
            channel.check_grid_feasible(self.frame.l, self.frame.k, self.profile)
        l_max, _ = channel.profile_max_taps(self.profile)
        for curve in self.curves:
            if curve.needs_pilot:
                guard = curve.l_guard if curve.l_guard is not None else self.l_guard
                layout = self.pilot_layout(guard)
                chanest.validate_layout(layout, self.frame.l, self.frame.k)
                if self.kind == "ber" and guard < l_max:
                    raise ValueError(
                        f"curve {curve.label!r}: guard width {guard} below max delay tap {l_max}"
                    )

    def pilot_layout(self, l_guard: int | None = None) -> chanest.PilotLayout:
        guard = self.l_guard if l_guard is None else l_guard
        return chanest.PilotLayout(
            l_pilot=self.pilot_l,
            k_pilot=self.pilot_k,
            l_guard=guard,
            e_pilot=self.pilot_energy_ratio * self.frame.k * self.frame.es,
        )


@dataclass(frozen=True)
class SimRecord:
    """One measurement row destined for the CSV output."""

    scheme: str
    metric: str
    snr_db: float | None
    value: float
    num: int
    den: int
    seed: int
    wall_time: float = 0.0


def block_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent substream for one simulated block, keyed by integer indices."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key)))


def _parse_sweep(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(tok) for tok in text.split(":"))
        count = int(round((stop - start) / step)) + 1
        return tuple(start + i * step for i in range(count))
    return tuple(float(tok) for tok in text.split(","))


def parse_config(path) -> SimConfig:
    """Read an experiment description from an INI-style config file."""
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    sim = cp["sim"]
    frame = FrameConfig(
        n=sim.getint("n"),
        l=sim.getint("l"),
        k=sim.getint("k"),
        j=sim.getint("oversampling", fallback=1),
        n_cp=sim.getint("n_cp", fallback=0),
        es=sim.getfloat("es", fallback=1.0),
    )
    profile: tuple[tuple[int, int], ...] = channel.DEFAULT_PROFILE
    fading = "rayleigh"
    if cp.has_section("channel"):
        name = cp["channel"].get("profile", fallback="default")
        if name in BUILTIN_PROFILES:
            profile = BUILTIN_PROFILES[name]
        else:
            base = os.path.dirname(os.path.abspath(path))
            profile = tuple(channel.load_profile(os.path.join(base, name)))
        fading = cp["channel"].get("fading", fallback="rayleigh")
    sweep: tuple[float, ...] = ()
    min_bit_errors, min_block_errors = 100, 50
    if cp.has_section("sweep"):
        sweep = _parse_sweep(cp["sweep"].get("esn0_db", fallback=""))
        min_bit_errors = cp["sweep"].getint("min_bit_errors", fallback=100)
        min_block_errors = cp["sweep"].getint("min_block_errors", fallback=50)
    pilot_l = pilot_k = l_guard = 0
    energy_ratio = 1.0
    if cp.has_section("pilot"):
        pilot_l = cp["pilot"].getint("l_pilot", fallback=0)
        pilot_k = cp["pilot"].getint("k_pilot", fallback=0)
        l_guard = cp["pilot"].getint("l_guard", fallback=0)
        energy_ratio = cp["pilot"].getfloat("energy_ratio", fallback=1.0)
    code_seed = cp["coding"].getint("seed", fallback=1) if cp.has_section("coding") else 1
    curves = []
    for section in cp.sections():
        if not section.startswith("curve:"):
            continue
        cur = cp[section]
        curves.append(
            CurveSpec(
                label=section.split(":", 1)[1],
                scheme=cur.get("scheme"),
                modulation=cur.get("modulation"),
                coded=cur.getboolean("coded", fallback=False),
                csi=cur.get("csi", fallback="ideal"),
                pilot=cur.getboolean("pilot", fallback=False),
                l_guard=cur.getint("l_guard", fallback=None),
            )
        )
    workers = sim.getint("workers", fallback=1)
    env_workers = os.environ.get("SCDDE_WORKERS")
    if env_workers:
        workers = int(env_workers)
    return SimConfig(
        kind=sim.get("kind"),
        frame=frame,
        curves=tuple(curves),
        profile=profile,
        fading=fading,
        esn0_db=sweep,
        blocks=sim.getint("blocks", fallback=1000),
        min_bit_errors=min_bit_errors,
        min_block_errors=min_block_errors,
        seed=sim.getint("seed", fallback=1),
        workers=workers,
        pilot_l=pilot_l,
        pilot_k=pilot_k,
        l_guard=l_guard,
        pilot_energy_ratio=energy_ratio,
        code_seed=code_seed,
    )


# ---------------------------------------------------------------------------
# transmit-side assembly shared by both runners


def _draw_tx(curve: CurveSpec, cfg: SimConfig, rng: np.random.Generator, pcm=None):
    """Draw bits for one block and assemble the Nyquist-rate transmit vector.

    Returns (tx time samples, tx bits, data symbols, layout or None).
    For OTFS/OFDM the data symbols live on the DD grid (stacked order); for SC
    they are the time-domain data subsequence.
    """
    frame = cfg.frame
    scheme = waveform.modulation(curve.modulation, frame.es)
    layout = None
    if curve.needs_pilot:
        layout = cfg.pilot_layout(curve.l_guard)
        n_sym, _ = chanest.data_capacity(frame.l, layout.l_guard, frame.k)
    else:
        n_sym = frame.n
    n_bits = n_sym * scheme.bits_per_symbol
    if pcm is not None:
        info = rng.integers(0, 2, pcm.n - pcm.m).astype(np.int8)
        bits = fec.encode(info, pcm).astype(np.int8)
        tx_bits = info
    else:
        bits = rng.integers(0, 2, n_bits).astype(np.int8)
        tx_bits = bits
    sym = waveform.modulate_bits(bits, scheme)
    if curve.scheme in ("sc-dde", "sc-fde"):
        if layout is not None:
            x = chanest.assemble_frame(sym, layout, frame.l, frame.k).x
        else:
            x = sym
        return x, tx_bits, sym, layout
    if curve.scheme == "ofdm":
        grid_l, grid_k = 1, frame.n
    else:
        grid_l, grid_k = frame.l, frame.k
    if layout is not None:
        vec = np.zeros(frame.n, dtype=complex)
        vec[layout.l_pilot + layout.k_pilot * grid_l] = layout.psi
        vec[chanest.data_positions(layout, grid_l, grid_k)] = sym
        grid = dd_from_vec(vec, grid_l, grid_k)
    else:
        grid = dd_from_vec(sym, grid_l, grid_k)
    return idzt(grid), tx_bits, sym, layout


# ---------------------------------------------------------------------------
# PAPR


def _papr_wave(cfg: SimConfig, curve_idx: int, blocks: range) -> list[float]:
    curve = cfg.curves[curve_idx]
    out = []
    for b in blocks:
        rng = block_rng(cfg.seed, curve_idx, b)
        x, _, _, _ = _draw_tx(curve, cfg, rng)
        sig = waveform.interpolate_block(x, cfg.frame, with_cp=False)
        out.append(waveform.papr_of_block(sig)[1])
    return out


def run_papr(cfg: SimConfig) -> list[SimRecord]:
    """Per-block PAPR samples (dB) for every curve; one record per block."""
    if cfg.kind != "papr":
        raise ValueError("config is not a PAPR experiment")
    records: list[SimRecord] = []
    for ci, curve in enumerate(cfg.curves):
        t0 = time.perf_counter()
        samples: list[float] = []
        for start in range(0, cfg.blocks, _PAPR_WAVE):
            wave = range(start, min(start + _PAPR_WAVE, cfg.blocks))
            samples.extend(_run_wave(cfg, _papr_wave, (cfg, ci), wave))
        dt = time.perf_counter() - t0
        records.extend(
            SimRecord(
                scheme=curve.label,
                metric="papr",
                snr_db=None,
                value=float(v),
                num=0,
                den=0,
                seed=cfg.seed,
                wall_time=dt / max(len(samples), 1),
            )
            for v in samples
        )
    return records


def _run_wave(cfg: SimConfig, fn, head_args: tuple, wave: range) -> list:
    """Evaluate one wave of blocks, splitting across workers deterministically."""
    if cfg.workers <= 1 or len(wave) < 2 * cfg.workers:
        return fn(*head_args, wave)
    chunks = np.array_split(np.asarray(wave), cfg.workers)
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        futs = [pool.submit(fn, *head_args, range(int(c[0]), int(c[-1]) + 1)) for c in chunks if c.size]
        parts = [f.result() for f in futs]
    out = []
    for p in parts:
        out.extend(p)
    return out


# ---------------------------------------------------------------------------
# BER


def _ber_setup(cfg: SimConfig, curve: CurveSpec):
    """Precompute the per-curve machinery: pilot layout, code, grid geometry."""
    frame = cfg.frame
    layout = cfg.pilot_layout(curve.l_guard) if curve.needs_pilot else None
    if curve.scheme == "ofdm":
        grid_l, grid_k = 1, frame.n
    else:
        grid_l, grid_k = frame.l, frame.k
    scheme = waveform.modulation(curve.modulation, frame.es)
    n_sym = frame.n if layout is None else chanest.data_capacity(frame.l, layout.l_guard, frame.k)[0]
    pcm = fec.build_ldpc(n_sym * scheme.bits_per_symbol, cfg.code_seed) if curve.coded else None
    return layout, (grid_l, grid_k), scheme, pcm


def _ber_blocks(cfg: SimConfig, curve_idx: int, point_idx: int, blocks: range) -> list[tuple[int, int, int, int, int]]:
    """Simulate blocks; each tuple is (bit errs, bits, info errs, info bits, block err)."""
    curve = cfg.curves[curve_idx]
    frame = cfg.frame
    layout, (grid_l, grid_k), scheme, pcm = _ber_setup(cfg, curve)
    es = frame.es
    snr_db = cfg.esn0_db[point_idx]
    n0 = es / 10.0 ** (snr_db / 10.0)
    gamma = channel.received_snr(1.0, es, n0)
    pairs = list(cfg.profile)

    fixed_ch = channel.fixed_gains(pairs, frame.n) if cfg.fading == "fixed" else None
    per_symbol = curve.scheme in ("otfs", "ofdm")
    cache = {}

    def receiver(ch_csi) -> equalize.DdEqualizer:
        hdd = channel.dd_sparse_from_taps(ch_csi, grid_l, grid_k)
        return equalize.DdEqualizer(hdd, gamma, grid_l, grid_k)

    if fixed_ch is not None and curve.scheme != "sc-fde" and curve.csi == "ideal":
        cache["rx"] = receiver(fixed_ch)

    pos = None if layout is None else chanest.data_positions(layout, grid_l, grid_k)
    out = []
    for b in blocks:
        rng = block_rng(cfg.seed, curve_idx, point_idx, b)
        x, tx_bits, _, _ = _draw_tx(curve, cfg, rng, pcm=pcm)
        ch = fixed_ch if fixed_ch is not None else channel.sample_rayleigh(pairs, frame.n, rng)
        r = channel.apply_channel(x, ch, n0, rng)

        bias = var = None
        if curve.scheme == "sc-fde":
            y_full = equalize.sc_fde_equalize(r, ch.taps, gamma)
            if pcm is not None:
                bias, var = equalize.fde_soft_stats(ch.taps, frame.n, gamma, es, n0)
        else:
            if curve.csi == "estimated":
                rdd = dzt(r, grid_l, grid_k)
                gains = chanest.estimate_taps(rdd, layout, pairs)
                ch_csi = channel.ChannelRealization(
                    taps=tuple(
                        channel.PathTap(gain=g, delay=l, doppler=k)
                        for g, (l, k) in zip(gains, pairs)
                    ),
                    n=frame.n,
                )
                rx = receiver(ch_csi)
            else:
                rx = cache.get("rx") or receiver(ch)
            y_full = rx.equalize_dd(r) if per_symbol else rx.equalize_time(r)
            if pcm is not None:
                bias, var = rx.soft_stats(es, n0, per_symbol=per_symbol)

        if pos is not None:
            y = y_full[pos]
        else:
            y = y_full

        if pcm is None:
            # MMSE bias is real and positive, so PSK hard decisions need no unbiasing
            got = waveform.hard_bits(y, scheme)
            errs = int(np.sum(got != tx_bits))
            out.append((errs, tx_bits.size, 0, 0, int(errs > 0)))
        else:
            bias_d = bias[pos] if pos is not None else bias
            var_d = var[pos] if pos is not None else var
            z = y / bias_d
            sigma = var_d / np.abs(bias_d) ** 2
            llr = fec.demap_llr(z, scheme, sigma)
            info_hat, _, _ = fec.decode_bp(llr, pcm)
            ierrs = int(np.sum(info_hat != tx_bits))
            out.append((0, 0, ierrs, tx_bits.size, int(ierrs > 0)))
    return out


def run_ber(cfg: SimConfig) -> list[SimRecord]:
    """BER sweep: one record per (curve, SNR point)."""
    if cfg.kind != "ber":
        raise ValueError("config is not a BER experiment")
    records: list[SimRecord] = []
    for ci, curve in enumerate(cfg.curves):
        for pi, snr_db in enumerate(cfg.esn0_db):
            t0 = time.perf_counter()
            bit_errs = bits = info_errs = info_bits = block_errs = 0
            done = 0
            while done < cfg.blocks:
                wave = range(done, min(done + _BER_WAVE, cfg.blocks))
                for be, nb, ie, ib, blk in _run_wave(cfg, _ber_blocks, (cfg, ci, pi), wave):
                    bit_errs += be
                    bits += nb
                    info_errs += ie
                    info_bits += ib
                    block_errs += blk
                done = wave.stop
                if curve.coded and block_errs >= cfg.min_block_errors:
                    break
                if not curve.coded and bit_errs >= cfg.min_bit_errors:
                    break
            dt = time.perf_counter() - t0
            if curve.coded:
                metric, num, den = "ber-coded", info_errs, info_bits
            else:
                metric, num, den = "ber-uncoded", bit_errs, bits
            records.append(
                SimRecord(
                    scheme=curve.label,
                    metric=metric,
                    snr_db=float(snr_db),
                    value=num / den if den else 0.0,
                    num=num,
                    den=den,
                    seed=cfg.seed,
                    wall_time=dt,
                )
            )
    return records


# ---------------------------------------------------------------------------
# CSV


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def write_csv(records, path) -> None:
    """Write records with the fixed header; formatting is reproducible."""
    with open(path, "w", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for rec in records:
            snr = "" if rec.snr_db is None else _fmt(rec.snr_db)
            fh.write(
                f"{rec.scheme},{rec.metric},{snr},{_fmt(rec.value)},{rec.num},{rec.den},{rec.seed}\n"
            )


# ---------------------------------------------------------------------------
# selftest


def selftest(verbose: bool = True) -> bool:
    """Cross-module oracle suite; prints one line per check."""
    rng = np.random.default_rng(911)
    checks: list[tuple[str, bool]] = []

    L, K = 8, 16
    n = L * K
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = dzt(u, L, K)
    from .zak import vdzt_matrix

    z = vdzt_matrix(L, K)
    checks.append(("transform round trip", np.max(np.abs(idzt(v) - u)) < 1e-12))
    checks.append(("transform unitarity", np.max(np.abs(z @ z.conj().T - np.eye(n))) < 1e-10))
    checks.append(("transform vec consistency", np.max(np.abs(dd_vec(v) - z @ u)) < 1e-10))

    prof = channel.default_profile()
    ch = channel.sample_rayleigh(prof, n, rng)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    h = channel.build_time_matrix(ch)
    checks.append(("channel matrix equivalence", np.max(np.abs(channel.apply_channel(x, ch) - h @ x)) < 1e-10))
    hdd = channel.dd_channel_matrix(h, L, K)
    checks.append(("dd conjugation vs kron", np.max(np.abs(hdd - z @ h @ z.conj().T)) < 1e-9))

    # noiseless recovery through the equalizer on a well-conditioned draw
    ch1 = channel.fixed_gains(prof, n)
    h1 = channel.build_time_matrix(ch1)
    hdd1 = channel.dd_channel_matrix(h1, L, K)
    w = equalize.dde_weights(hdd1, 1e9, L, K)
    y = equalize.sc_dde_equalize(h1 @ x, w)
    sv_min = np.linalg.svd(h1, compute_uv=False)[-1]
    ok = np.max(np.abs(y - x)) < max(1e-6, 1e-9 / max(sv_min**2, 1e-12))
    checks.append(("noiseless equalizer recovery", bool(ok)))

    lay = chanest.PilotLayout(l_pilot=0, k_pilot=0, l_guard=7, e_pilot=float(K))
    Lb, Kb = 16, 16
    nb = Lb * Kb
    nd, _ = chanest.data_capacity(Lb, 7, Kb)
    data = waveform.modulate_bits(rng.integers(0, 2, nd), waveform.modulation("bpsk"))
    fr = chanest.assemble_frame(data, lay, Lb, Kb)
    chb = channel.sample_rayleigh(prof, nb, rng)
    rb = channel.apply_channel(fr.x, chb)
    est = chanest.estimate_taps(dzt(rb, Lb, Kb), lay, prof)
    true = np.array([t.gain for t in chb.taps])
    checks.append(("pilot estimation exactness", np.max(np.abs(est - true)) < 1e-10))

    pcm = fec.build_ldpc(128, seed=3)
    info = rng.integers(0, 2, 64).astype(np.int8)
    cw = fec.encode(info, pcm)
    llr = (1.0 - 2.0 * cw) * fec.LLR_CLAMP
    dec, conv, _ = fec.decode_bp(llr, pcm)
    checks.append(("ldpc encode/decode round trip", conv and np.array_equal(dec, info)))

    ok_all = all(flag for _, flag in checks)
    if verbose:
        for name, flag in checks:
            print(f"{'PASS' if flag else 'FAIL'}  {name}")
        print(f"selftest: {'all checks passed' if ok_all else 'FAILURES PRESENT'}")
    return ok_all
