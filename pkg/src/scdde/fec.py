"""Rate-1/2 regular (3,6) LDPC code: construction, encoding, soft demapping, decoding.

The parity-check matrix is a random regular bipartite graph (configuration
model) repaired to be simple and free of length-4 cycles, then systematised
over GF(2).  Seeds fully determine the matrix.  Decoding is flooding
sum-product with the exact tanh rule and early stopping on a zero syndrome.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .waveform import ModulationScheme, phase_ramp

__all__ = [
    "ParityCheckMatrix",
    "build_ldpc",
    "encode",
    "syndrome",
    "demap_llr",
    "decode_bp",
    "to_alist",
]

LLR_CLAMP = 40.0
_ROW_DEG = 6
_COL_DEG = 3


@dataclass(frozen=True)
class ParityCheckMatrix:
    """A (3,6)-regular parity-check matrix with a prepared systematic encoder.

    row_cols[r] lists the 6 column indices checked by row r; col_eids[c] the 3
    positions of column c inside the flattened edge array.  info_cols/parity
    cols partition the codeword; parity bits are b @ info over GF(2).
    """

    n: int
    m: int
    seed: int
    row_cols: np.ndarray
    col_eids: np.ndarray
    info_cols: np.ndarray
    parity_cols: np.ndarray
    b: np.ndarray = field(repr=False)

    def dense(self) -> np.ndarray:
        h = np.zeros((self.m, self.n), dtype=np.uint8)
        for r in range(self.m):
            h[r, self.row_cols[r]] = 1
        return h


def _random_regular_edges(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Random (3,6)-regular edge list as a (m, 6) array of column indices.

    Starts from a random stub matching, then swaps edge endpoints until the
    graph is simple (no repeated edges) and has no 4-cycles (no two checks
    sharing two variables).
    """
    stubs = rng.permutation(np.repeat(np.arange(n, dtype=np.int64), _COL_DEG))
    cols = stubs.reshape(m, _ROW_DEG)
    erow = np.repeat(np.arange(m, dtype=np.int64), _ROW_DEG)
    ecol = cols.reshape(-1)
    n_edges = ecol.size

    def offending_edges() -> list[int]:
        bad: list[int] = []
        # repeated edges
        keys = erow * n + ecol
        order = np.argsort(keys, kind="stable")
        dup = np.nonzero(np.diff(keys[order]) == 0)[0]
        bad.extend(order[d + 1] for d in dup)
        if bad:
            return bad
        # 4-cycles: a (column, column) pair shared by two rows
        seen: dict[tuple[int, int], int] = {}
        for r in range(m):
            cs = np.sort(ecol[r * _ROW_DEG : (r + 1) * _ROW_DEG])
            for i in range(_ROW_DEG):
                for j in range(i + 1, _ROW_DEG):
                    pair = (int(cs[i]), int(cs[j]))
                    if pair in seen:
                        e = r * _ROW_DEG + int(np.nonzero(ecol[r * _ROW_DEG : (r + 1) * _ROW_DEG] == cs[j])[0][0])
                        bad.append(e)
                    else:
                        seen[pair] = r
        return bad

    for _ in range(60):
        bad = offending_edges()
        if not bad:
            return ecol.reshape(m, _ROW_DEG)
        for e in bad:
            partner = int(rng.integers(n_edges))
            ecol[e], ecol[partner] = ecol[partner], ecol[e]
    raise RuntimeError("could not reach a simple 4-cycle-free graph")


def _systematise(row_cols: np.ndarray, n: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    """GF(2) row reduction; returns (info_cols, parity_cols, b) or None if rank-deficient."""
    h = np.zeros((m, n), dtype=np.uint8)
    for r in range(m):
        h[r, row_cols[r]] = 1
    r = 0
    pcols = []
    for c in range(n):
        rows = np.nonzero(h[r:, c])[0]
        if rows.size == 0:
            continue
        piv = rows[0] + r
        if piv != r:
            h[[r, piv]] = h[[piv, r]]
        others = np.nonzero(h[:, c])[0]
        others = others[others != r]
        h[others] ^= h[r]
        pcols.append(c)
        r += 1
        if r == m:
            break
    if r < m:
        return None
    parity_cols = np.asarray(pcols, dtype=np.int64)
    mask = np.ones(n, dtype=bool)
    mask[parity_cols] = False
    info_cols = np.nonzero(mask)[0]
    b = h[:, info_cols].copy()
    return info_cols, parity_cols, b


def build_ldpc(n: int, seed: int) -> ParityCheckMatrix:
    """Deterministically construct an encodable (3,6)-regular code of length n."""
    if n % 2 or n < 24:
        raise ValueError(f"code length must be even and >= 24, got {n}")
    m = n // 2
    for attempt in range(50):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, attempt)))
        try:
            row_cols = _random_regular_edges(n, m, rng)
        except RuntimeError:
            continue
        sysform = _systematise(row_cols, n, m)
        if sysform is None:
            continue  # rank-deficient over GF(2); a shorter code would bend the rate
        info_cols, parity_cols, b = sysform
        ecol = row_cols.reshape(-1)
        col_eids = np.argsort(ecol, kind="stable").reshape(n, _COL_DEG)
        return ParityCheckMatrix(
            n=n,
            m=m,
            seed=seed,
            row_cols=row_cols,
            col_eids=col_eids,
            info_cols=info_cols,
            parity_cols=parity_cols,
            b=b,
        )
    raise RuntimeError(f"LDPC construction failed for n={n} after bounded retries")


def encode(info: np.ndarray, pcm: ParityCheckMatrix) -> np.ndarray:
    """Systematic encode: info bits land verbatim on the info positions."""
    info = np.asarray(info, dtype=np.uint8).reshape(-1)
    if info.size != pcm.n - pcm.m:
        raise ValueError(f"expected {pcm.n - pcm.m} info bits, got {info.size}")
    cw = np.zeros(pcm.n, dtype=np.uint8)
    cw[pcm.info_cols] = info
    cw[pcm.parity_cols] = (pcm.b.astype(np.int64) @ info.astype(np.int64)) & 1
    return cw


def syndrome(bits: np.ndarray, pcm: ParityCheckMatrix) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    return bits[pcm.row_cols].sum(axis=1) & 1


def demap_llr(y: np.ndarray, scheme: ModulationScheme, sigma_eff: np.ndarray | float) -> np.ndarray:
    """Per-bit LLRs from (unbiased) equalized symbols, positive meaning bit 0.

    sigma_eff is the effective complex noise variance per symbol (scalar or
    per-symbol vector).  The deterministic phase ramp of PS constellations is
    removed before slicing.  Values are clamped to +-40.
    """
    y = np.asarray(y, dtype=complex)
    sigma_eff = np.asarray(sigma_eff, dtype=float)
    if np.any(sigma_eff <= 0):
        raise ValueError("effective noise variance must be positive")
    z = y * np.conj(phase_ramp(scheme, y.size))
    if scheme.bits_per_symbol == 1:
        llr = 4.0 * np.sqrt(scheme.es) * z.real / sigma_eff
    else:
        amp = 2.0 * np.sqrt(2.0 * scheme.es)
        llr = np.empty(2 * y.size)
        llr[0::2] = amp * z.real / sigma_eff
        llr[1::2] = amp * z.imag / sigma_eff
    return np.clip(llr, -LLR_CLAMP, LLR_CLAMP)


def decode_bp(
    llrs: np.ndarray,
    pcm: ParityCheckMatrix,
    max_iters: int = 50,
) -> tuple[np.ndarray, bool, int]:
    """Flooding sum-product decoder; returns (info bits, converged, iterations)."""
    llrs = np.asarray(llrs, dtype=float).reshape(-1)
    if llrs.size != pcm.n:
        raise ValueError(f"expected {pcm.n} LLRs, got {llrs.size}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("LLRs must be finite")
    ecol = pcm.row_cols.reshape(-1)
    v2c = llrs[ecol].reshape(pcm.m, _ROW_DEG)
    total = llrs.copy()
    hard = np.zeros(pcm.n, dtype=np.uint8)
    for it in range(1, max_iters + 1):
        t = np.tanh(0.5 * np.clip(v2c, -LLR_CLAMP, LLR_CLAMP))
        left = np.ones_like(t)
        right = np.ones_like(t)
        np.cumprod(t[:, :-1], axis=1, out=left[:, 1:])
        np.cumprod(t[:, :0:-1], axis=1, out=right[:, -2::-1])
        loo = np.clip(left * right, -1.0 + 1e-15, 1.0 - 1e-15)
        c2v = 2.0 * np.arctanh(loo)
        flat = c2v.reshape(-1)
        total = llrs + flat[pcm.col_eids].sum(axis=1)
        v2c = (total[ecol] - flat).reshape(pcm.m, _ROW_DEG)
        hard = (total < 0).astype(np.uint8)
        if not np.any(syndrome(hard, pcm)) and np.any(total != 0):
            return hard[pcm.info_cols], True, it
    return hard[pcm.info_cols], False, max_iters


def to_alist(pcm: ParityCheckMatrix) -> str:
    """Serialize in the standard alist text format (1-based indices)."""
    lines = [f"{pcm.n} {pcm.m}", f"{_COL_DEG} {_ROW_DEG}"]
    lines.append(" ".join([str(_COL_DEG)] * pcm.n))
    lines.append(" ".join([str(_ROW_DEG)] * pcm.m))
    col_rows: list[list[int]] = [[] for _ in range(pcm.n)]
    for r in range(pcm.m):
        for c in pcm.row_cols[r]:
            col_rows[int(c)].append(r + 1)
    for c in range(pcm.n):
        lines.append(" ".join(str(r) for r in sorted(col_rows[c])))
    for r in range(pcm.m):
        lines.append(" ".join(str(int(c) + 1) for c in sorted(pcm.row_cols[r])))
    return "\n".join(lines) + "\n"
