"""SC-DDE link-level simulator.

Single-carrier transmission with delay-Doppler domain equalization, alongside
OTFS, SC-FDE, and OFDM baselines: transforms, channel models, MMSE receivers,
embedded pilot channel estimation, LDPC coding, and a Monte-Carlo harness.
"""

from .chanest import (
    FrameAssembly,
    PilotLayout,
    assemble_frame,
    data_capacity,
    data_positions,
    estimate_taps,
    extract_data,
    pilot_time_vector,
)
from .channel import (
    DEFAULT_PROFILE,
    ChannelRealization,
    PathTap,
    apply_channel,
    awgn,
    build_time_matrix,
    check_grid_feasible,
    dd_channel_matrix,
    default_profile,
    fixed_gains,
    load_profile,
    received_snr,
    sample_rayleigh,
)
from .equalize import (
    DdeWeights,
    dde_weights,
    fde_soft_stats,
    mmse_soft_stats,
    otfs_equalize,
    sc_dde_equalize,
    sc_fde_equalize,
)
from .fec import ParityCheckMatrix, build_ldpc, decode_bp, demap_llr, encode, syndrome, to_alist
from .harness import (
    CurveSpec,
    SimConfig,
    SimRecord,
    block_rng,
    parse_config,
    run_ber,
    run_papr,
    selftest,
    write_csv,
)
from .waveform import (
    FrameConfig,
    ModulationScheme,
    OversampledSignal,
    add_cp,
    hard_bits,
    interpolate_block,
    modulate_bits,
    modulation,
    ofdm_transmit,
    otfs_transmit,
    otfs_waveform,
    papr_of_block,
    phase_ramp,
    remove_cp,
    sc_transmit,
)
from .zak import dd_from_vec, dd_lookup, dd_vec, dft_matrix, dzt, idzt, vdzt_matrix

__version__ = "0.1.0"
