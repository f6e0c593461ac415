"""MMSE equalizer tests: weight algebra, receive chains, FDE baseline, soft stats."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from scdde import channel, equalize, zak

from oracles import complex_randn, scalar_mmse


def rayleigh_draw(rng, L, K, profile=None):
    prof = channel.default_profile() if profile is None else profile
    ch = channel.sample_rayleigh(prof, L * K, rng)
    h = channel.build_time_matrix(ch)
    return ch, h, channel.dd_channel_matrix(h, L, K)


class TestWeights:
    def test_identity_channel_unit_snr(self):
        w = equalize.dde_weights(np.eye(4), 1.0, 4, 1)
        assert_allclose(w.w, 0.5 * np.eye(4), atol=1e-14)

    def test_identity_channel_zero_noise_limit(self):
        w = equalize.dde_weights(np.eye(4), 1e12, 4, 1)
        assert np.max(np.abs(w.w - np.eye(4))) < 1e-10

    def test_flat_channel_matches_scalar_formula(self):
        h = 0.7 - 1.2j
        gamma = 5.0
        w = equalize.dde_weights(h * np.eye(6), gamma, 6, 1)
        assert_allclose(w.w, scalar_mmse(h, gamma) * np.eye(6), atol=1e-13)

    def test_normal_equation_residual(self):
        rng = np.random.default_rng(0)
        for gamma in (0.5, 10.0, 1e6):
            _, _, hdd = rayleigh_draw(rng, 8, 16)
            w = equalize.dde_weights(hdd, gamma, 8, 16)
            n = hdd.shape[0]
            lhs = (hdd.conj().T @ hdd + np.eye(n) / gamma) @ w.w
            assert np.max(np.abs(lhs - hdd.conj().T)) < 1e-8

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            equalize.dde_weights(np.eye(4), -1.0, 4, 1)
        with pytest.raises(ValueError):
            equalize.dde_weights(np.eye(4), 1.0, 3, 2)


class TestReceiveChains:
    def test_identity_channel_bias_exact(self):
        # finite-SNR MMSE shrinks a flat channel by exactly snr/(1+snr)
        rng = np.random.default_rng(1)
        L, K = 4, 8
        x = complex_randn(rng, 32)
        gamma = 7.0
        w = equalize.dde_weights(np.eye(32), gamma, L, K)
        y = equalize.sc_dde_equalize(x, w)
        assert_allclose(y, gamma / (1 + gamma) * x, atol=1e-12)

    def test_postcode_relation_between_chains(self):
        rng = np.random.default_rng(2)
        L, K = 8, 16
        _, _, hdd = rayleigh_draw(rng, L, K)
        w = equalize.dde_weights(hdd, 25.0, L, K)
        r = complex_randn(rng, L * K)
        y_sc = equalize.sc_dde_equalize(r, w)
        y_dd = equalize.otfs_equalize(r, w)
        assert_allclose(y_sc, zak.idzt(zak.dd_from_vec(y_dd, L, K)), atol=1e-12)

    def test_postcode_preserves_norm(self):
        rng = np.random.default_rng(3)
        L, K = 8, 8
        _, _, hdd = rayleigh_draw(rng, L, K)
        w = equalize.dde_weights(hdd, 10.0, L, K)
        r = complex_randn(rng, 64)
        assert np.linalg.norm(equalize.sc_dde_equalize(r, w)) == pytest.approx(
            np.linalg.norm(equalize.otfs_equalize(r, w))
        )

    def test_noiseless_recovery_matches_least_squares(self):
        # the gamma -> inf limit must track the pseudo-solution whenever the
        # channel draw is invertible enough to define one
        rng = np.random.default_rng(4)
        L, K = 8, 16
        n = L * K
        z = zak.vdzt_matrix(L, K)
        checked = 0
        for trial in range(300):
            ch, h, hdd = rayleigh_draw(rng, L, K)
            smin = np.linalg.svd(h, compute_uv=False)[-1]
            if smin < 1e-3:
                continue  # turning-point draw: direction genuinely lost
            x = complex_randn(rng, n)
            r = channel.apply_channel(x, ch)
            w = equalize.dde_weights(hdd, 1e12, L, K)
            y = equalize.sc_dde_equalize(r, w)
            y_ls = z.conj().T @ np.linalg.lstsq(hdd, z @ r, rcond=None)[0]
            assert np.max(np.abs(y - y_ls)) < 1e-4
            assert np.max(np.abs(y - x)) < 1e-4
            checked += 1
            if checked >= 10:
                break
        assert checked >= 10

    def test_otfs_noiseless_grid_recovery(self):
        rng = np.random.default_rng(5)
        L, K = 8, 16
        n = L * K
        for trial in range(40):
            ch, h, hdd = rayleigh_draw(rng, L, K)
            if np.linalg.svd(h, compute_uv=False)[-1] < 1e-3:
                continue
            bits = rng.integers(0, 2, 2 * n)
            from scdde import waveform

            xg = waveform.modulate_bits(bits, waveform.modulation("qpsk"))
            s = zak.idzt(zak.dd_from_vec(xg, L, K))
            r = channel.apply_channel(s, ch)
            w = equalize.dde_weights(hdd, 1e12, L, K)
            y = equalize.otfs_equalize(r, w)
            assert np.max(np.abs(y - xg)) < 1e-4
            return
        pytest.fail("no sufficiently conditioned draw found")

    def test_error_decreases_with_snr_on_conditioned_draw(self):
        rng = np.random.default_rng(6)
        L, K = 8, 8
        while True:
            ch, h, hdd = rayleigh_draw(rng, L, K)
            if np.linalg.svd(h, compute_uv=False)[-1] > 1e-2:
                break
        x = complex_randn(rng, 64)
        r = channel.apply_channel(x, ch)
        errs = []
        for gamma in (1e2, 1e4, 1e6, 1e8):
            w = equalize.dde_weights(hdd, gamma, L, K)
            errs.append(np.linalg.norm(equalize.sc_dde_equalize(r, w) - x))
        assert all(a > b for a, b in zip(errs, errs[1:]))


class TestScFde:
    def test_identity_channel_bias(self):
        rng = np.random.default_rng(7)
        x = complex_randn(rng, 32)
        taps = (channel.PathTap(gain=1.0, delay=0, doppler=0),)
        y = equalize.sc_fde_equalize(x, taps, 9.0)
        assert_allclose(y, 0.9 * x, atol=1e-12)

    def test_equals_dde_without_doppler(self):
        # on a purely frequency-selective draw both receivers solve the same
        # regularised circulant problem
        rng = np.random.default_rng(8)
        L, K = 8, 16
        prof = [(l, 0) for l in range(6)]
        for trial in range(10):
            ch, h, hdd = rayleigh_draw(rng, L, K, profile=prof)
            r = complex_randn(rng, L * K)
            gamma = 12.0
            w = equalize.dde_weights(hdd, gamma, L, K)
            y_dde = equalize.sc_dde_equalize(r, w)
            y_fde = equalize.sc_fde_equalize(r, ch.taps, gamma)
            assert np.max(np.abs(y_dde - y_fde)) < 1e-8

    def test_doppler_breaks_fde_but_not_dde(self):
        # one strong Doppler path: FDE leaves large residual, DDE none
        rng = np.random.default_rng(9)
        L, K = 8, 16
        prof = [(0, 0), (1, 3)]
        ch, h, hdd = rayleigh_draw(rng, L, K, profile=prof)
        x = complex_randn(rng, L * K)
        r = channel.apply_channel(x, ch)
        gamma = 1e6
        y_fde = equalize.sc_fde_equalize(r, ch.taps, gamma)
        w = equalize.dde_weights(hdd, gamma, L, K)
        y_dde = equalize.sc_dde_equalize(r, w)
        assert np.linalg.norm(y_dde - x) < 0.05 * np.linalg.norm(y_fde - x)


class TestSoftStats:
    def test_flat_channel_analytic(self):
        gamma, es, n0 = 4.0, 1.0, 0.25
        w = equalize.dde_weights(np.eye(16), gamma, 4, 4)
        for per_symbol in (False, True):
            bias, var = equalize.mmse_soft_stats(w, np.eye(16), es, n0, per_symbol)
            assert_allclose(bias, np.full(16, 0.8), atol=1e-12)
            assert_allclose(var, np.full(16, n0 * 0.8**2), atol=1e-12)

    def test_stats_match_monte_carlo(self):
        rng = np.random.default_rng(10)
        L, K = 4, 8
        n = L * K
        es = 1.0
        snr_db = 8.0
        n0 = 10 ** (-snr_db / 10)
        ch, h, hdd = rayleigh_draw(rng, L, K)
        w = equalize.dde_weights(hdd, es / n0, L, K)
        bias, var = equalize.mmse_soft_stats(w, hdd, es, n0, per_symbol=True)
        draws = 4000
        err2 = np.zeros(n)
        from scdde import waveform

        for _ in range(draws):
            bits = rng.integers(0, 2, n)
            xg = waveform.modulate_bits(bits, waveform.modulation("bpsk"))
            s = zak.idzt(zak.dd_from_vec(xg, L, K))
            r = channel.apply_channel(s, ch, n0, rng)
            y = equalize.otfs_equalize(r, w)
            err2 += np.abs(y - bias * xg) ** 2
        err2 /= draws
        assert np.max(np.abs(err2 - var) / var) < 0.25
        assert abs(np.mean(err2) - np.mean(var)) / np.mean(var) < 0.05

    def test_fde_stats_match_monte_carlo(self):
        rng = np.random.default_rng(11)
        n = 64
        es, n0 = 1.0, 0.1
        prof = [(l, 0) for l in range(4)]
        ch = channel.sample_rayleigh(prof, n, rng)
        gamma = es / n0
        bias, var = equalize.fde_soft_stats(ch.taps, n, gamma, es, n0)
        draws = 4000
        err2 = 0.0
        from scdde import waveform

        for _ in range(draws):
            bits = rng.integers(0, 2, n)
            x = waveform.modulate_bits(bits, waveform.modulation("bpsk"))
            r = channel.apply_channel(x, ch, n0, rng)
            y = equalize.sc_fde_equalize(r, ch.taps, gamma)
            err2 += np.mean(np.abs(y - bias * x) ** 2)
        err2 /= draws
        assert abs(err2 - var[0]) / var[0] < 0.05
