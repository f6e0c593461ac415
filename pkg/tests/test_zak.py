"""Transform-layer tests: DZT/IDZT, the stacked-matrix form, quasi-periodic lookup."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from scdde import zak

from oracles import complex_randn, dzt_direct, idzt_direct


def test_dft_matrix_small_values():
    assert_allclose(zak.dft_matrix(1), [[1.0]])
    f2 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    assert_allclose(zak.dft_matrix(2), f2, atol=1e-15)


def test_dft_matrix_unitary_n64():
    f = zak.dft_matrix(64)
    assert np.max(np.abs(f.conj().T @ f - np.eye(64))) < 1e-12


def test_dzt_impulse_spreads_flat_over_doppler():
    # impulse at index 0 lives in delay bin 0 only, flat across Doppler
    V = zak.dzt(np.array([1.0, 0.0, 0.0, 0.0]), 2, 2)
    assert_allclose(V, [[1 / np.sqrt(2), 1 / np.sqrt(2)], [0, 0]], atol=1e-15)


def test_dzt_single_delay_bin_is_plain_dft():
    rng = np.random.default_rng(1)
    u = complex_randn(rng, 8)
    V = zak.dzt(u, 1, 8)
    assert_allclose(V[0], zak.dft_matrix(8) @ u, atol=1e-12)


def test_dzt_matches_direct_sum():
    rng = np.random.default_rng(2)
    u = complex_randn(rng, 24)
    assert_allclose(zak.dzt(u, 4, 6), dzt_direct(u, 4, 6), atol=1e-12)


def test_dzt_matches_stacked_matrix_n64():
    rng = np.random.default_rng(3)
    u = complex_randn(rng, 64)
    V = zak.dzt(u, 8, 8)
    assert np.max(np.abs(zak.dd_vec(V) - zak.vdzt_matrix(8, 8) @ u)) < 1e-12


def test_dzt_rejects_wrong_length():
    with pytest.raises(ValueError):
        zak.dzt(np.zeros(10), 4, 4)


def test_idzt_inverts_dzt():
    rng = np.random.default_rng(4)
    u = complex_randn(rng, 256)
    assert np.max(np.abs(zak.idzt(zak.dzt(u, 16, 16)) - u)) < 1e-12


def test_idzt_single_pilot_entry_gives_constant_comb():
    K = 8
    V = np.zeros((4, K), dtype=complex)
    V[0, 0] = 2.0 + 1.0j
    u = zak.idzt(V)
    comb = u[0::4]
    assert_allclose(comb, np.full(K, (2.0 + 1.0j) / np.sqrt(K)), atol=1e-14)
    mask = np.ones(u.size, dtype=bool)
    mask[0::4] = False
    assert np.max(np.abs(u[mask])) < 1e-14


def test_idzt_all_ones_grid_hand_sum():
    # evaluated by hand from the inverse sum for a 2x2 grid of ones
    u = zak.idzt(np.ones((2, 2), dtype=complex))
    assert_allclose(u, [np.sqrt(2), np.sqrt(2), 0, 0], atol=1e-14)


def test_idzt_matches_direct_sum():
    rng = np.random.default_rng(5)
    V = complex_randn(rng, 24).reshape(4, 6)
    assert_allclose(zak.idzt(V), idzt_direct(V), atol=1e-12)


def test_vdzt_matrix_degenerate_cases():
    n = 8
    assert_allclose(zak.vdzt_matrix(1, n), zak.dft_matrix(n), atol=1e-15)
    assert_allclose(zak.vdzt_matrix(n, 1), np.eye(n), atol=1e-15)


def test_vdzt_matrix_2x2_expansion():
    want = np.array(
        [
            [1, 0, 1, 0],
            [0, 1, 0, 1],
            [1, 0, -1, 0],
            [0, 1, 0, -1],
        ]
    ) / np.sqrt(2)
    assert_allclose(zak.vdzt_matrix(2, 2), want, atol=1e-15)


@pytest.mark.parametrize("L,K", [(2, 2), (8, 8), (8, 16), (32, 32), (4, 256)])
def test_vdzt_unitarity(L, K):
    z = zak.vdzt_matrix(L, K)
    n = L * K
    assert np.max(np.abs(z @ z.conj().T - np.eye(n))) < 1e-10


@pytest.mark.parametrize("L,K", [(4, 8), (16, 16), (8, 32)])
def test_parseval(L, K):
    rng = np.random.default_rng(6)
    u = complex_randn(rng, L * K)
    e_time = np.sum(np.abs(u) ** 2)
    e_grid = np.sum(np.abs(zak.dzt(u, L, K)) ** 2)
    assert abs(e_grid - e_time) / e_time < 1e-10


class TestQuasiPeriodicLookup:
    L, K = 6, 8

    @pytest.fixture
    def grid(self):
        rng = np.random.default_rng(7)
        self.u = complex_randn(rng, self.L * self.K)
        return zak.dzt(self.u, self.L, self.K)

    def test_in_range_returns_stored_entry(self, grid):
        for l in range(self.L):
            for k in range(self.K):
                assert zak.dd_lookup(grid, l, k) == grid[l, k]

    def test_doppler_periodic(self, grid):
        assert zak.dd_lookup(grid, 2, 3 - self.K) == pytest.approx(grid[2, 3])

    def test_delay_wrap_phase(self, grid):
        # one wrap back in delay costs exp(-2j*pi*k/K)
        want = grid[4, 5] * np.exp(-2j * np.pi * 5 / self.K)
        assert zak.dd_lookup(grid, 4 - self.L, 5) == pytest.approx(want)

    def test_lookup_matches_periodic_input_definition(self, grid):
        # the extension rule must agree with transforming the N-periodic input
        n = self.L * self.K
        m = np.arange(self.K)
        for l, k in [(-3, 2), (self.L + 1, -5), (2 * self.L + 3, self.K + 1), (-2 * self.L, 0)]:
            direct = np.sum(
                self.u[(l + m * self.L) % n] * np.exp(-2j * np.pi * k * m / self.K)
            ) / np.sqrt(self.K)
            assert zak.dd_lookup(grid, l, k) == pytest.approx(direct)

    def test_composed_wraps(self, grid):
        for dm in range(-2, 3):
            for dn in range(-2, 3):
                want = grid[3, 2] * np.exp(2j * np.pi * 2 * dm / self.K)
                got = zak.dd_lookup(grid, 3 + dm * self.L, 2 + dn * self.K)
                assert got == pytest.approx(want)


def test_dzt_cols_matches_matrix_product():
    rng = np.random.default_rng(8)
    L, K = 4, 8
    a = complex_randn(rng, 32 * 5).reshape(32, 5)
    z = zak.vdzt_matrix(L, K)
    assert_allclose(zak.dzt_cols(a, L, K), z @ a, atol=1e-12)
    assert_allclose(zak.idzt_cols(a, L, K), z.conj().T @ a, atol=1e-12)


def test_vec_round_trip():
    rng = np.random.default_rng(9)
    v = complex_randn(rng, 12)
    grid = zak.dd_from_vec(v, 3, 4)
    assert grid[1, 2] == v[1 + 2 * 3]
    assert_allclose(zak.dd_vec(grid), v)
