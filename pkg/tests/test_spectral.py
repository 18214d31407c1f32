import numpy as np
import pytest
from hypothesis import given, strategies as st

from squidfloquet.errors import NonPositiveBase, SingularSystem, ZeroFrequencyOnGrid
from squidfloquet.spectral import (FloquetSMatrix, FrequencyGrid, block_solve, build_grid, identity_block,
                                   omega_matrix, zero_block)


class TestGrid:
    def test_ladder(self):
        g = build_grid(6e9, 0.7e9, 2)
        np.testing.assert_allclose(g.frequencies, [4.6e9, 5.3e9, 6.0e9, 6.7e9, 7.4e9])
        assert list(g.harmonics) == [-2, -1, 0, 1, 2]

    def test_degenerate(self):
        g = build_grid(6e9, 0.7e9, 0)
        assert g.dim == 1 and g.frequencies[0] == 6e9

    def test_negative_entries_allowed(self):
        g = build_grid(6.9e9, 0.2e9, 40)
        assert g.frequencies[0] == pytest.approx(-1.1e9)
        assert g.harmonics[0] == -40

    def test_dc_rejected(self):
        with pytest.raises(ZeroFrequencyOnGrid):
            build_grid(1.4e9, 0.7e9, 2)

    @pytest.mark.parametrize("fb", [0.0, -1e9])
    def test_base_must_be_positive(self, fb):
        with pytest.raises(NonPositiveBase):
            build_grid(6e9, fb, 1)

    def test_index_addresses_by_harmonic(self):
        g = build_grid(6e9, 0.7e9, 3)
        assert g.frequencies[g.index(-2)] == pytest.approx(g.frequency(-2))
        with pytest.raises(IndexError):
            g.index(4)

    @given(st.floats(0.1e9, 20e9), st.floats(1e6, 2e9), st.integers(0, 30))
    def test_uniform_spacing(self, fs, fb, k):
        try:
            g = build_grid(fs, fb, k)
        except ZeroFrequencyOnGrid:
            return
        assert len(g.frequencies) == 2 * k + 1
        np.testing.assert_allclose(np.diff(g.frequencies), fb, rtol=1e-9)

    @given(st.floats(0.1e9, 20e9), st.floats(1e6, 2e9), st.integers(0, 10))
    def test_mirror_grid(self, fs, fb, k):
        try:
            g = build_grid(fs, fb, k)
            m = build_grid(-fs, fb, k)
        except ZeroFrequencyOnGrid:
            return
        np.testing.assert_allclose(-g.frequencies[::-1], m.frequencies, rtol=1e-12)


class TestOmega:
    def test_single_entry(self):
        g = build_grid(6e9, 0.7e9, 0)
        assert omega_matrix(g)[0, 0] == pytest.approx(1 / (1j * 2 * np.pi * 6e9))

    def test_negative_frequency_sign(self):
        g = build_grid(6.9e9, 0.2e9, 40)
        assert omega_matrix(g)[0, 0].imag > 0

    def test_three_entries(self):
        g = build_grid(6e9, 0.7e9, 1)
        np.testing.assert_allclose(np.diag(omega_matrix(g)), 1 / (1j * 2 * np.pi * np.array([5.3e9, 6e9, 6.7e9])))

    @given(st.floats(0.5e9, 12e9), st.floats(0.05e9, 1e9), st.integers(0, 20))
    def test_inverse_of_derivative(self, fs, fb, k):
        try:
            g = build_grid(fs, fb, k)
        except ZeroFrequencyOnGrid:
            return
        prod = omega_matrix(g) @ np.diag(1j * g.omegas)
        np.testing.assert_allclose(prod, np.eye(g.dim), atol=1e-12)


class TestBlocks:
    def test_identity_and_zero(self):
        g = build_grid(6e9, 0.7e9, 2)
        u = identity_block(g)
        assert np.trace(u) == 5
        y = np.random.default_rng(1).normal(size=(5, 5))
        np.testing.assert_array_equal(u @ y, y)
        np.testing.assert_array_equal(zero_block(g) @ y, 0 * y)


class TestBlockSolve:
    def test_identity(self):
        rhs = np.arange(4.0) + 1j
        np.testing.assert_allclose(block_solve(np.eye(4), rhs), rhs)

    def test_diagonal(self):
        d = np.array([2.0, -4.0, 1e-6, 5e8])
        rhs = np.ones(4)
        np.testing.assert_allclose(block_solve(np.diag(d), rhs), 1 / d)

    def test_singular(self):
        m = np.ones((3, 3))
        with pytest.raises(SingularSystem):
            block_solve(m, np.ones(3))

    def test_nonfinite(self):
        m = np.eye(2)
        m[0, 1] = np.nan
        with pytest.raises(SingularSystem):
            block_solve(m, np.ones(2))

    @given(st.integers(1, 12), st.integers(0, 2**32 - 1))
    def test_residual_diagonally_dominant(self, n, seed):
        rng = np.random.default_rng(seed)
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        m += np.diag(2 * np.abs(m).sum(axis=1))
        rhs = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
        x = block_solve(m, rhs)
        assert np.linalg.norm(m @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


class TestFloquetS:
    def test_accessors_use_one_based_ports(self):
        g = build_grid(6e9, 0.7e9, 1)
        data = np.arange(36, dtype=complex).reshape(6, 6)
        s = FloquetSMatrix(g, data)
        assert s.n_ports == 2
        assert s(2, 1) == data[3 + 1, 0 + 1]
        assert s(1, 2, k_out=1, k_in=-1) == data[2, 3]
        np.testing.assert_array_equal(s.fundamental(), data[np.ix_([1, 4], [1, 4])])
        assert s.output_powers(1).shape == (2, 3)
