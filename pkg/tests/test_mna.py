import numpy as np
import pytest
from hypothesis import given, strategies as st

from squidfloquet.devices import build_template
from squidfloquet.elements import PumpTone, SquidSpec
from squidfloquet.errors import DanglingNode, NonPositiveJ, ValidationError
from squidfloquet.mna import (CAPACITOR, JINVERTER, RESISTOR, SQUID, DeviceGraph, Element, Port, port_admittance,
                              solve_floquet_s, stamp)
from squidfloquet.spectral import build_grid

from helpers import random_frequency, random_isolator

GRID = build_grid(6e9, 0.7e9, 2)


def test_single_capacitor_stamp():
    g = DeviceGraph(["n1"], [Element(CAPACITOR, "c1", "n1", None, 1e-12)], [Port("n1")])
    np.testing.assert_allclose(stamp(g, GRID), np.diag(1j * GRID.omegas * 1e-12))


def test_inverter_stamp_off_diagonal_only():
    g = DeviceGraph(["a", "b"], [Element(JINVERTER, "j", "a", "b", 0.01)], [Port("a"), Port("b")])
    y = stamp(g, GRID)
    d = GRID.dim
    assert not y[:d, :d].any() and not y[d:, d:].any()
    np.testing.assert_allclose(y[:d, d:], y[d:, :d])
    np.testing.assert_allclose(np.diag(y[:d, d:]), -0.01j * np.ones(d))


def test_matched_load():
    g = DeviceGraph(["n"], [Element(RESISTOR, "r", "n", None, 50.0)], [Port("n", 50.0)])
    s = solve_floquet_s(g, GRID)
    np.testing.assert_allclose(s.data, 0, atol=1e-15)


def test_port_admittance_gives_same_s():
    dev = random_isolator(np.random.default_rng(5), order=3)
    grid = build_grid(6.07e9, dev.f_base, 3)
    y = port_admittance(dev.graph, grid)
    u = np.eye(y.shape[0])
    s_schur = np.linalg.solve(u + 50 * y, u - 50 * y)
    np.testing.assert_allclose(s_schur, solve_floquet_s(dev.graph, grid).data, atol=1e-10)


def test_subset_of_inputs():
    dev = random_isolator(np.random.default_rng(6), order=2)
    grid = build_grid(6.07e9, dev.f_base, 2)
    full = solve_floquet_s(dev.graph, grid)
    part = solve_floquet_s(dev.graph, grid, input_harmonics=[0])
    col = grid.index(0)
    np.testing.assert_allclose(part.data[:, col], full.data[:, col], atol=1e-13)
    assert np.isnan(part.data[0, grid.index(1)])


@given(st.integers(0, 2**32 - 1), st.integers(0, 3))
def test_mna_matches_twoport(seed, k):
    rng = np.random.default_rng(seed)
    dev = random_isolator(rng)
    f = random_frequency(rng, dev, k)
    a = dev.s_matrix(f, k, engine="twoport").data
    b = dev.s_matrix(f, k, engine="mna").data
    assert np.max(np.abs(a - b)) <= 1e-9


class TestValidation:
    def test_unknown_node(self):
        with pytest.raises(DanglingNode):
            DeviceGraph(["a"], [Element(CAPACITOR, "c", "b", None, 1e-12)], [Port("a")])

    def test_dangling(self):
        with pytest.raises(DanglingNode):
            DeviceGraph(["a", "b"], [Element(CAPACITOR, "c", "a", None, 1e-12)], [Port("a")])

    def test_unreachable(self):
        els = [Element(CAPACITOR, "c1", "a", None, 1e-12), Element(CAPACITOR, "c2", "b", None, 1e-12)]
        with pytest.raises(DanglingNode):
            DeviceGraph(["a", "b"], els, [Port("a")])

    def test_nonpositive_j(self):
        with pytest.raises(NonPositiveJ):
            Element(JINVERTER, "j", "a", "b", 0.0)

    def test_duplicates(self):
        els = [Element(CAPACITOR, "c", "a", None, 1e-12), Element(CAPACITOR, "c", "a", None, 1e-12)]
        with pytest.raises(ValidationError):
            DeviceGraph(["a"], els, [Port("a")])
        with pytest.raises(ValidationError):
            DeviceGraph(["a"], els[:1], [Port("a"), Port("a")])

    def test_squid_needs_spec(self):
        with pytest.raises(ValidationError):
            Element(SQUID, "s", "a", None, 1e-9)

    def test_port_impedance(self):
        with pytest.raises(ValidationError):
            Port("a", 0.0)


def best_circulator_frequency(dev, k=5):
    fs = np.linspace(5.9e9, 6.1e9, 41) + 1e5
    return max(fs, key=lambda f: -dev.s_matrix(f, k).db(1, 2))


class TestCirculator:
    def test_static_multiport_unitary(self):
        dev = build_template("wye2", amplitude=0.0)
        for f in (5.8e9, 6.013e9, 6.3e9):
            s = dev.s_matrix(f, 1).fundamental()
            np.testing.assert_allclose(s.conj().T @ s, np.eye(3), atol=1e-9)
            np.testing.assert_allclose(s, s.T, atol=1e-10)

    def test_rotation_symmetry(self):
        dev = build_template("wye1")
        s = dev.s_matrix(5.97e9, 4)
        fwd = [abs(s(2, 1)), abs(s(3, 2)), abs(s(1, 3))]
        rev = [abs(s(1, 2)), abs(s(2, 3)), abs(s(3, 1))]
        assert np.ptp(fwd) <= 1e-9 and np.ptp(rev) <= 1e-9

    def test_reversed_staggering_reverses_circulation(self):
        a = build_template("wye1", theta_deg=120).s_matrix(5.97e9, 4)
        b = build_template("wye1", theta_deg=240).s_matrix(5.97e9, 4)
        assert abs(abs(a(2, 1)) - abs(b(1, 2))) <= 1e-9
        assert abs(abs(a(1, 2)) - abs(b(2, 1))) <= 1e-9

    def test_single_layer_operating_point(self):
        dev = build_template("wye1")
        f = best_circulator_frequency(dev)
        s = dev.s_matrix(f, 5)
        assert s.db(2, 1) == pytest.approx(-2.7, abs=0.7)
        assert s.db(1, 2) <= -25

    def test_two_layers_cancel_odd_products(self):
        one = build_template("wye1")
        two = build_template("wye2")
        f = best_circulator_frequency(two)
        p1 = one.s_matrix(f, 5).output_powers(1)
        p2 = two.s_matrix(f, 5).output_powers(1)
        idx = two.s_matrix(f, 5).grid.index
        for k in (-3, -1, 1, 3):
            # against the k=0 output of the same device and against the one-layer device
            assert 10 * np.log10(p2[:, idx(k)].max() / p2[:, idx(0)].max()) <= -30
            assert 10 * np.log10(p2[:, idx(k)].max() / p1[:, idx(k)].max()) <= -30


def test_generic_graph_with_two_terminal_capacitor():
    spec = SquidSpec(4e-6, 10, 0.35, (PumpTone(0.02, 1, 0.0),))
    els = [Element(SQUID, "s1", "a", None, spec), Element(CAPACITOR, "c1", "a", None, 0.8e-12),
           Element(CAPACITOR, "cc", "a", "b", 50e-15), Element(CAPACITOR, "c2", "b", None, 0.8e-12),
           Element(SQUID, "s2", "b", None, spec.shifted(1.0))]
    g = DeviceGraph(["a", "b"], els, [Port("a"), Port("b")])
    s = solve_floquet_s(g, build_grid(5.9e9, 0.5e9, 3))
    assert np.all(np.isfinite(s.data))
    # passive pumped network still scatters at most the incident power plus pump-supplied power; sanity only
    assert np.abs(s.data).max() < 10
