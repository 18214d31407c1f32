import numpy as np
import pytest

from squidfloquet.devices import Device, build_template
from squidfloquet.errors import IllConditionedProjection, NoSteadyState, UnsupportedElement
from squidfloquet.mna import CAPACITOR, INDUCTOR, RESISTOR, DeviceGraph, Element, Port
from squidfloquet.spectral import build_grid
from squidfloquet.tdoracle import build_state_space, compare, extract_harmonics, integrate_to_steady_state


def lc_device(c=1e-12, l=1e-9, z0=50.0, f_base=1e9):
    g = DeviceGraph(["n"], [Element(CAPACITOR, "c", "n", None, c), Element(INDUCTOR, "l", "n", None, l)],
                    [Port("n", z0)])
    return Device(g, f_base, "lc", None, z0, {"f_center": 1 / (2 * np.pi * np.sqrt(l * c))})


class TestStateSpace:
    def test_lc_resonance(self):
        ss = build_state_space(lc_device(z0=1e15))
        eig = np.linalg.eigvals(ss.system_matrix(0.0))
        np.testing.assert_allclose(np.sort(np.abs(eig.imag)), [1 / np.sqrt(1e-21)] * 2, rtol=1e-9)

    def test_loaded_decay(self):
        c, l, r = 1e-12, 1e-9, 50.0
        ss = build_state_space(lc_device(c, l, r))
        eig = np.linalg.eigvals(ss.system_matrix(0.0))
        np.testing.assert_allclose(eig.real, -1 / (2 * r * c), rtol=1e-9)
        w0 = 1 / np.sqrt(l * c)
        q = w0 / (2 * -eig.real[0])
        assert q == pytest.approx(r * np.sqrt(c / l), rel=1e-9)

    def test_inverters_are_realized(self):
        ss = build_state_space(build_template("isolator3"))
        assert ss.meta["realization"] == "capacitive"
        assert ss.n_nodes == 5 and len(ss.branches) == 3
        with pytest.raises(UnsupportedElement):
            build_state_space(build_template("isolator3"), realization="none")

    def test_time_varying_branch(self):
        ss = build_state_space(build_template("isolator2", amplitude=0.03))
        a0, a1 = ss.system_matrix(0.0), ss.system_matrix(0.25 / ss.f_base)
        assert not np.allclose(a0, a1)
        np.testing.assert_allclose(ss.system_matrix(1 / ss.f_base), a0, rtol=1e-9, atol=1e-6)


class TestProjection:
    T = np.linspace(0, 4e-9, 801)[:-1]

    def test_pure_tone(self):
        y = np.cos(2 * np.pi * 6e9 * self.T + 0.3)
        v = extract_harmonics(self.T, y, [5.5e9, 6e9, 6.5e9])
        assert v[1] == pytest.approx(np.exp(0.3j), abs=1e-9)
        assert abs(v[0]) < 1e-6 and abs(v[2]) < 1e-6

    def test_two_tones(self):
        y = 0.5 * np.cos(2 * np.pi * 5.5e9 * self.T) + 2 * np.sin(2 * np.pi * 7e9 * self.T)
        v = extract_harmonics(self.T, np.column_stack([y, -y]), [5.5e9, 6e9, 7e9])
        np.testing.assert_allclose(np.abs(v[:, 0]), [0.5, 0, 2], atol=1e-6)
        np.testing.assert_allclose(v[:, 1], -v[:, 0], atol=1e-12)

    def test_window_origin(self):
        t = self.T + 1.234e-9
        y = np.cos(2 * np.pi * 6e9 * t)
        assert extract_harmonics(t, y, [6e9])[0] == pytest.approx(1.0, abs=1e-9)

    def test_unresolvable(self):
        with pytest.raises(IllConditionedProjection):
            extract_harmonics(self.T, np.zeros_like(self.T), [6e9, -6e9])


class TestSteadyState:
    def test_matched_divider(self):
        g = DeviceGraph(["n"], [Element(CAPACITOR, "c", "n", None, 0.1e-12), Element(RESISTOR, "r", "n", None, 50.0)],
                        [Port("n", 50.0)])
        dev = Device(g, 1e9, "load", None, 50.0, {"f_center": 1e9})
        ss = build_state_space(dev)
        st = integrate_to_steady_state(ss, build_grid(1e9, 1e9, 0), tol=1e-8)
        # the port sees half the source voltage 2 sqrt(z0)
        assert abs(st.port_phasors[0, 0]) == pytest.approx(np.sqrt(50.0), rel=5e-3)

    def test_energy_conservation(self):
        dev = build_template("isolator3", amplitude=0.0)
        ss = build_state_space(dev)
        grid = build_grid(6.1e9, dev.f_base, 0)
        st = integrate_to_steady_state(ss, grid, tol=1e-8)
        b = st.outgoing_waves(ss, 1)
        assert np.sum(np.abs(b) ** 2) == pytest.approx(1.0, rel=5e-3)

    def test_no_steady_state(self):
        dev = build_template("isolator2", amplitude=0.03)
        ss = build_state_space(dev)
        with pytest.raises(NoSteadyState):
            integrate_to_steady_state(ss, build_grid(6e9, dev.f_base, 2), tol=1e-12, max_periods=3)

    def test_modulated_chain_matches_spectral(self):
        rows, st = compare(build_template("isolator2", amplitude=0.03), 5.95e9, k_max=5)
        assert st.periods < 500
        for r in rows:
            if r["significant"]:
                assert r["rel_error"] <= 1e-2
