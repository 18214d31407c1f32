import numpy as np
import pytest
from hypothesis import given, strategies as st

from squidfloquet.devices import build_template
from squidfloquet.errors import (DuplicateName, MalformedNumber, NetlistError, UnknownDirective, UnresolvedNodeRef,
                                 ValidationError)
from squidfloquet.mna import CAPACITOR, JINVERTER, RESISTOR, SQUID
from squidfloquet.netlist import (GridSettings, Netlist, emit_netlist, netlist_from_device, parse_netlist,
                                  parse_number)

from helpers import random_isolator

RC = """
# matched RC one-port
NODE n1
CAP c1 n1 257f
RES r1 n1 50
PORT 1 n1 z0=50
"""


class TestNumbers:
    @pytest.mark.parametrize("text,value", [("257f", 257e-15), ("4u", 4e-6), ("6G", 6e9), ("700M", 7e8),
                                            ("7.37m", 7.37e-3), ("0.7e9", 7e8), ("-2.5k", -2500.0), (".5p", 5e-13),
                                            ("1e-3n", 1e-12)])
    def test_suffixes(self, text, value):
        assert parse_number(text) == pytest.approx(value, rel=1e-15)

    @pytest.mark.parametrize("text", ["", "abc", "1.2.3", "5x", "G6", "1e", "4 u"])
    def test_malformed(self, text):
        with pytest.raises(MalformedNumber):
            parse_number(text)


class TestParse:
    def test_rc(self):
        net = parse_netlist(RC)
        g = net.graph
        assert g.nodes == ("n1",)
        assert g.element("c1").value == pytest.approx(257e-15)
        assert g.element("r1").kind == RESISTOR
        assert g.ports[0].z0 == 50.0

    def test_keywords_case_insensitive(self):
        net = parse_netlist(RC.replace("NODE", "node").replace("CAP", "Cap").replace("PORT", "port"))
        assert net.graph.nodes == ("n1",)

    def test_pumped_resonator(self):
        net = parse_netlist("""
            GRID fsig=6G fbase=700M k=4
            NODE p1 r1
            JINV j1 p1 r1 j=7.4m
            CAP c1 r1 776f
            SQUID sq1 r1 ic=4u stack=10 dc=0.35
            PUMP sq1 amp=0.025 harm=1 phase=90
            PORT 1 p1 z0=50
        """)
        sq = net.graph.element("sq1").value
        assert sq.n_stack == 10 and sq.phi_dc == 0.35
        assert sq.pumps[0].phase == pytest.approx(np.pi / 2)
        assert net.graph.element("j1").kind == JINVERTER
        assert net.grid == GridSettings(6e9, 7e8, 4)
        dev = net.device()
        assert dev.f_base == 7e8
        assert np.isfinite(dev.s_matrix(6e9, 4).data).all()

    def test_two_node_capacitor(self):
        net = parse_netlist("NODE a b\nCAP c1 a 1p\nCAP cc a b 50f\nCAP c2 b 1p\nPORT 1 a\nPORT 2 b\n")
        cc = net.graph.element("cc")
        assert (cc.kind, cc.a, cc.b) == (CAPACITOR, "a", "b")

    def test_template(self):
        net = parse_netlist("TEMPLATE isolator3 amplitude=0.024 f_m=700M theta_deg=90\n")
        assert net.template == "isolator3" and net.template_args["f_m"] == 7e8
        assert net.device().name == "isolator3"

    def test_pumped_netlist_needs_base(self):
        net = parse_netlist("NODE a\nCAP c a 1p\nSQUID s a ic=4u\nPUMP s amp=0.01\nPORT 1 a\n")
        with pytest.raises(ValidationError):
            net.device()


class TestErrors:
    def lineno(self, text, exc):
        with pytest.raises(exc) as info:
            parse_netlist(text)
        return info.value.lineno

    def test_unknown_directive(self):
        assert self.lineno("NODE a\nWIRE a b\n", UnknownDirective) == 2

    def test_undefined_squid(self):
        assert self.lineno("NODE a\nCAP c a 1p\n\nPUMP sq9 amp=0.01\n", UnresolvedNodeRef) == 4

    def test_undeclared_node(self):
        assert self.lineno("NODE a\nCAP c b 1p\n", UnresolvedNodeRef) == 2

    def test_duplicates(self):
        assert self.lineno("NODE a\nCAP c a 1p\nRES c a 50\n", DuplicateName) == 3
        assert self.lineno("NODE a a\n", DuplicateName) == 1
        assert self.lineno("NODE a\nCAP c a 1p\nPORT 1 a\nPORT 1 a\n", DuplicateName) == 4

    def test_malformed_number(self):
        assert self.lineno("NODE a\n# note\nCAP c a 1q\n", MalformedNumber) == 3

    def test_message_carries_line(self):
        with pytest.raises(NetlistError, match="line 2"):
            parse_netlist("NODE a\nFOO\n")

    def test_mixed_template_and_elements(self):
        with pytest.raises(NetlistError):
            parse_netlist("TEMPLATE isolator3\nNODE a\n")

    def test_bad_template_argument(self):
        assert self.lineno("\nTEMPLATE isolator3 wibble=3\n", NetlistError) == 2

    def test_inverter_admittance(self):
        assert self.lineno("NODE a b\nJINV j a b j=0\n", NetlistError) == 2

    def test_no_port(self):
        with pytest.raises(NetlistError):
            parse_netlist("NODE a\nCAP c a 1p\n")


class TestRoundTrip:
    def test_rc(self):
        net = parse_netlist(RC)
        assert parse_netlist(emit_netlist(net)) == net

    @pytest.mark.parametrize("name", ["isolator3", "wye2", "diramp"])
    def test_templates(self, name):
        net = netlist_from_device(build_template(name))
        text = emit_netlist(net)
        back = parse_netlist(text)
        assert back == net
        assert emit_netlist(back) == text

    def test_template_call(self):
        net = Netlist(template="wye1", template_args={"amplitude": 0.036, "theta_deg": 120.0},
                      grid=GridSettings(5.985e9, None, 5))
        assert parse_netlist(emit_netlist(net)) == net

    @given(st.integers(0, 2**32 - 1))
    def test_random_chains(self, seed):
        dev = random_isolator(np.random.default_rng(seed))
        net = netlist_from_device(dev)
        back = parse_netlist(emit_netlist(net))
        assert back == net
        assert back.graph.element("sq1").value == dev.graph.element("sq1").value
        assert [e.kind for e in back.graph.elements].count(SQUID) == dev.meta["params"].order
