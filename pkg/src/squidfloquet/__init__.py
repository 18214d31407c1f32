"""Spectral (Floquet) simulation of flux-pumped SQUID resonator networks.

Typical use::

    from squidfloquet import build_template
    dev = build_template("isolator3", amplitude=0.02, f_m=0.4e9)
    s = dev.s_matrix(6.0e9, k_max=6)
    s.db(2, 1), s.db(1, 2)
"""
from .devices import (ISOLATOR3_OPERATING_POINT, REFERENCE_SQUID, TEMPLATES, AmplifierParams, CirculatorParams,
                      Device, IsolatorParams, build, build_template, realize_inverters, static_prototype_synthesis,
                      template_params)
from .elements import EXACT, PHI0, TAYLOR3, PumpTone, SquidSpec, inverse_inductance_coefficients
from .errors import SolverError, SquidFloquetError, ValidationError
from .mna import DeviceGraph, Element, Port, solve_floquet_s
from .netlist import emit_netlist, parse_netlist
from .spectral import FloquetSMatrix, FrequencyGrid, build_grid
from .sweep import Axis, ObjectiveSpec, SweepSpec, band_center, optimize, run_sweep
from .tdoracle import build_state_space, compare
from .twoport import TwoPortChain, abcd_to_s, cascade, chain_s

__version__ = "0.1.0"
