"""Device templates: coupled-resonator isolators, wye circulators, and the
directional amplifier, plus filter synthesis and the capacitive realization
of admittance inverters.

Every template returns a :class:`Device`, which always carries a
:class:`~squidfloquet.mna.DeviceGraph` and, for series-coupled devices, can
also produce the equivalent :class:`~squidfloquet.twoport.TwoPortChain` so
both engines can run on it.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .elements import EXACT, PumpTone, SquidSpec, capacitor_spectral_admittance, squid_inductance, \
    squid_spectral_admittance
from .errors import IncommensuratePump, NegativeAbsorbedCapacitance, ValidationError
from .mna import CAPACITOR, JINVERTER, SQUID, DeviceGraph, Element, Port, solve_floquet_s
from .spectral import build_grid
from .twoport import TwoPortChain, chain_s, jinverter_abcd, shunt_abcd

#: Junction critical current (A), stack size and bias of the reference design.
REFERENCE_SQUID = SquidSpec(i_c=4e-6, n_stack=10, phi_dc=0.35)

#: Capacitances reported for the fabricated 6 GHz layout (F).  They include
#: layout-specific corrections and do not form a self-consistent lumped
#: prototype with ideal inverters, so templates synthesize their own values.
LAYOUT_CAPACITORS = (257e-15, 113e-15, 232e-15, 284e-15)


# ---------------------------------------------------------------------------
# synthesis

def chebyshev_g_values(order, ripple_db):
    """Lowpass prototype ``g_0 .. g_{n+1}`` of an equal-ripple filter."""
    if order < 1:
        raise ValidationError("filter order must be at least 1")
    if not ripple_db > 0:
        raise ValidationError("passband ripple must be positive")
    beta = np.log(1.0 / np.tanh(ripple_db / (40 / np.log(10))))
    gam = np.sinh(beta / (2 * order))
    a = [np.sin((2 * k - 1) * np.pi / (2 * order)) for k in range(1, order + 1)]
    b = [gam**2 + np.sin(k * np.pi / order) ** 2 for k in range(1, order + 1)]
    g = [1.0, 2 * a[0] / gam]
    for k in range(2, order + 1):
        g.append(4 * a[k - 2] * a[k - 1] / (b[k - 2] * g[k - 1]))
    g.append(1.0 if order % 2 else 1.0 / np.tanh(beta / 4) ** 2)
    return np.array(g)


@dataclass(frozen=True)
class Prototype:
    """Shunt-resonator bandpass design: one capacitance, ``order + 1`` inverters."""

    capacitance: float
    j_values: tuple
    g_values: tuple
    fractional_bandwidth: float


def static_prototype_synthesis(order, f_center, bandwidth, z0=50.0, l_resonator=None, return_loss_db=16.0):
    """Inverter-coupled bandpass filter of identical shunt resonators.

    ``bandwidth`` is the 1-dB bandwidth.  An equal-ripple prototype with
    the given passband return loss is used, scaled so that its 1-dB points
    (not its ripple edges) land on ``f_center +- bandwidth / 2``.  The
    resonator inductance defaults to the reference SQUID stack at its bias.

    Returns
    -------
    Prototype
    """
    if order not in (2, 3, 4):
        raise ValidationError(f"order must be 2, 3 or 4, got {order}")
    if not (f_center > 0 and z0 > 0):
        raise ValidationError("f_center and z0 must be positive")
    if bandwidth < 0:
        raise ValidationError("bandwidth must be non-negative")
    if l_resonator is None:
        l_resonator = squid_inductance(REFERENCE_SQUID, REFERENCE_SQUID.phi_dc)
    ripple = -10 * np.log10(1 - 10 ** (-return_loss_db / 10))
    g = chebyshev_g_values(order, ripple)
    eps = np.sqrt(10 ** (ripple / 10) - 1)
    # lowpass frequency of the 1 dB point, in units of the ripple edge
    x1 = np.cosh(np.arccosh(np.sqrt(10**0.1 - 1) / eps) / order)
    delta = bandwidth / f_center / x1
    w0 = 2 * np.pi * f_center
    c = 1.0 / (w0**2 * l_resonator)
    b = w0 * c
    y0 = 1.0 / z0
    js = [np.sqrt(y0 * delta * b / (g[0] * g[1]))]
    js += [delta * b / np.sqrt(g[i] * g[i + 1]) for i in range(1, order)]
    js += [np.sqrt(y0 * delta * b / (g[order] * g[order + 1]))]
    return Prototype(c, tuple(float(j) for j in js), tuple(g), delta)


# ---------------------------------------------------------------------------
# capacitive inverter realization

def pi_capacitive_inverter(j, f_center):
    """Series coupling capacitor of a capacitive pi inverter.

    Returns ``(c_c, (-c_c, -c_c))``: the series capacitor ``J / (2 pi f)``
    and the two negative shunt capacitors to be absorbed by the neighbours.
    """
    if not (j > 0 and f_center > 0):
        raise ValidationError("J and f_center must be positive")
    cc = j / (2 * np.pi * f_center)
    return cc, (-cc, -cc)


def port_coupling_capacitor(j, f_center, z0=50.0):
    """Series capacitor matching an inverter from a ``z0`` port.

    The capacitor into ``z0`` presents the conductance ``J^2 z0`` that an
    ideal inverter would, at ``f_center``.  Returns ``(c_c, c_shunt)`` with
    ``c_shunt`` the (negative) capacitance to absorb into the resonator.
    """
    x2 = (j * z0) ** 2
    if not 0 < x2 < 1:
        raise ValidationError(f"J z0 = {j * z0:.3g} cannot be realized by a series capacitor")
    w = 2 * np.pi * f_center
    x = np.sqrt(x2 / (1 - x2))
    cc = x / (w * z0)
    return cc, -cc / (1 + x * x)


def absorb(capacitance, correction, name="resonator"):
    total = capacitance + correction
    if total <= 0:
        raise NegativeAbsorbedCapacitance(
            f"{name}: absorbing {correction * 1e15:.2f} fF into {capacitance * 1e15:.2f} fF leaves "
            f"{total * 1e15:.2f} fF")
    return total


def realize_inverters(graph, f_center):
    """Replace every inverter by capacitors, exact at ``f_center``.

    Inverters between two internal nodes become a pi of capacitors whose
    negative shunts are absorbed by the existing node capacitance.  An
    inverter touching a port node that has nothing else attached becomes a
    series capacitor sized to present the same loading, with its correction
    absorbed on the far side.
    """
    shunt = {n: 0.0 for n in graph.nodes}
    for e in graph.elements:
        if e.kind == CAPACITOR and e.b is None:
            shunt[e.a] += e.value
    attached = {n: 0 for n in graph.nodes}
    for e in graph.elements:
        for n in e.nodes:
            attached[n] += 1
    ports = {p.node: p for p in graph.ports}
    corrections = {n: 0.0 for n in graph.nodes}
    out = []
    for e in graph.elements:
        if e.kind != JINVERTER:
            out.append(e)
            continue
        bare = [n for n in (e.a, e.b) if n in ports and attached[n] == 1]
        if bare:
            (pn,) = bare[:1]
            other = e.b if pn == e.a else e.a
            cc, corr = port_coupling_capacitor(e.value, f_center, ports[pn].z0)
            corrections[other] += corr
        else:
            cc, (ca, cb) = pi_capacitive_inverter(e.value, f_center)
            corrections[e.a] += ca
            corrections[e.b] += cb
        out.append(Element(CAPACITOR, f"{e.name}_c", e.a, e.b, cc))
    final = []
    done = set()
    for e in out:
        if e.kind == CAPACITOR and e.b is None and e.a not in done:
            final.append(replace(e, value=absorb(shunt[e.a], corrections[e.a], e.a)))
            done.add(e.a)
        elif e.kind == CAPACITOR and e.b is None:
            continue  # merged into the node's first shunt capacitor
        else:
            final.append(e)
    for n, corr in corrections.items():
        if n not in done and corr != 0.0:
            raise NegativeAbsorbedCapacitance(f"node {n} has no capacitor to absorb {corr * 1e15:.2f} fF")
    return graph.replace_elements(final, realization="capacitive", realization_frequency=f_center)


# ---------------------------------------------------------------------------
# generic device wrapper

@dataclass(frozen=True)
class Device:
    """A template instance: nodal graph, base frequency and optional chain form.

    ``stages`` lists the series description as ``("jinv", J)`` and
    ``("shunt", squid_element_name, capacitance)`` entries.
    """

    graph: DeviceGraph
    f_base: float
    name: str = ""
    stages: tuple = None
    z0: float = 50.0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def is_chain(self):
        return self.stages is not None

    def chain(self, grid, mode=EXACT):
        if self.stages is None:
            raise ValidationError(f"{self.name or 'device'} is not a series chain")
        out = []
        for st in self.stages:
            if st[0] == "jinv":
                out.append(jinverter_abcd(st[1], grid))
            else:
                spec = self.graph.element(st[1]).value
                y = squid_spectral_admittance(spec, grid, mode) + capacitor_spectral_admittance(st[2], grid)
                out.append(shunt_abcd(y))
        return TwoPortChain(out, grid, self.z0)

    def grid(self, f_signal, k_max):
        return build_grid(f_signal, self.f_base, k_max)

    def s_matrix(self, f_signal, k_max=8, mode=EXACT, engine="auto"):
        """Floquet S-matrix at ``f_signal`` with ``2 k_max + 1`` harmonics."""
        grid = self.grid(f_signal, k_max)
        if engine == "auto":
            engine = "twoport" if self.is_chain else "mna"
        if engine == "twoport":
            return chain_s(self.chain(grid, mode))
        if engine == "mna":
            return solve_floquet_s(self.graph, grid, mode)
        raise ValidationError(f"unknown engine {engine!r}")

    def map_squids(self, fn):
        return replace(self, graph=self.graph.map_squids(fn))

    def static(self):
        """Same device with every pump removed."""
        return self.map_squids(lambda e: e.value.with_pumps(()))

    def realized(self, f_center=None):
        """Capacitor-only version of the graph (no chain form)."""
        f_center = f_center or self.meta.get("f_center")
        if f_center is None:
            raise ValidationError("realization needs a centre frequency")
        return Device(realize_inverters(self.graph, f_center), self.f_base, self.name + "-cap", None, self.z0,
                      dict(self.meta))


def _chain_graph(js, caps, squids, z0):
    """Graph of ``J_0, (C_i || SQUID_i), J_1, ...`` between two ports."""
    n = len(caps)
    nodes = ["p1"] + [f"r{i + 1}" for i in range(n)] + ["p2"]
    elements = []
    stages = []
    for i in range(n + 1):
        elements.append(Element(JINVERTER, f"j{i}", nodes[i], nodes[i + 1], js[i]))
        stages.append(("jinv", js[i]))
        if i < n:
            r = nodes[i + 1]
            elements.append(Element(CAPACITOR, f"c{i + 1}", r, None, caps[i]))
            elements.append(Element(SQUID, f"sq{i + 1}", r, None, squids[i]))
            stages.append(("shunt", f"sq{i + 1}", caps[i]))
    graph = DeviceGraph(nodes, elements, [Port("p1", z0), Port("p2", z0)])
    return graph, tuple(stages)


# ---------------------------------------------------------------------------
# isolator

@dataclass(frozen=True)
class IsolatorParams:
    """Inverter-coupled chain of ``order`` identical flux-pumped resonators.

    Resonator ``i`` (from port 1) is pumped with
    ``amplitude * cos(2 pi f_m t + i * theta)``.  Capacitances and inverter
    values default to the synthesized prototype for ``f_center`` and
    ``bandwidth`` with the SQUID stack at ``design_bias``; the element
    values stay put when only the operating bias ``squid.phi_dc`` moves.
    """

    order: int = 3
    f_center: float = 6e9
    bandwidth: float = 0.7e9
    squid: SquidSpec = REFERENCE_SQUID
    amplitude: float = 0.025
    f_m: float = 0.7e9
    theta: float = np.pi / 2
    capacitors: tuple = None
    j_values: tuple = None
    z0: float = 50.0
    return_loss_db: float = 16.0
    design_bias: float = REFERENCE_SQUID.phi_dc

    def __post_init__(self):
        if self.order not in (2, 3, 4):
            raise ValidationError(f"isolator order must be 2, 3 or 4, got {self.order}")
        if not self.f_m > 0:
            raise ValidationError("modulation frequency must be positive")
        if self.capacitors is not None and len(self.capacitors) != self.order:
            raise ValidationError(f"need {self.order} capacitors, got {len(self.capacitors)}")
        if self.j_values is not None and len(self.j_values) != self.order + 1:
            raise ValidationError(f"need {self.order + 1} inverter values, got {len(self.j_values)}")
        if self.capacitors is not None and any(c <= 0 for c in self.capacitors):
            raise ValidationError("resonator capacitances must be positive")

    def with_(self, **changes):
        return replace(self, **changes)

    def prototype(self):
        l_res = squid_inductance(self.squid, self.design_bias)
        return static_prototype_synthesis(self.order, self.f_center, self.bandwidth, self.z0, l_res,
                                          self.return_loss_db)

    def element_values(self):
        if self.capacitors is not None and self.j_values is not None:
            return tuple(self.capacitors), tuple(self.j_values)
        proto = self.prototype()
        caps = self.capacitors or (proto.capacitance,) * self.order
        js = self.j_values or proto.j_values
        return tuple(caps), tuple(js)

    def pumped_squids(self):
        base = self.squid.with_pumps(())
        if self.amplitude == 0:
            return [base] * self.order
        return [base.with_pumps([PumpTone(self.amplitude, 1, i * self.theta)]) for i in range(self.order)]


#: Modulation at which the synthesized three-resonator chain isolates best
#: across the bias range (found by sweep and optimizer).  Pass as
#: overrides: ``build_template("isolator3", **ISOLATOR3_OPERATING_POINT)``.
ISOLATOR3_OPERATING_POINT = {"amplitude": 0.02, "f_m": 0.4e9, "theta_deg": 90.0}


def isolator_template(p: IsolatorParams) -> Device:
    caps, js = p.element_values()
    graph, stages = _chain_graph(js, caps, p.pumped_squids(), p.z0)
    return Device(graph, p.f_m, f"isolator{p.order}", stages, p.z0, {"f_center": p.f_center, "params": p})


# ---------------------------------------------------------------------------
# circulator

#: Port inverter per layer count, from the optimizer at the default pump.
CIRCULATOR_J_PORT = {1: 6.75e-3, 2: 6.15e-3, 3: 5.0e-3}


@dataclass(frozen=True)
class CirculatorParams:
    """Wye circulator: each port drives a pumped resonator through an
    inverter, and the three resonators of a layer meet at a centre node.

    With ``c_center = 0`` the centre node carries no admittance of its own
    and simply forces the three resonator voltages of its layer to sum to
    zero, so ``j_center`` drops out.  Layers are parallel copies; their
    pump phases follow :meth:`phase`.
    """

    layers: int = 1
    f_center: float = 6e9
    squid: SquidSpec = REFERENCE_SQUID
    amplitude: float = 0.036
    f_m: float = 0.5e9
    theta: float = 2 * np.pi / 3
    j_port: float = None
    j_center: float = None
    capacitance: float = None
    c_center: float = 0.0
    z0: float = 50.0
    design_bias: float = REFERENCE_SQUID.phi_dc

    def __post_init__(self):
        if self.layers not in (1, 2, 3):
            raise ValidationError(f"layers must be 1, 2 or 3, got {self.layers}")
        if not self.f_m > 0:
            raise ValidationError("modulation frequency must be positive")
        if self.c_center < 0:
            raise ValidationError("centre capacitance must be non-negative")

    def with_(self, **changes):
        return replace(self, **changes)

    def phase(self, port, layer):
        """Pump phase of the resonator on ``port`` (0-based) in ``layer``.

        One layer: ``port * theta``.  Two layers: the second copy is offset
        by 180 degrees.  Three layers reuse the same three pump phases,
        rotated by one port per layer.
        """
        if self.layers == 3:
            return ((port + layer) % 3) * self.theta
        return port * self.theta + layer * np.pi

    @property
    def resonator_capacitance(self):
        if self.capacitance is not None:
            return self.capacitance
        w0 = 2 * np.pi * self.f_center
        return 1.0 / (w0**2 * squid_inductance(self.squid, self.design_bias))


def circulator_template(p: CirculatorParams) -> Device:
    j_port = p.j_port or CIRCULATOR_J_PORT[p.layers]
    j_center = p.j_center or j_port
    c = p.resonator_capacitance
    base = p.squid.with_pumps(())
    nodes = ["p1", "p2", "p3"]
    elements = []
    for layer in range(p.layers):
        center = f"x{layer + 1}"
        nodes.append(center)
        if p.c_center > 0:
            elements.append(Element(CAPACITOR, f"cx{layer + 1}", center, None, p.c_center))
        for port in range(3):
            r = f"r{layer + 1}{port + 1}"
            nodes.append(r)
            pumps = [PumpTone(p.amplitude, 1, p.phase(port, layer))] if p.amplitude > 0 else []
            elements += [
                Element(JINVERTER, f"jp{layer + 1}{port + 1}", f"p{port + 1}", r, j_port),
                Element(CAPACITOR, f"c{layer + 1}{port + 1}", r, None, c),
                Element(SQUID, f"sq{layer + 1}{port + 1}", r, None, base.with_pumps(pumps)),
                Element(JINVERTER, f"jx{layer + 1}{port + 1}", r, center, j_center),
            ]
    graph = DeviceGraph(nodes, elements, [Port(f"p{i}", p.z0) for i in (1, 2, 3)])
    return Device(graph, p.f_m, f"wye{p.layers}", None, p.z0, {"f_center": p.f_center, "params": p})


# ---------------------------------------------------------------------------
# directional amplifier

@dataclass(frozen=True)
class AmplifierParams:
    """Three-resonator chain with a three-wave pump and a staggered low tone.

    Every SQUID sees ``pump_amplitude * cos(2 pi f_pump t + pump_phase)``
    and ``low_amplitude * cos(2 pi f_low t + low_phases[i])``; both tone
    frequencies must be integer multiples of ``f_base``.
    """

    f_center: float = 6.9e9
    bandwidth: float = 0.7e9
    squid: SquidSpec = REFERENCE_SQUID.with_bias(0.24)
    f_base: float = 0.2e9
    f_pump: float = 13.8e9
    pump_amplitude: float = 0.05
    pump_phase: float = 0.0
    f_low: float = 0.2e9
    low_amplitude: float = 0.06
    low_phases: tuple = (0.0, np.pi / 2, np.pi)
    z0: float = 50.0
    return_loss_db: float = 16.0

    def __post_init__(self):
        if not self.f_base > 0:
            raise ValidationError("f_base must be positive")
        if len(self.low_phases) != 3:
            raise ValidationError("the amplifier has three resonators; give three low-tone phases")
        self.harmonic(self.f_pump)
        self.harmonic(self.f_low)

    def with_(self, **changes):
        return replace(self, **changes)

    def harmonic(self, f):
        m = f / self.f_base
        if abs(m - round(m)) > 1e-9 * max(1.0, m) or round(m) < 1:
            raise IncommensuratePump(f"tone {f:.6g} Hz is not a positive integer multiple of f_base={self.f_base:.6g} Hz")
        return int(round(m))

    def pumped_squids(self):
        base = self.squid.with_pumps(())
        out = []
        for ph in self.low_phases:
            tones = []
            if self.pump_amplitude > 0:
                tones.append(PumpTone(self.pump_amplitude, self.harmonic(self.f_pump), self.pump_phase))
            if self.low_amplitude > 0:
                tones.append(PumpTone(self.low_amplitude, self.harmonic(self.f_low), ph))
            out.append(base.with_pumps(tones))
        return out


def amplifier_template(p: AmplifierParams) -> Device:
    l_res = squid_inductance(p.squid, p.squid.phi_dc)
    proto = static_prototype_synthesis(3, p.f_center, p.bandwidth, p.z0, l_res, p.return_loss_db)
    graph, stages = _chain_graph(proto.j_values, (proto.capacitance,) * 3, p.pumped_squids(), p.z0)
    return Device(graph, p.f_base, "diramp", stages, p.z0,
                  {"f_center": p.f_center, "params": p, "k_default": AMPLIFIER_K})


#: Truncation that keeps the 69th base harmonic and its mixing products.
AMPLIFIER_K = 80


# ---------------------------------------------------------------------------
# registry

TEMPLATES = {
    "isolator2": (IsolatorParams, isolator_template, {"order": 2, "f_m": 0.65e9}),
    "isolator3": (IsolatorParams, isolator_template, {"order": 3}),
    "isolator4": (IsolatorParams, isolator_template, {"order": 4}),
    "wye1": (CirculatorParams, circulator_template, {"layers": 1}),
    "wye2": (CirculatorParams, circulator_template, {"layers": 2}),
    "wye3": (CirculatorParams, circulator_template, {"layers": 3}),
    "diramp": (AmplifierParams, amplifier_template, {}),
}

DESCRIPTIONS = {
    "isolator2": "two-resonator isolating bandpass filter",
    "isolator3": "three-resonator isolating bandpass filter, 6 GHz / 700 MHz",
    "isolator4": "four-resonator isolating bandpass filter",
    "wye1": "single-layer wye circulator",
    "wye2": "two-layer wye circulator, layers pumped 180 degrees apart",
    "wye3": "three-layer wye circulator reusing three pump phases",
    "diramp": "directional amplifier, 13.8 GHz three-wave pump plus staggered 200 MHz tone",
}


def set_param(params, name, value):
    """Copy of ``params`` with one named parameter changed.

    Besides the dataclass fields this understands ``phi_dc`` (operating
    bias of every SQUID) and ``theta_deg``.
    """
    if name == "phi_dc":
        return replace(params, squid=params.squid.with_bias(float(value)))
    if name == "theta_deg":
        return replace(params, theta=np.radians(float(value)))
    if name in ("i_c", "n_stack"):
        return replace(params, squid=replace(params.squid, **{name: value}))
    if name not in params.__dataclass_fields__:
        raise ValidationError(f"{type(params).__name__} has no parameter {name!r}")
    return replace(params, **{name: value})


def get_param(params, name):
    if name == "phi_dc":
        return params.squid.phi_dc
    if name == "theta_deg":
        return float(np.degrees(params.theta))
    if name in ("i_c", "n_stack"):
        return getattr(params.squid, name)
    return getattr(params, name)


def template_params(name, **overrides):
    try:
        cls, _, defaults = TEMPLATES[name]
    except KeyError:
        raise ValidationError(f"unknown template {name!r}; choose from {sorted(TEMPLATES)}") from None
    params = cls(**defaults)
    for key, value in overrides.items():
        params = set_param(params, key, value)
    return params


def build(params) -> Device:
    """Instantiate whichever template ``params`` belongs to."""
    for cls, fn, _ in TEMPLATES.values():
        if isinstance(params, cls):
            return fn(params)
    raise ValidationError(f"no template for {type(params).__name__}")


def build_template(name, **overrides) -> Device:
    return build(template_params(name, **overrides))
