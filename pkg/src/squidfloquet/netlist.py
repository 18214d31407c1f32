"""Line-oriented netlist format.

::

    # comment
    GRID fsig=6G fbase=700M k=8
    NODE n1
    CAP c1 n1 776.5f          # to ground
    CAP cc n1 n2 66f          # between two nodes
    IND l1 n1 906p
    SQUID sq1 n1 ic=4u stack=10 dc=0.35
    PUMP sq1 amp=0.025 harm=1 phase=90
    JINV j1 p1 n1 j=7.37m
    RES r1 n1 50
    PORT 1 p1 z0=50
    TEMPLATE isolator3 amplitude=0.024 f_m=700M

Keywords are case-insensitive, names are not.  Numbers take the SI
suffixes f p n u m k M G (``m`` milli, ``M`` mega).  Pump phases are in
degrees unless suffixed ``rad``.  A netlist holds either one ``TEMPLATE``
line or an explicit circuit.
"""
import re
from dataclasses import dataclass, field

import numpy as np

from .devices import Device, build_template
from .elements import PumpTone, SquidSpec
from .errors import (DuplicateName, MalformedNumber, NetlistError, UnknownDirective, UnresolvedNodeRef,
                     ValidationError)
from .mna import CAPACITOR, INDUCTOR, JINVERTER, RESISTOR, SQUID, DeviceGraph, Element, Port

SI = {"f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "m": 1e-3, "k": 1e3, "M": 1e6, "G": 1e9}
_NUMBER = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([fpnumkMG]?)$")
DIRECTIVES = ("NODE", "CAP", "IND", "SQUID", "PUMP", "JINV", "RES", "PORT", "GRID", "TEMPLATE")


def parse_number(text, lineno=None):
    """``'257f'`` -> 2.57e-13.  Raises :class:`MalformedNumber`."""
    m = _NUMBER.match(text.strip())
    if not m:
        raise MalformedNumber(f"malformed number {text!r}", lineno)
    return float(m.group(1)) * SI.get(m.group(2), 1.0)


def parse_int(text, lineno=None):
    value = parse_number(text, lineno)
    if value != int(value):
        raise MalformedNumber(f"expected an integer, got {text!r}", lineno)
    return int(value)


def parse_phase(text, lineno=None):
    if text.endswith("rad"):
        return parse_number(text[:-3], lineno)
    if text.endswith("deg"):
        text = text[:-3]
    return float(np.radians(parse_number(text, lineno)))


@dataclass(frozen=True)
class GridSettings:
    f_signal: float = None
    f_base: float = None
    k_max: int = None


@dataclass
class Netlist:
    """Parsed netlist: an explicit graph or a template call, plus grid settings."""

    graph: DeviceGraph = None
    template: str = None
    template_args: dict = field(default_factory=dict)
    grid: GridSettings = GridSettings()

    def device(self, f_base=None):
        """The described :class:`~squidfloquet.devices.Device`."""
        if self.template is not None:
            return build_template(self.template, **self.template_args)
        f_base = f_base or self.grid.f_base
        if f_base is None:
            if any(e.value.modulated for e in self.graph.squids()):
                raise ValidationError("a pumped netlist needs GRID fbase=...")
            f_base = 1e9  # irrelevant without pumps
        return Device(self.graph, f_base, "netlist", None, self.graph.ports[0].z0,
                      {"f_center": self.grid.f_signal} if self.grid.f_signal else {})


def _split_kv(tokens, lineno, allowed):
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise NetlistError(f"expected key=value, got {tok!r}", lineno)
        k, v = tok.split("=", 1)
        k = k.lower()
        if k not in allowed:
            raise NetlistError(f"unknown key {k!r}; expected one of {sorted(allowed)}", lineno)
        if k in out:
            raise DuplicateName(f"key {k!r} given twice", lineno)
        out[k] = v
    return out


def _need(tokens, n, lineno, usage):
    if len(tokens) < n:
        raise NetlistError(f"too few fields; usage: {usage}", lineno)


def parse_netlist(text):
    """Parse netlist text into a :class:`Netlist`.

    Errors carry the 1-based line number of the offending line.
    """
    nodes, node_set = [], set()
    elements, names = [], {}
    squids = {}  # name -> [SquidSpec fields, pump list, position in elements]
    ports = {}
    grid = GridSettings()
    template, template_args, template_line = None, {}, None
    explicit_line = None

    def node_ref(name, lineno):
        if name not in node_set:
            raise UnresolvedNodeRef(f"node {name!r} is not declared", lineno)
        return name

    def new_name(name, lineno):
        if name in names:
            raise DuplicateName(f"name {name!r} already used on line {names[name]}", lineno)
        names[name] = lineno

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kw = tokens[0].upper()
        args = tokens[1:]
        if kw not in DIRECTIVES:
            raise UnknownDirective(f"unknown directive {tokens[0]!r}", lineno)
        if kw not in ("GRID", "TEMPLATE") and explicit_line is None:
            explicit_line = lineno
        if kw == "NODE":
            _need(args, 1, lineno, "NODE <name>")
            for name in args:
                if name in node_set:
                    raise DuplicateName(f"node {name!r} declared twice", lineno)
                node_set.add(name)
                nodes.append(name)
        elif kw == "CAP":
            _need(args, 3, lineno, "CAP <name> <node> [<node>] <farads>")
            if len(args) > 4:
                raise NetlistError("too many fields for CAP", lineno)
            new_name(args[0], lineno)
            a = node_ref(args[1], lineno)
            b = node_ref(args[2], lineno) if len(args) == 4 else None
            elements.append(Element(CAPACITOR, args[0], a, b, parse_number(args[-1], lineno)))
        elif kw in ("IND", "RES"):
            _need(args, 3, lineno, f"{kw} <name> <node> <value>")
            new_name(args[0], lineno)
            kind = INDUCTOR if kw == "IND" else RESISTOR
            value = parse_number(args[2], lineno)
            if value <= 0:
                raise NetlistError(f"{kw} value must be positive", lineno)
            elements.append(Element(kind, args[0], node_ref(args[1], lineno), None, value))
        elif kw == "SQUID":
            _need(args, 2, lineno, "SQUID <name> <node> ic=<A> stack=<int> dc=<flux>")
            new_name(args[0], lineno)
            kv = _split_kv(args[2:], lineno, {"ic", "stack", "dc"})
            if "ic" not in kv:
                raise NetlistError("SQUID needs ic=", lineno)
            fields_ = (parse_number(kv["ic"], lineno), parse_int(kv.get("stack", "1"), lineno),
                       parse_number(kv.get("dc", "0"), lineno))
            squids[args[0]] = [fields_, [], len(elements), node_ref(args[1], lineno), lineno]
            elements.append(None)  # filled in once all pumps are known
        elif kw == "PUMP":
            _need(args, 2, lineno, "PUMP <squid> amp=<flux> harm=<int> phase=<deg>")
            if args[0] not in squids:
                raise UnresolvedNodeRef(f"PUMP refers to undefined SQUID {args[0]!r}", lineno)
            kv = _split_kv(args[1:], lineno, {"amp", "harm", "phase"})
            try:
                tone = PumpTone(parse_number(kv.get("amp", "0"), lineno), parse_int(kv.get("harm", "1"), lineno),
                                parse_phase(kv.get("phase", "0"), lineno))
            except NetlistError:
                raise
            except ValidationError as exc:
                raise NetlistError(str(exc), lineno) from exc
            squids[args[0]][1].append(tone)
        elif kw == "JINV":
            _need(args, 4, lineno, "JINV <name> <nodeA> <nodeB> j=<S>")
            new_name(args[0], lineno)
            kv = _split_kv(args[3:], lineno, {"j", "sign"})
            if "j" not in kv:
                raise NetlistError("JINV needs j=", lineno)
            try:
                elements.append(Element(JINVERTER, args[0], node_ref(args[1], lineno), node_ref(args[2], lineno),
                                        parse_number(kv["j"], lineno), parse_int(kv.get("sign", "1"), lineno)))
            except NetlistError:
                raise
            except ValidationError as exc:
                raise NetlistError(str(exc), lineno) from exc
        elif kw == "PORT":
            _need(args, 2, lineno, "PORT <n> <node> z0=<ohms>")
            n = parse_int(args[0], lineno)
            if n in ports:
                raise DuplicateName(f"port {n} defined twice", lineno)
            kv = _split_kv(args[2:], lineno, {"z0"})
            try:
                ports[n] = Port(node_ref(args[1], lineno), parse_number(kv.get("z0", "50"), lineno))
            except NetlistError:
                raise
            except ValidationError as exc:
                raise NetlistError(str(exc), lineno) from exc
        elif kw == "GRID":
            kv = _split_kv(args, lineno, {"fsig", "fbase", "k"})
            grid = GridSettings(
                parse_number(kv["fsig"], lineno) if "fsig" in kv else grid.f_signal,
                parse_number(kv["fbase"], lineno) if "fbase" in kv else grid.f_base,
                parse_int(kv["k"], lineno) if "k" in kv else grid.k_max)
        elif kw == "TEMPLATE":
            _need(args, 1, lineno, "TEMPLATE <name> key=value ...")
            if template is not None:
                raise DuplicateName("only one TEMPLATE line is allowed", lineno)
            template, template_line = args[0], lineno
            for tok in args[1:]:
                if "=" not in tok:
                    raise NetlistError(f"expected key=value, got {tok!r}", lineno)
                k, v = tok.split("=", 1)
                if k in template_args:
                    raise DuplicateName(f"key {k!r} given twice", lineno)
                template_args[k] = parse_number(v, lineno)

    if template is not None:
        if explicit_line is not None:
            raise NetlistError("a netlist holds either a TEMPLATE or explicit elements, not both",
                               max(template_line, explicit_line))
        try:
            build_template(template, **template_args)
        except ValidationError as exc:
            raise NetlistError(str(exc), template_line) from exc
        return Netlist(None, template, template_args, grid)

    for name, (fields_, pumps, pos, node, lineno) in squids.items():
        try:
            spec = SquidSpec(fields_[0], fields_[1], fields_[2], tuple(pumps))
        except ValidationError as exc:
            raise NetlistError(str(exc), lineno) from exc
        elements[pos] = Element(SQUID, name, node, None, spec)
    if not ports:
        raise NetlistError("netlist defines no PORT")
    order = sorted(ports)
    if order != list(range(1, len(order) + 1)):
        raise NetlistError(f"ports must be numbered 1..N, got {order}")
    try:
        graph = DeviceGraph(nodes, elements, [ports[n] for n in order])
    except ValidationError as exc:
        raise NetlistError(str(exc)) from exc
    return Netlist(graph, None, {}, grid)


def _num(x):
    return repr(float(x))


def emit_netlist(net):
    """Canonical text for a :class:`Netlist`; ``parse_netlist`` inverts it exactly."""
    lines = []
    g = net.grid
    kv = []
    if g.f_signal is not None:
        kv.append(f"fsig={_num(g.f_signal)}")
    if g.f_base is not None:
        kv.append(f"fbase={_num(g.f_base)}")
    if g.k_max is not None:
        kv.append(f"k={g.k_max}")
    if kv:
        lines.append("GRID " + " ".join(kv))
    if net.template is not None:
        args = " ".join(f"{k}={_num(v)}" for k, v in net.template_args.items())
        lines.append(f"TEMPLATE {net.template} {args}".rstrip())
        return "\n".join(lines) + "\n"
    graph = net.graph
    for n in graph.nodes:
        lines.append(f"NODE {n}")
    for e in graph.elements:
        if e.kind == CAPACITOR:
            nodes = e.a if e.b is None else f"{e.a} {e.b}"
            lines.append(f"CAP {e.name} {nodes} {_num(e.value)}")
        elif e.kind == INDUCTOR:
            lines.append(f"IND {e.name} {e.a} {_num(e.value)}")
        elif e.kind == RESISTOR:
            lines.append(f"RES {e.name} {e.a} {_num(e.value)}")
        elif e.kind == JINVERTER:
            sign = "" if e.sign == 1 else f" sign={e.sign}"
            lines.append(f"JINV {e.name} {e.a} {e.b} j={_num(e.value)}{sign}")
        elif e.kind == SQUID:
            s = e.value
            if e.b is not None:
                raise ValidationError("netlists describe SQUIDs to ground only")
            lines.append(f"SQUID {e.name} {e.a} ic={_num(s.i_c)} stack={s.n_stack} dc={_num(s.phi_dc)}")
            for p in s.pumps:
                lines.append(f"PUMP {e.name} amp={_num(p.amplitude)} harm={p.harmonic} phase={_num(p.phase)}rad")
    for i, p in enumerate(graph.ports, start=1):
        lines.append(f"PORT {i} {p.node} z0={_num(p.z0)}")
    return "\n".join(lines) + "\n"


def netlist_from_device(device, grid=None):
    """Explicit netlist of a device's graph (template provenance is dropped)."""
    return Netlist(device.graph, None, {}, grid or GridSettings(device.meta.get("f_center"), device.f_base, None))
