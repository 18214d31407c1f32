"""Block nodal solver for arbitrary resonator networks.

A :class:`DeviceGraph` lists nodes (ground is implicit and spelled
``None``), lumped elements and ports.  :func:`stamp` assembles the nodal
admittance over (node, harmonic) pairs and :func:`solve_floquet_s` turns it
into a Floquet scattering matrix with every port terminated in its own
reference impedance.
"""
from collections import defaultdict, deque
from dataclasses import dataclass, field

import numpy as np

from .elements import (EXACT, SquidSpec, capacitor_spectral_admittance, inductor_spectral_admittance,
                       resistor_spectral_admittance, squid_spectral_admittance)
from .errors import DanglingNode, NonPositiveJ, ValidationError
from .spectral import FloquetSMatrix, block_solve

SQUID = "squid"
CAPACITOR = "capacitor"
RESISTOR = "resistor"
INDUCTOR = "inductor"
JINVERTER = "jinverter"
KINDS = (SQUID, CAPACITOR, RESISTOR, INDUCTOR, JINVERTER)


@dataclass(frozen=True)
class Element:
    """Lumped element between ``a`` and ``b`` (``b=None`` is ground).

    ``value`` is farads, ohms, henries or siemens depending on ``kind``;
    a SQUID carries its :class:`~squidfloquet.elements.SquidSpec` instead.
    """

    kind: str
    name: str
    a: str
    b: str = None
    value: object = None
    sign: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown element kind {self.kind!r}")
        if self.kind == SQUID and not isinstance(self.value, SquidSpec):
            raise ValidationError(f"SQUID {self.name} needs a SquidSpec")
        if self.kind == JINVERTER:
            if self.b is None:
                raise ValidationError(f"inverter {self.name} needs two nodes")
            if not self.value > 0:
                raise NonPositiveJ(f"inverter {self.name} admittance must be positive")
        if self.a == self.b:
            raise ValidationError(f"element {self.name} is shorted on node {self.a}")

    @property
    def nodes(self):
        return tuple(n for n in (self.a, self.b) if n is not None)


@dataclass(frozen=True)
class Port:
    node: str
    z0: float = 50.0

    def __post_init__(self):
        if not self.z0 > 0:
            raise ValidationError(f"port reference impedance must be positive, got {self.z0}")


@dataclass(frozen=True)
class DeviceGraph:
    nodes: tuple
    elements: tuple
    ports: tuple
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "ports", tuple(self.ports))
        self.validate()

    def validate(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValidationError("duplicate node names")
        names = [e.name for e in self.elements]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate element names")
        touched = defaultdict(int)
        adjacency = defaultdict(set)
        for e in self.elements:
            for n in e.nodes:
                if n not in known:
                    raise DanglingNode(f"element {e.name} references unknown node {n!r}")
                touched[n] += 1
            if len(e.nodes) == 2:
                adjacency[e.a].add(e.b)
                adjacency[e.b].add(e.a)
        port_nodes = [p.node for p in self.ports]
        if not port_nodes:
            raise ValidationError("device has no ports")
        if len(set(port_nodes)) != len(port_nodes):
            raise ValidationError("port nodes must be distinct")
        for n in port_nodes:
            if n not in known:
                raise DanglingNode(f"port on unknown node {n!r}")
        for n in self.nodes:
            if not touched[n] and n not in port_nodes:
                raise DanglingNode(f"node {n!r} has no elements attached")
        # every node must be reachable from some port through two-terminal elements
        seen = set(port_nodes)
        queue = deque(port_nodes)
        while queue:
            for m in adjacency[queue.popleft()]:
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        stray = [n for n in self.nodes if n not in seen]
        if stray:
            raise DanglingNode(f"nodes {stray} are not connected to any port")

    def node_index(self):
        return {n: i for i, n in enumerate(self.nodes)}

    def element(self, name):
        for e in self.elements:
            if e.name == name:
                return e
        raise KeyError(name)

    def squids(self):
        return [e for e in self.elements if e.kind == SQUID]

    def replace_elements(self, elements, **meta):
        return DeviceGraph(self.nodes, tuple(elements), self.ports, {**self.meta, **meta})

    def map_squids(self, fn):
        """New device with every SQUID spec replaced by ``fn(element)``."""
        out = []
        for e in self.elements:
            if e.kind == SQUID:
                e = Element(e.kind, e.name, e.a, e.b, fn(e), e.sign)
            out.append(e)
        return self.replace_elements(out)

    @property
    def static(self):
        return not any(e.value.modulated for e in self.squids())


def element_admittance(e, grid, mode=EXACT):
    if e.kind == SQUID:
        return squid_spectral_admittance(e.value, grid, mode)
    if e.kind == CAPACITOR:
        return capacitor_spectral_admittance(e.value, grid)
    if e.kind == RESISTOR:
        return resistor_spectral_admittance(e.value, grid)
    if e.kind == INDUCTOR:
        return inductor_spectral_admittance(e.value, grid)
    raise ValidationError(f"{e.kind} is not a one-port")


def stamp(device, grid, mode=EXACT):
    """Nodal admittance over (node, harmonic), shape ``(n_nodes * dim,) * 2``.

    One-ports add ``+Y`` on their diagonal blocks and ``-Y`` between their
    terminals.  An inverter between ``a`` and ``b`` adds ``-j s_k J`` to
    both off-diagonal blocks, ``s_k`` the sign of the ladder frequency.
    """
    idx = device.node_index()
    d = grid.dim
    y = np.zeros((len(idx) * d, len(idx) * d), dtype=complex)

    def blk(r, c):
        return (slice(r * d, (r + 1) * d), slice(c * d, (c + 1) * d))

    for e in device.elements:
        if e.kind == JINVERTER:
            coupling = np.diag(-1j * e.sign * np.sign(grid.frequencies) * e.value)
            ia, ib = idx[e.a], idx[e.b]
            y[blk(ia, ib)] += coupling
            y[blk(ib, ia)] += coupling
            continue
        ye = element_admittance(e, grid, mode)
        ia = idx[e.a]
        y[blk(ia, ia)] += ye
        if e.b is not None:
            ib = idx[e.b]
            y[blk(ib, ib)] += ye
            y[blk(ia, ib)] -= ye
            y[blk(ib, ia)] -= ye
    return y


def solve_floquet_s(device, grid, mode=EXACT, input_harmonics=None):
    """Floquet S-matrix with all ports terminated in their ``z0``.

    Each column drives one (port, harmonic) with a unit incident wave.  The
    loaded nodal system is solved for every column at once and the port
    voltages are converted to outgoing waves, which is the port-reduced
    (Schur complement) admittance evaluated without inverting the interior
    block on its own.  ``input_harmonics`` limits the driven harmonics;
    undriven columns are left as NaN.
    """
    y = stamp(device, grid, mode)
    idx = device.node_index()
    d = grid.dim
    n_ports = len(device.ports)
    g = np.array([1.0 / p.z0 for p in device.ports])
    for p, gp in zip(device.ports, g):
        i = idx[p.node] * d
        y[i:i + d, i:i + d] += gp * np.eye(d)
    ks = list(grid.harmonics) if input_harmonics is None else list(input_harmonics)
    cols = []
    rhs = np.zeros((y.shape[0], n_ports * len(ks)), dtype=complex)
    for pi, p in enumerate(device.ports):
        for kk, k in enumerate(ks):
            col = pi * len(ks) + kk
            # unit incident wave: Norton current 2 a / sqrt(z0)
            rhs[idx[p.node] * d + grid.index(k), col] = 2.0 * np.sqrt(g[pi])
            cols.append(pi * d + grid.index(k))
    v = block_solve(y, rhs)
    rows = np.concatenate([np.arange(idx[p.node] * d, (idx[p.node] + 1) * d) for p in device.ports])
    sqrt_g = np.repeat(np.sqrt(g), d)
    b = v[rows] * sqrt_g[:, None]
    data = np.full((n_ports * d, n_ports * d), np.nan, dtype=complex)
    data[:, cols] = b
    data[cols, cols] -= 1.0
    return FloquetSMatrix(grid, data, n_ports)


def port_admittance(device, grid, mode=EXACT):
    """Schur complement of the nodal matrix onto the port nodes."""
    y = stamp(device, grid, mode)
    idx = device.node_index()
    d = grid.dim
    port_rows = np.concatenate([np.arange(idx[p.node] * d, (idx[p.node] + 1) * d) for p in device.ports])
    inner = np.setdiff1d(np.arange(y.shape[0]), port_rows)
    ypp = y[np.ix_(port_rows, port_rows)]
    if not len(inner):
        return ypp
    yii = y[np.ix_(inner, inner)]
    return ypp - y[np.ix_(port_rows, inner)] @ block_solve(yii, y[np.ix_(inner, port_rows)])
