"""Time-domain reference solver.

The network is integrated directly in time with the exact periodic inverse
inductance of every SQUID stack, ``i(t) = L(t)^-1 * flux(t)``, and the
steady-state port voltages are projected onto the harmonic ladder.  Nothing
here shares code with the spectral engines beyond the device description,
which makes it a genuine cross-check.

Node equations::

    C dv/dt = -G v - A i_L + i_src(t)
    d(flux)/dt = A^T v,    i_L = Gamma(t) flux

``A`` is the node/branch incidence of the inductive branches.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .devices import Device, realize_inverters
from .errors import IllConditionedProjection, NoSteadyState, UnsupportedElement, ValidationError, ZeroFrequencyOnGrid
from .mna import CAPACITOR, INDUCTOR, JINVERTER, RESISTOR, SQUID
from .spectral import build_grid


@dataclass
class StateSpaceLtv:
    """Linear periodically time-varying nodal model of a device.

    The state is ``[v, w_ref * flux]``: node voltages followed by the
    scaled flux of each inductive branch.
    """

    node_names: tuple
    cmat: np.ndarray
    gmat: np.ndarray
    incidence: np.ndarray
    branches: tuple  # SquidSpec or fixed inverse inductance per branch
    f_base: float
    port_nodes: tuple
    z0: tuple
    omega_ref: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        try:
            self.cinv = np.linalg.inv(self.cmat)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("capacitance matrix is singular; every node needs capacitance") from exc
        if np.any(np.linalg.eigvalsh(0.5 * (self.cmat + self.cmat.T)) <= 0):
            raise ValidationError("capacitance matrix is not positive definite")
        self._fixed = np.array([0.0 if hasattr(b, "inverse_inductance") else b for b in self.branches])
        self._pumped = [i for i, b in enumerate(self.branches) if hasattr(b, "inverse_inductance")]

    @property
    def n_nodes(self):
        return len(self.node_names)

    @property
    def n_states(self):
        return self.n_nodes + len(self.branches)

    def inverse_inductances(self, t):
        gam = self._fixed.copy()
        for i in self._pumped:
            gam[i] = self.branches[i].inverse_inductance(t, self.f_base)
        return gam

    def system_matrix(self, t):
        """``A(t)`` of ``dx/dt = A(t) x + B u(t)``."""
        n, m = self.n_nodes, len(self.branches)
        a = np.zeros((n + m, n + m))
        a[:n, :n] = -self.cinv @ self.gmat
        a[:n, n:] = -self.cinv @ self.incidence * (self.inverse_inductances(t) / self.omega_ref)
        a[n:, :n] = self.omega_ref * self.incidence.T
        return a

    def input_vector(self, port):
        """``B`` column for a unit source voltage behind port ``port`` (1-based)."""
        b = np.zeros(self.n_states)
        i = self.node_names.index(self.port_nodes[port - 1])
        b[:self.n_nodes] = self.cinv[:, i] / self.z0[port - 1]
        return b


def build_state_space(device, realization="capacitive", f_center=None):
    """Assemble the time-domain model of a :class:`~squidfloquet.devices.Device`.

    Ideal inverters have no causal time-domain form, so they are first
    replaced by their capacitive realization at ``f_center`` (default: the
    device's centre frequency).  The realization used is recorded in
    ``meta``; compare against the spectral engines on ``meta['device']``.
    """
    graph = device.graph
    if any(e.kind == JINVERTER for e in graph.elements):
        if realization != "capacitive":
            raise UnsupportedElement("ideal inverters need the capacitive realization in the time domain")
        f_center = f_center or device.meta.get("f_center")
        if f_center is None:
            raise ValidationError("a centre frequency is needed to realize the inverters")
        graph = realize_inverters(graph, f_center)
    idx = graph.node_index()
    n = len(idx)
    cmat = np.zeros((n, n))
    gmat = np.zeros((n, n))
    cols, branches = [], []

    def two_terminal(mat, e, val):
        ia = idx[e.a]
        mat[ia, ia] += val
        if e.b is not None:
            ib = idx[e.b]
            mat[ib, ib] += val
            mat[ia, ib] -= val
            mat[ib, ia] -= val

    for e in graph.elements:
        if e.kind == CAPACITOR:
            two_terminal(cmat, e, e.value)
        elif e.kind == RESISTOR:
            two_terminal(gmat, e, 1.0 / e.value)
        elif e.kind in (SQUID, INDUCTOR):
            col = np.zeros(n)
            col[idx[e.a]] = 1.0
            if e.b is not None:
                col[idx[e.b]] = -1.0
            cols.append(col)
            branches.append(e.value if e.kind == SQUID else 1.0 / e.value)
        else:
            raise UnsupportedElement(f"no time-domain model for {e.kind} {e.name}")
    for p in graph.ports:
        gmat[idx[p.node], idx[p.node]] += 1.0 / p.z0
    incidence = np.array(cols).T if cols else np.zeros((n, 0))
    w_ref = 2 * np.pi * (f_center or device.meta.get("f_center") or device.f_base)
    realized = Device(graph, device.f_base, device.name, None, device.z0, dict(device.meta))
    return StateSpaceLtv(tuple(graph.nodes), cmat, gmat, incidence, tuple(branches), device.f_base,
                         tuple(p.node for p in graph.ports), tuple(p.z0 for p in graph.ports), w_ref,
                         {"realization": graph.meta.get("realization", "none"), "device": realized})


def extract_harmonics(t, waveform, frequencies, max_condition=1e8):
    """Least-squares phasors ``V_k`` with ``y(t) = sum_k Re(V_k exp(j 2 pi f_k t))``.

    ``waveform`` may be ``(n_samples,)`` or ``(n_samples, n_signals)``;
    the result has one row per frequency.  Frequencies may be negative; a
    pair ``f`` and ``-f`` cannot be told apart and is reported as
    ill-conditioned, as is any pair closer than the window resolves.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(frequencies, dtype=float)
    arg = 2 * np.pi * np.multiply.outer(t - t[0], f)
    basis = np.hstack([np.cos(arg), np.sin(arg)])
    cond = np.linalg.cond(basis)
    if not np.isfinite(cond) or cond > max_condition:
        raise IllConditionedProjection(
            f"projection basis condition {cond:.3g}: grid tones are not resolved by a {t[-1] - t[0]:.3g} s window")
    coef, *_ = np.linalg.lstsq(basis, np.asarray(waveform, dtype=float), rcond=None)
    nf = len(f)
    phase = np.exp(-2j * np.pi * f * t[0])
    if coef.ndim == 2:
        phase = phase[:, None]
    # Re(V e^{jwt}) = Re(V) cos - Im(V) sin, and shift the window origin back to t = 0
    return (coef[:nf] - 1j * coef[nf:]) * phase


@dataclass
class SteadyState:
    """Result of a driven integration."""

    grid: object
    port_phasors: np.ndarray  # (n_ports, dim) complex node voltages at the ports
    periods: int
    history: list
    t: np.ndarray
    v: np.ndarray

    def outgoing_waves(self, ss, port_in, amplitude=1.0, k_in=0):
        """``b`` waves per (port, harmonic) for incident wave ``amplitude`` at ``port_in``."""
        z0 = np.asarray(ss.z0)[:, None]
        b = self.port_phasors / np.sqrt(z0)
        b[port_in - 1, self.grid.index(k_in)] -= amplitude
        return b


def _projection_grid(grid, guard):
    """Grid widened by up to ``guard`` harmonics so that tones just outside
    the reported range do not leak into the fit."""
    for g in range(guard, 0, -1):
        try:
            wide = build_grid(grid.f_signal, grid.f_base, grid.k_max + g)
        except ZeroFrequencyOnGrid:
            continue
        f = np.sort(np.abs(wide.frequencies))
        if np.min(np.diff(f)) > 1e-3 * grid.f_base:
            return wide
    return grid


def integrate_to_steady_state(ss, grid, port_in=1, k_in=0, amplitude=1.0, tol=1e-3, max_periods=500,
                              windows=2, rtol=1e-10, samples_per_period=12, method="DOP853", guard=4):
    """Drive ``port_in`` with a unit incident wave at ``f_{k_in}`` and run to steady state.

    The network is integrated one base period at a time.  After each period
    the port voltages of the last ``windows`` periods are projected on the
    grid (widened by ``guard`` harmonics on each side, then trimmed);
    integration stops once the projection changes by less than ``tol``
    (relative, whole vector) between consecutive periods.

    Raises
    ------
    NoSteadyState
        If ``max_periods`` base periods pass without convergence.
    """
    if grid.f_base != ss.f_base:
        raise ValidationError("grid base frequency differs from the device modulation frequency")
    f_drive = grid.frequency(k_in)
    w_drive = 2 * np.pi * f_drive
    # incident wave a = amplitude -> Thevenin source 2 a sqrt(z0)
    src = 2 * amplitude * np.sqrt(ss.z0[port_in - 1]) * ss.input_vector(port_in)[:ss.n_nodes]
    n, m = ss.n_nodes, len(ss.branches)
    cg = -ss.cinv @ ss.gmat
    ci = -ss.cinv @ ss.incidence / ss.omega_ref
    inc_t = ss.omega_ref * ss.incidence.T
    pumped = ss._pumped
    fixed = ss._fixed.copy()

    def rhs(t, x):
        v = x[:n]
        gam = fixed.copy()
        for i in pumped:
            gam[i] = ss.branches[i].inverse_inductance(t, ss.f_base)
        dx = np.empty_like(x)
        dx[:n] = cg @ v + ci @ (gam * x[n:]) + src * np.cos(w_drive * t)
        dx[n:] = inc_t @ v
        return dx

    period = 1.0 / ss.f_base
    wide = _projection_grid(grid, guard)
    keep = slice(wide.k_max - grid.k_max, wide.k_max + grid.k_max + 1)
    f_top = np.max(np.abs(wide.frequencies))
    per = max(int(np.ceil(samples_per_period * f_top * period)), 64)
    port_idx = [ss.node_names.index(p) for p in ss.port_nodes]
    x = np.zeros(n + m)
    ts, vs = [], []
    history = []
    prev = None
    freqs = wide.frequencies
    for count in range(1, max_periods + 1):
        t0, t1 = (count - 1) * period, count * period
        tt = t0 + np.arange(per + 1) * (period / per)
        tt[-1] = t1  # keep rounding inside the span
        sol = solve_ivp(rhs, (t0, t1), x, method=method, rtol=rtol, atol=1e-12, t_eval=tt)
        if not sol.success:
            raise NoSteadyState(f"integrator failed: {sol.message}")
        ts.append(tt[:-1])
        vs.append(sol.y[port_idx, :-1].T)
        x = sol.y[:, -1]
        ts, vs = ts[-windows:], vs[-windows:]
        if len(ts) < windows:
            continue
        ph = extract_harmonics(np.concatenate(ts), np.concatenate(vs), freqs)[keep]
        if prev is not None:
            change = np.linalg.norm(ph - prev) / max(np.linalg.norm(ph), 1e-300)
            history.append(change)
            if change < tol:
                return SteadyState(grid, ph.T, count, history, np.concatenate(ts), np.concatenate(vs))
        prev = ph
    raise NoSteadyState(f"no steady state within {max_periods} base periods (last change "
                        f"{history[-1] if history else float('nan'):.3g})")


def oracle_column(device, f_signal, k_max, port_in=1, k_in=0, tol=1e-6, **options):
    """Time-domain ``S(:, :; port_in, k_in)`` and the realized device it used."""
    ss = build_state_space(device)
    grid = build_grid(f_signal, device.f_base, k_max)
    st = integrate_to_steady_state(ss, grid, port_in, k_in, tol=tol, **options)
    return st.outgoing_waves(ss, port_in, 1.0, k_in), ss.meta["device"], st


def compare(device, f_signal, k_max=4, port_in=1, mode="exact", floor_db=-40.0, tol=1e-6, **options):
    """Per-harmonic comparison table of time-domain and spectral results.

    The spectral solve runs on the very network handed to the integrator.
    Returns a list of dict rows with the port, harmonic, both magnitudes in
    dB, their difference and whether the row is above ``floor_db``
    relative to the strongest output.
    """
    b_td, realized, st = oracle_column(device, f_signal, k_max, port_in, tol=tol, **options)
    s = realized.s_matrix(f_signal, k_max, mode, engine="mna")
    d = s.grid.dim
    col = (port_in - 1) * d + s.grid.index(0)
    b_fd = s.data[:, col].reshape(s.n_ports, d)
    ref = np.abs(b_fd).max()
    rows = []
    for p in range(s.n_ports):
        for k in s.grid.harmonics:
            i = s.grid.index(k)
            td, fd = abs(b_td[p, i]), abs(b_fd[p, i])
            rel = abs(td - fd) / fd if fd > 0 else np.inf
            rows.append({
                "port_out": p + 1, "port_in": port_in, "k": int(k), "f_Hz": float(s.grid.frequency(k)),
                "td_db": 20 * np.log10(max(td, 1e-300)), "fd_db": 20 * np.log10(max(fd, 1e-300)),
                "rel_error": float(rel), "db_error": float(abs(20 * np.log10(max(td, 1e-300) / max(fd, 1e-300)))),
                "significant": bool(fd >= ref * 10 ** (floor_db / 20)),
            })
    return rows, st
