"""Parameter sweeps, frequency responses and modulation optimization.

All metrics are read from the harmonic-(0,0) entries of the Floquet
S-matrix, in dB of wave amplitude:

``IL_fwd``          ``-|S_fwd|``, forward insertion loss
``ISO_rev``         ``-|S_rev|``, reverse isolation
``RL``              ``-|S_in,in|``, input return loss
``gain``            ``|S_fwd|``
``directionality``  ``|S_fwd| - |S_rev|``

The forward pair is ``ports = (p_out, p_in)`` (default ``(2, 1)``) and the
reverse pair swaps them.
"""
import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize

from .devices import build, set_param, template_params
from .errors import (NoImprovement, SingularSystem, SolverError, SquidFloquetError, ValidationError,
                     ZeroFrequencyOnGrid)

METRICS = ("IL_fwd", "ISO_rev", "RL", "gain", "directionality")

#: Largest change (dB) of any reported metric between K and K+2.
K_TOLERANCE_DB = 0.05


def _db(x):
    return 20 * np.log10(max(abs(x), 1e-300))


def device_s(device, f, k_max, mode):
    """S-matrix at ``f``; nudged by 1e-6 f_base if a harmonic hits DC."""
    try:
        return device.s_matrix(f, k_max, mode)
    except ZeroFrequencyOnGrid:
        return device.s_matrix(f + 1e-6 * device.f_base, k_max, mode)


def metrics_from_s(s, ports=(2, 1), names=METRICS):
    po, pi = ports
    fwd, rev, refl = _db(s(po, pi)), _db(s(pi, po)), _db(s(pi, pi))
    table = {"IL_fwd": -fwd, "ISO_rev": -rev, "RL": -refl, "gain": fwd, "directionality": fwd - rev}
    unknown = set(names) - set(table)
    if unknown:
        raise ValidationError(f"unknown metrics {sorted(unknown)}; choose from {METRICS}")
    return {n: table[n] for n in names}


def band_center(device, ports=(2, 1), span=0.4, points=401, drop_db=1.0):
    """Centre and width of the static passband around the device's nominal centre.

    The pumps are removed, ``|S_fwd|`` is scanned over ``f_c * (1 +- span)``
    and the band is the contiguous region within ``drop_db`` of the peak;
    its edges are refined with a root finder.  Results are cached on the
    static network, so modulation sweeps pay for the scan once.
    """
    fc = device.meta.get("f_center")
    if fc is None:
        raise ValidationError("device has no nominal centre frequency")
    # the base frequency is irrelevant without pumps; pin it so the cache hits
    static = replace(device.static(), f_base=1e9, name="static", meta={})
    return _static_band(static, float(fc), tuple(ports), span, points, drop_db)


@lru_cache(maxsize=512)
def _static_band(device, fc, ports, span, points, drop_db):
    po, pi = ports

    def level(f):
        try:
            return _db(device.s_matrix(f, 0)(po, pi))
        except SingularSystem:
            # lossless degenerate modes sit exactly on some frequencies
            return _db(device.s_matrix(f * (1 + 1e-9), 0)(po, pi))

    fs = np.linspace(fc * (1 - span), fc * (1 + span), points)
    vals = np.array([level(f) for f in fs])
    top = int(np.argmax(vals))
    floor = vals[top] - drop_db
    lo = top
    while lo > 0 and vals[lo - 1] >= floor:
        lo -= 1
    hi = top
    while hi < points - 1 and vals[hi + 1] >= floor:
        hi += 1
    f_lo = brentq(lambda f: level(f) - floor, fs[lo - 1], fs[lo]) if lo > 0 else fs[0]
    f_hi = brentq(lambda f: level(f) - floor, fs[hi], fs[hi + 1]) if hi < points - 1 else fs[-1]
    return 0.5 * (f_lo + f_hi), f_hi - f_lo


def evaluate(params, names=("IL_fwd", "ISO_rev"), frequency="center", k_max=6, mode="exact", ports=(2, 1)):
    """Metrics of one parameter set; ``frequency`` is Hz or ``"center"``."""
    device = build(params)
    f = band_center(device, ports)[0] if frequency == "center" else float(frequency)
    return metrics_from_s(device_s(device, f, k_max, mode), ports, names), f


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ValidationError(f"axis {self.name} needs at least 2 points")

    @property
    def values(self):
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """One- or two-axis sweep over template parameters.

    ``template`` is a registry name or a parameter object; ``fixed`` holds
    overrides applied before the axes.  The second axis varies fastest.
    """

    template: object
    axes: tuple
    metrics: tuple = ("IL_fwd", "ISO_rev")
    frequency: object = "center"
    k_max: int = 6
    mode: str = "exact"
    ports: tuple = (2, 1)
    fixed: dict = field(default_factory=dict)
    check_convergence: bool = True
    k_limit: int = None

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 2:
            raise ValidationError("a sweep has one or two axes")
        unknown = set(self.metrics) - set(METRICS)
        if unknown:
            raise ValidationError(f"unknown metrics {sorted(unknown)}")

    def base_params(self):
        if isinstance(self.template, str):
            params = template_params(self.template)
        else:
            params = self.template
        for k, v in self.fixed.items():
            params = set_param(params, k, v)
        return params

    def points(self):
        grids = np.meshgrid(*[a.values for a in self.axes], indexing="ij")
        return [tuple(float(g.flat[i]) for g in grids) for i in range(grids[0].size)]


@dataclass
class SweepTable:
    columns: list
    rows: list
    k_used: int
    converged: bool

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([format_value(c, row[c]) for c in self.columns])
        return buf.getvalue()

    def to_json(self):
        return json.dumps([{c: json_value(c, r[c]) for c in self.columns} for r in self.rows], indent=1)

    def column(self, name):
        return np.array([np.nan if r[name] is None else r[name] for r in self.rows], dtype=float)


DB_COLUMNS = set(METRICS)


def format_value(name, value):
    if value is None or (isinstance(value, float) and not np.isfinite(value)):
        return ""
    if isinstance(value, str):
        return value
    if name in DB_COLUMNS or name.endswith("_dB") or name.endswith("_deg"):
        return f"{value:.4f}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{value:.10g}"


def json_value(name, value):
    text = format_value(name, value)
    if text == "":
        return None
    if isinstance(value, str):
        return value
    try:
        return int(text)
    except ValueError:
        return float(text)


def _sweep_point(args):
    spec, point, k_max = args
    params = spec.base_params()
    try:
        for axis, value in zip(spec.axes, point):
            params = set_param(params, axis.name, value)
        values, f = evaluate(params, spec.metrics, spec.frequency, k_max, spec.mode, spec.ports)
        return values, f
    except SquidFloquetError:
        return None, None


def _run_once(spec, k_max, jobs):
    tasks = [(spec, p, k_max) for p in spec.points()]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    return results


def run_sweep(spec, jobs=1):
    """Evaluate every grid point; failures become empty cells.

    With ``check_convergence`` the table is recomputed at ``K + 2`` and K
    keeps rising by 2 until no metric moves more than 0.05 dB or
    ``k_limit`` (default ``3 K``) is hit.
    """
    k = spec.k_max
    limit = spec.k_limit or 3 * max(k, 1)
    results = _run_once(spec, k, jobs)
    converged = not spec.check_convergence
    while spec.check_convergence:
        finer = _run_once(spec, k + 2, jobs)
        if _max_change(results, finer) <= K_TOLERANCE_DB:
            converged = True
            break
        k += 2
        results = finer
        if k >= limit:
            break
    columns = [a.name for a in spec.axes] + ["f_Hz"] + list(spec.metrics)
    rows = []
    for point, (values, f) in zip(spec.points(), results):
        row = dict(zip([a.name for a in spec.axes], point))
        row["f_Hz"] = f
        for m in spec.metrics:
            row[m] = None if values is None else float(values[m])
        rows.append(row)
    return SweepTable(columns, rows, k, converged)


def _max_change(a, b):
    worst = 0.0
    for (va, _), (vb, _) in zip(a, b):
        if va is None or vb is None:
            continue
        for key in va:
            worst = max(worst, abs(va[key] - vb[key]))
    return worst


def contiguous_runs(values, mask):
    """Spans ``(start, stop)`` of ``values`` over consecutive True entries."""
    runs, start = [], None
    for i, ok in enumerate(mask):
        if ok and start is None:
            start = i
        if not ok and start is not None:
            runs.append((values[start], values[i - 1]))
            start = None
    if start is not None:
        runs.append((values[start], values[len(mask) - 1]))
    return runs


def best_point(table, iso_floor, il="IL_fwd", iso="ISO_rev", tie="amplitude"):
    """Row with the lowest loss among rows meeting the isolation floor.

    Ties go to the smaller pump amplitude when that column exists.
    """
    ok = [r for r in table.rows if r[iso] is not None and r[iso] >= iso_floor]
    if not ok:
        return None
    return min(ok, key=lambda r: (r[il], r.get(tie, 0.0)))


# ---------------------------------------------------------------------------
# optimization

@dataclass(frozen=True)
class ObjectiveSpec:
    """``il_weight * IL_fwd + iso_weight * max(0, iso_target - ISO_rev)``.

    ``bounds`` maps parameter names (template fields, ``phi_dc``,
    ``theta_deg`` or ``f_signal``) to ``(lo, hi)``.  ``gain_cap`` stops a
    gain-seeking objective from chasing the oscillation threshold, and a
    positive ``bandwidth_weight`` adds the mean insertion loss at
    ``f +- bandwidth / 2``.
    """

    bounds: dict
    iso_target: float = 20.0
    il_weight: float = 1.0
    iso_weight: float = 10.0
    gain_cap: float = None
    bandwidth: float = 0.0
    bandwidth_weight: float = 0.0
    frequency: object = "center"
    ports: tuple = (2, 1)

    def __post_init__(self):
        if min(self.il_weight, self.iso_weight, self.bandwidth_weight) < 0:
            raise ValidationError("objective weights must be non-negative")
        for name, (lo, hi) in self.bounds.items():
            if not lo < hi:
                raise ValidationError(f"bound for {name} is empty: ({lo}, {hi})")


@dataclass
class OptimizeResult:
    params: dict
    device_params: object
    metrics: dict
    objective: float
    start_objective: float
    trace: list
    evaluations: int
    k_used: int
    frequency: float


PENALTY = 1e6


class _Problem:
    def __init__(self, base, objective, k_max, mode):
        self.base = base
        self.obj = objective
        self.k_max = k_max
        self.mode = mode
        self.names = list(objective.bounds)
        self.lo = np.array([objective.bounds[n][0] for n in self.names], dtype=float)
        self.hi = np.array([objective.bounds[n][1] for n in self.names], dtype=float)
        self.count = 0
        self.trace = []
        self.best = np.inf

    def decode(self, u):
        return dict(zip(self.names, self.lo + np.clip(u, 0, 1) * (self.hi - self.lo)))

    def encode(self, values):
        x = np.array([values[n] for n in self.names], dtype=float)
        return (x - self.lo) / (self.hi - self.lo)

    def configure(self, values):
        params = self.base
        f = self.obj.frequency
        for name, v in values.items():
            if name == "f_signal":
                f = v
            else:
                params = set_param(params, name, v)
        return params, f

    def metrics(self, values, k_max=None):
        params, f = self.configure(values)
        device = build(params)
        if f == "center":
            f = band_center(device, self.obj.ports)[0]
        s = device_s(device, f, k_max or self.k_max, self.mode)
        out = metrics_from_s(s, self.obj.ports, METRICS)
        if self.obj.bandwidth_weight > 0 and self.obj.bandwidth > 0:
            edge = [metrics_from_s(device_s(device, f + d, k_max or self.k_max, self.mode), self.obj.ports)["IL_fwd"]
                    for d in (-self.obj.bandwidth / 2, self.obj.bandwidth / 2)]
            out["IL_band"] = float(np.mean(edge))
        return out, params, f

    def score(self, m):
        il = m["IL_fwd"]
        if self.obj.gain_cap is not None:
            il = max(il, -self.obj.gain_cap)
        val = self.obj.il_weight * il + self.obj.iso_weight * max(0.0, self.obj.iso_target - m["ISO_rev"])
        if "IL_band" in m:
            val += self.obj.bandwidth_weight * m["IL_band"]
        return float(val)

    def __call__(self, u):
        self.count += 1
        try:
            val = self.score(self.metrics(self.decode(u))[0])
        except (ValidationError, SolverError):
            val = PENALTY
        if val < self.best:
            self.best = val
            self.trace.append((self.count, val))
        return val


def optimize(template, objective, start, k_max=6, mode="exact", restarts=3, seed=0, maxiter=300, k_limit=None):
    """Bounded Nelder-Mead search with seeded restarts.

    Parameters are scaled to the unit box given by ``objective.bounds``.
    Each restart begins at the best point so far, jittered by a Gaussian of
    width 0.1 (box units).  The optimum is re-scored at K + 2 and the whole
    search repeats at a higher K while any metric moves more than 0.05 dB.

    Raises
    ------
    NoImprovement
        When no evaluation beat the starting point.
    """
    base = template_params(template) if isinstance(template, str) else template
    missing = set(objective.bounds) - set(start)
    if missing:
        raise ValidationError(f"start point lacks {sorted(missing)}")
    rng = np.random.default_rng(seed)
    limit = k_limit or 3 * max(k_max, 1)
    problem = _Problem(base, objective, k_max, mode)
    u0 = np.clip(problem.encode(start), 0, 1)
    start_value = problem(u0)
    best_u, best_v = u0, start_value
    bounds = [(0.0, 1.0)] * len(u0)
    while True:
        for r in range(restarts + 1):
            x0 = best_u if r == 0 else np.clip(best_u + rng.normal(0, 0.1, len(u0)), 0, 1)
            res = minimize(problem, x0, method="Nelder-Mead", bounds=bounds,
                           options={"maxiter": maxiter, "xatol": 1e-4, "fatol": 1e-5})
            if res.fun < best_v:
                best_u, best_v = np.clip(res.x, 0, 1), float(res.fun)
        if not best_v < start_value:
            raise NoImprovement(f"no point improved on the start objective {start_value:.6g} "
                                f"after {restarts + 1} runs")
        values = problem.decode(best_u)
        m_k, params, f = problem.metrics(values)
        m_next, _, _ = problem.metrics(values, problem.k_max + 2)
        moved = max(abs(m_k[n] - m_next[n]) for n in METRICS)
        if moved <= K_TOLERANCE_DB or problem.k_max >= limit:
            break
        problem.k_max += 2
        best_v = problem(best_u)
    return OptimizeResult({n: float(v) for n, v in values.items()}, params, m_k, best_v, start_value,
                          problem.trace, problem.count, problem.k_max, float(f))


# ---------------------------------------------------------------------------
# frequency responses and output spectra

def frequency_response(device, frequencies, k_max=6, mode="exact"):
    """Rows of ``f_Hz`` and ``|S_ij(0,0)|`` (dB) and phase (deg) for every port pair."""
    n = len(device.graph.ports)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1)]
    columns = ["f_Hz"] + [c for i, j in pairs for c in (f"S{i}{j}_dB", f"S{i}{j}_deg")]
    rows = []
    for f in frequencies:
        row = {"f_Hz": float(f)}
        try:
            s = device_s(device, float(f), k_max, mode)
            for i, j in pairs:
                v = s(i, j)
                row[f"S{i}{j}_dB"] = _db(v)
                row[f"S{i}{j}_deg"] = float(np.degrees(np.angle(v)))
        except SolverError:
            for i, j in pairs:
                row[f"S{i}{j}_dB"] = row[f"S{i}{j}_deg"] = None
        rows.append(row)
    return SweepTable(columns, rows, k_max, True)


def output_spectrum(device, f_signal, port_in=1, k_max=6, mode="exact"):
    """Per-harmonic output power at every port for a unit input at ``port_in``.

    Rows carry ``port``, ``k``, ``f_Hz``, ``power`` (fraction of the
    incident power) and ``power_dB``.
    """
    s = device_s(device, f_signal, k_max, mode)
    powers = s.output_powers(port_in, 0)
    rows = []
    for p in range(s.n_ports):
        for k in s.grid.harmonics:
            pw = float(powers[p, s.grid.index(k)])
            rows.append({"port": p + 1, "k": int(k), "f_Hz": float(s.grid.frequency(k)), "power": pw,
                         "power_dB": 10 * np.log10(max(pw, 1e-300))})
    return SweepTable(["port", "k", "f_Hz", "power", "power_dB"], rows, k_max, True)
