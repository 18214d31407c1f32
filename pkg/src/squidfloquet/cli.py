"""Command-line front end.

Exit status is 0 on success and 1 on invalid input.  Solver failures exit with 2.
Tables go to stdout (or ``--out``); diagnostics go to stderr.

Output schemas (CSV header / JSON keys, identical in both formats):

``analyze``    f_Hz, S{ij}_dB, S{ij}_deg for every port pair
``spectrum``   port, k, f_Hz, power, power_dB
``sweep``      axis names, f_Hz, metric names
``optimize``   bound parameter names, f_Hz, all metrics, objective, k, evaluations
``oracle``     port_out, port_in, k, f_Hz, td_dB, fd_dB, rel_error, error_dB, significant
``templates``  name, description
"""
import argparse
import sys

import numpy as np

from .devices import DESCRIPTIONS, TEMPLATES, build, template_params
from .elements import MODES
from .errors import SolverError, SquidFloquetError, ValidationError
from .netlist import parse_netlist, parse_number
from .sweep import (METRICS, Axis, ObjectiveSpec, SweepSpec, SweepTable, frequency_response, optimize,
                    output_spectrum, run_sweep)
from .tdoracle import compare

GLOBAL_DEFAULTS = {"mode": "exact", "k": None, "out": None, "format": "csv", "seed": 0, "jobs": 1}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def _add_globals(p):
    s = argparse.SUPPRESS
    p.add_argument("--mode", choices=MODES, default=s, help="SQUID spectral model (default exact)")
    p.add_argument("--k", type=int, default=s, help="harmonic truncation K (2K+1 harmonics)")
    p.add_argument("--out", default=s, help="write the table here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=s)
    p.add_argument("--seed", type=int, default=s, help="optimizer restart seed")
    p.add_argument("--jobs", type=int, default=s, help="worker processes for sweeps")


def _add_device(p):
    p.add_argument("netlist", nargs="?", help="netlist file")
    p.add_argument("-t", "--template", help="template name (see `templates`)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="template parameter override, repeatable")


def build_parser():
    parser = _Parser(prog="squidfloquet", description="Floquet analysis of flux-pumped SQUID resonator networks.")
    _add_globals(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("analyze", help="S-parameters versus frequency")
    _add_device(p)
    p.add_argument("--fstart", type=parse_number)
    p.add_argument("--fstop", type=parse_number)
    p.add_argument("--points", type=int, default=201)

    p = sub.add_parser("spectrum", help="output power per harmonic for one drive frequency")
    _add_device(p)
    p.add_argument("--freq", type=parse_number)
    p.add_argument("--port-in", type=int, default=1)

    p = sub.add_parser("sweep", help="one- or two-axis parameter sweep of a template")
    _add_device(p)
    p.add_argument("--axis", action="append", required=True, metavar="NAME:LO:HI:COUNT")
    p.add_argument("--metrics", default="IL_fwd,ISO_rev", help=f"comma list from {','.join(METRICS)}")
    p.add_argument("--frequency", default="center", help="'center' or a frequency in Hz")
    p.add_argument("--ports", default="2,1", help="forward pair OUT,IN")
    p.add_argument("--no-convergence", action="store_true", help="skip the K -> K+2 gate")

    p = sub.add_parser("optimize", help="bounded simplex search over modulation parameters")
    _add_device(p)
    p.add_argument("--bound", action="append", required=True, metavar="NAME:LO:HI")
    p.add_argument("--start", action="append", default=[], metavar="NAME=VALUE",
                   help="starting value, default the box centre")
    p.add_argument("--iso-target", type=float, default=20.0)
    p.add_argument("--il-weight", type=float, default=1.0)
    p.add_argument("--iso-weight", type=float, default=10.0)
    p.add_argument("--gain-cap", type=float)
    p.add_argument("--bandwidth", type=parse_number, default=0.0)
    p.add_argument("--bandwidth-weight", type=float, default=0.0)
    p.add_argument("--frequency", default="center")
    p.add_argument("--ports", default="2,1")
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--maxiter", type=int, default=300)

    p = sub.add_parser("oracle", help="time-domain versus spectral comparison")
    _add_device(p)
    p.add_argument("--freq", type=parse_number)
    p.add_argument("--port-in", type=int, default=1)
    p.add_argument("--floor-db", type=float, default=-40.0)

    sub.add_parser("templates", help="list device templates")
    for name, sp in sub.choices.items():
        _add_globals(sp)
    return parser


def _overrides(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ValidationError(f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k] = parse_number(v)
    return out


def _source(args):
    """(params or None, device, grid settings) from a netlist or template."""
    overrides = _overrides(args.set)
    if args.netlist and args.template:
        raise ValidationError("give a netlist or --template, not both")
    if args.netlist:
        try:
            with open(args.netlist, encoding="utf-8") as fh:
                net = parse_netlist(fh.read())
        except OSError as exc:
            raise ValidationError(f"cannot read {args.netlist}: {exc.strerror}") from exc
        if net.template is None:
            if overrides:
                raise ValidationError("--set applies to template netlists only")
            return None, net.device(), net.grid
        params = template_params(net.template, **{**net.template_args, **overrides})
        return params, build(params), net.grid
    if not args.template:
        raise ValidationError("no device: give a netlist file or --template NAME")
    params = template_params(args.template, **overrides)
    return params, build(params), None


def _k(args, device, grid):
    if args.k is not None:
        return args.k
    if grid is not None and grid.k_max is not None:
        return grid.k_max
    return device.meta.get("k_default", 6)


def _center(device, grid):
    if grid is not None and grid.f_signal is not None:
        return grid.f_signal
    fc = device.meta.get("f_center")
    if fc is None:
        raise ValidationError("no frequency given and the device has no nominal centre")
    return fc


def _ports(text):
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"expected OUT,IN port numbers, got {text!r}") from None
    return a, b


def _frequency(text):
    return "center" if text == "center" else parse_number(text)


def _axis(text):
    parts = text.split(":")
    if len(parts) != 4:
        raise ValidationError(f"expected NAME:LO:HI:COUNT, got {text!r}")
    return Axis(parts[0], parse_number(parts[1]), parse_number(parts[2]), int(parts[3]))


def _need_params(params, command):
    if params is None:
        raise ValidationError(f"{command} needs a template (use --template or a TEMPLATE netlist)")
    return params


def cmd_analyze(args):
    params, device, grid = _source(args)
    f0, f1 = args.fstart, args.fstop
    if f0 is None or f1 is None:
        fc = _center(device, grid)
        f0 = 0.9 * fc if f0 is None else f0
        f1 = 1.1 * fc if f1 is None else f1
    if not (f1 > f0 > 0) or args.points < 2:
        raise ValidationError("need 0 < fstart < fstop and at least 2 points")
    return frequency_response(device, np.linspace(f0, f1, args.points), _k(args, device, grid), args.mode)


def cmd_spectrum(args):
    params, device, grid = _source(args)
    f = args.freq if args.freq is not None else _center(device, grid)
    return output_spectrum(device, f, args.port_in, _k(args, device, grid), args.mode)


def cmd_sweep(args):
    params, device, grid = _source(args)
    spec = SweepSpec(_need_params(params, "sweep"), [_axis(a) for a in args.axis],
                     tuple(m.strip() for m in args.metrics.split(",")), _frequency(args.frequency),
                     _k(args, device, grid), args.mode, _ports(args.ports),
                     check_convergence=not args.no_convergence)
    table = run_sweep(spec, jobs=args.jobs)
    if not table.converged:
        print(f"warning: metrics still moved more than 0.05 dB at K={table.k_used}", file=sys.stderr)
    return table


def cmd_optimize(args):
    params, device, grid = _source(args)
    bounds = {}
    for item in args.bound:
        parts = item.split(":")
        if len(parts) != 3:
            raise ValidationError(f"expected NAME:LO:HI, got {item!r}")
        bounds[parts[0]] = (parse_number(parts[1]), parse_number(parts[2]))
    start = {n: 0.5 * (lo + hi) for n, (lo, hi) in bounds.items()}
    start.update(_overrides(args.start))
    objective = ObjectiveSpec(bounds, args.iso_target, args.il_weight, args.iso_weight, args.gain_cap,
                              args.bandwidth, args.bandwidth_weight, _frequency(args.frequency), _ports(args.ports))
    res = optimize(_need_params(params, "optimize"), objective, start, _k(args, device, grid), args.mode,
                   restarts=args.restarts, seed=args.seed, maxiter=args.maxiter)
    for count, value in res.trace:
        print(f"trace {count} {value:.6g}", file=sys.stderr)
    row = {**res.params, "f_Hz": res.frequency, **res.metrics, "objective": res.objective, "k": res.k_used,
           "evaluations": res.evaluations}
    return SweepTable(list(row), [row], res.k_used, True)


def cmd_oracle(args):
    params, device, grid = _source(args)
    f = args.freq if args.freq is not None else _center(device, grid)
    k = args.k if args.k is not None else 6
    rows, st = compare(device, f, k, args.port_in, args.mode, args.floor_db)
    out = [{"port_out": r["port_out"], "port_in": r["port_in"], "k": r["k"], "f_Hz": r["f_Hz"],
            "td_dB": r["td_db"], "fd_dB": r["fd_db"], "rel_error": r["rel_error"], "error_dB": r["db_error"],
            "significant": int(r["significant"])} for r in rows]
    worst = max((r["rel_error"] for r in rows if r["significant"]), default=0.0)
    print(f"steady state after {st.periods} periods; worst significant relative error {worst:.3e}",
          file=sys.stderr)
    return SweepTable(list(out[0]), out, k, True)


def cmd_templates(args):
    rows = [{"name": n, "description": DESCRIPTIONS[n]} for n in TEMPLATES]
    return SweepTable(["name", "description"], rows, 0, True)


COMMANDS = {"analyze": cmd_analyze, "spectrum": cmd_spectrum, "sweep": cmd_sweep, "optimize": cmd_optimize,
            "oracle": cmd_oracle, "templates": cmd_templates}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        for key, value in GLOBAL_DEFAULTS.items():
            if not hasattr(args, key):
                setattr(args, key, value)
        table = COMMANDS[args.command](args)
        text = table.to_csv() if args.format == "csv" else table.to_json() + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, SquidFloquetError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
