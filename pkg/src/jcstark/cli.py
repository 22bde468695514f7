"""Command-line front end: every subcommand writes a CSV or JSON data file.

Inputs are dimensionless: ``--omega`` is omega/Omega, ``--g`` is g/g_s with
``g_s = sqrt(omega Omega)/2``, ``--Omega`` sets the energy unit (default 1).
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .ed import (build_hamiltonian, default_truncation, diagonalize, find_crossings,
                 minimum_gap, numeric_texture, perturbative_d, perturbative_gap, sweep)
from .errors import JCStarkError, NumericalError
from .hermite import hermite_roots, oscillator_eval
from .model import ModelParams, eigenstate, ground_state, spectrum
from .phases import AxisSpec, grid_to_csv, grid_to_json, scan_diagram
from .texture import (analytic_texture, asymptotic_ratio, find_nodes,
                      wave_components)
from .vari import ground_order_parameters, stationary_weights, variational_curve
from .winding import winding_all_methods, winding_integral

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
THREADS_ENV = "JCSTARK_THREADS"
DEFAULT_RANGES = {"g": (0.0, 6.0), "omega": (0.05, 1.0), "chi": (-1.0, 1.0)}


class UsageError(Exception):
    pass


# -- argument parsing ---------------------------------------------------------

def _pair(text: str, kind=float) -> tuple:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated values, got {text!r}")
    return tuple(kind(p) for p in parts)


def _int_pair(text: str) -> tuple:
    return _pair(text, int)


def _plane(text: str) -> tuple:
    return _pair(text, str)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _common(parser: argparse.ArgumentParser) -> None:
    m = parser.add_argument_group("model (dimensionless)")
    m.add_argument("--omega", type=float, default=0.5, help="omega / Omega (default 0.5)")
    m.add_argument("--Omega", type=float, default=1.0, help="qubit splitting, the energy unit (default 1)")
    m.add_argument("--g", type=float, default=1.0, help="g / g_s (default 1)")
    m.add_argument("--chi", type=float, default=0.0, help="Stark ratio (default 0)")
    m.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="counter-rotating anisotropy (default 0)")
    o = parser.add_argument_group("run")
    o.add_argument("--config", help="JSON file with option values (unknown keys rejected)")
    o.add_argument("--output", "-o", default="-", help="output file (default stdout)")
    o.add_argument("--format", choices=("csv", "json"), default="csv")
    o.add_argument("--threads", type=int, default=_default_threads(),
                   help=f"worker processes (default ${THREADS_ENV} or 1)")
    o.add_argument("--nmax", type=int, default=None, help="Fock truncation for ED (default 4 n, >= 60)")
    o.add_argument("--seed", type=int, default=0, help="random seed (recorded in the header)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jcstark", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="lowest levels (closed form, or ED when lambda > 0)")
    _common(p)
    p.add_argument("--levels", type=int, default=10)

    p = sub.add_parser("texture", help="spin texture x,sz,sx,density plus node sidecar")
    _common(p)
    _state_options(p)
    p.add_argument("--x-range", type=_pair, default=None, help="xmin,xmax (default +-(sqrt(2n+1)+6))")
    p.add_argument("--points", type=int, default=801)
    p.add_argument("--nodes-output", default=None, help="node sidecar (default <output>.nodes.csv)")
    p.add_argument("--asymptote", action="store_true",
                   help="add exact and asymptotic sz/sx ratio and external angle columns")

    p = sub.add_parser("winding", help="winding number by every method")
    _common(p)
    _state_options(p)

    p = sub.add_parser("phasediagram", help="ground-state n_w grid")
    _common(p)
    p.add_argument("--plane", type=_plane, default=("omega", "g"),
                   help="x,y axes among g, omega, chi (default omega,g)")
    p.add_argument("--x-range", type=_pair, default=None)
    p.add_argument("--y-range", type=_pair, default=None)
    p.add_argument("--steps", type=_int_pair, default=(101, 101), help="nx,ny (default 101,101)")
    p.add_argument("--no-boundaries", action="store_true", help="skip closed-form boundary polylines")

    p = sub.add_parser("gapscan", help="ED excitation gaps vs g with perturbative comparison")
    _common(p)
    p.add_argument("--g-range", type=_pair, default=(0.05, 4.0), help="g/g_s range")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--crossings-output", default=None,
                   help="crossing analysis sidecar (default <output>.crossings.csv)")

    p = sub.add_parser("sweep", help="ED levels along g: g,level,energy,parity,n_w")
    _common(p)
    p.add_argument("--g-range", type=_pair, default=(0.05, 4.0), help="g/g_s range")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--only-level", type=int, default=None, help="keep only this 1-based level")
    p.add_argument("--no-winding", action="store_true")

    p = sub.add_parser("variational", help="variational energy curves")
    _common(p)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--kind", choices=("w", "sigma_x", "n"), default="w")
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--ground", action="store_true",
                   help="instead: ground-state <sigma_x>, <n>, energy along --g-range")
    p.add_argument("--g-range", type=_pair, default=(0.0, 4.0))
    p.add_argument("--steps", type=int, default=401)

    p = sub.add_parser("hermite", help="oscillator functions phi_{n-1}, phi_n and Hermite roots")
    _common(p)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--x-range", type=_pair, default=None)
    p.add_argument("--points", type=int, default=801)
    return parser


def _state_options(p: argparse.ArgumentParser) -> None:
    s = p.add_argument_group("state")
    s.add_argument("--n", type=int, default=1, help="excitation number")
    s.add_argument("--eta", type=int, choices=(-1, 1), default=-1, help="branch")
    s.add_argument("--ground", action="store_true", help="use the ground state")
    s.add_argument("--level", type=int, default=None, help="1-based ED level (lambda > 0)")


def _option_names(parser: argparse.ArgumentParser) -> set[str]:
    return {a.dest for a in parser._actions if a.dest not in ("help", "config", "version")}


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = parser._subparsers._group_actions[0].choices[args.command]
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
        aliases = {"lambda": "lam", "x_range": "x_range", "g_range": "g_range"}
        config = {aliases.get(k, k).replace("-", "_"): v for k, v in config.items()}
        unknown = set(config) - _option_names(sub)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        # command-line values win over the config file
        sub.set_defaults(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in config.items()})
        args = parser.parse_args(argv)
    return args


# -- helpers ------------------------------------------------------------------

def _params(args) -> ModelParams:
    return ModelParams.from_ratios(args.omega, args.g, args.chi, lam=args.lam, Omega=args.Omega)


def _header(args) -> str:
    skip = {"output", "nodes_output", "crossings_output", "config"}
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return "# jcstark " + __version__ + " " + json.dumps(echo, sort_keys=True, default=str) + "\n"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _table_csv(args, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(_header(args))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _table_json(args, columns, rows, extra=None) -> str:
    payload = {"config": {k: v for k, v in vars(args).items() if k != "config"},
               "columns": list(columns),
               "rows": [[(float(v) if isinstance(v, (np.floating,)) else
                          int(v) if isinstance(v, (np.integer,)) else v) for v in row] for row in rows]}
    if extra:
        payload.update(extra)
    return json.dumps(payload, indent=1, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)


def _emit(args, columns, rows, extra=None) -> str:
    if args.format == "json":
        return _table_json(args, columns, rows, extra)
    return _table_csv(args, columns, rows)


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _sidecar(args, explicit, suffix) -> str | None:
    if explicit:
        return explicit
    if args.output != "-":
        root, _ = os.path.splitext(args.output)
        return root + suffix
    return None


def _truncation(args, n_interest: int) -> int:
    return args.nmax if args.nmax is not None else default_truncation(n_interest)


def _select_state(args, params):
    """Closed-form state (lambda = 0) or ED spectrum + level index."""
    if params.lam == 0.0 and args.level is None:
        state = ground_state(params) if args.ground else eigenstate(params, args.n, args.eta)
        return state, None
    level = 1 if args.ground else args.level
    if level is None:
        raise UsageError("lambda > 0 needs --level (1-based ED level) or --ground")
    n_max = _truncation(args, level + 10)
    spec = diagonalize(build_hamiltonian(params, n_max), level)
    return None, (spec, level - 1)


# -- subcommands --------------------------------------------------------------

def cmd_solve(args) -> str:
    params = _params(args)
    columns = ["level", "energy", "n", "eta", "parity"]
    if params.lam == 0.0:
        rows = [(i + 1, lv.energy, lv.n, lv.eta, lv.parity)
                for i, lv in enumerate(spectrum(params, args.levels))]
    else:
        spec = diagonalize(build_hamiltonian(params, _truncation(args, args.levels)), args.levels)
        rows = [(i + 1, e, None, None, int(round(p)))
                for i, (e, p) in enumerate(zip(spec.energies, spec.parities))]
    return _emit(args, columns, rows)


def cmd_texture(args) -> str:
    params = _params(args)
    state, numeric = _select_state(args, params)
    if state is not None:
        texture = analytic_texture(state)
        meta = {"n": state.n, "eta": state.eta, "energy": state.energy}
    else:
        spec, index = numeric
        texture = numeric_texture(spec, index)
        meta = {"level": index + 1, "energy": float(spec.energies[index]),
                "parity": int(round(spec.parities[index]))}
    lo, hi = args.x_range if args.x_range else (-texture.x_max, texture.x_max)
    x = np.linspace(lo, hi, args.points)
    sz, sx = texture.evaluate(x)
    density = texture.density(x)
    angle = texture.angle(x)
    columns = ["x", "sz", "sx", "density", "angle"]
    cols = [x, sz, sx, density, angle]
    if state is not None:
        plus, minus = wave_components(state, "sigma_z").evaluate(x)
        columns += ["psi_plus_z", "psi_minus_z"]
        cols += [plus, minus]
    if args.asymptote:
        if state is None or state.n == 0:
            raise UsageError("--asymptote needs a closed-form state with n >= 1")
        s_z, s_x, _ = texture.scaled(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            exact = s_z / s_x
            asym = asymptotic_ratio(state, x)
        columns += ["ratio_exact", "ratio_asymptotic", "angle_external", "angle_asymptotic"]
        cols += [exact, asym, texture.external_angle(x), np.arctan(asym)]
    rows = list(zip(*cols))
    nodes = find_nodes(texture)
    node_rows = [(pos, axis, sign) for pos, axis, sign in nodes.merged()]
    sidecar = _sidecar(args, args.nodes_output, ".nodes.csv")
    if sidecar and args.format == "csv":
        _write(sidecar, _table_csv(args, ["position", "axis", "sign"], node_rows))
    extra = {"state": meta, "M_z": nodes.M_z, "M_x": nodes.M_x,
             "nodes": [{"position": p, "axis": a, "sign": s} for p, a, s in node_rows]}
    return _emit(args, columns, rows, extra)


def cmd_winding(args) -> str:
    params = _params(args)
    state, numeric = _select_state(args, params)
    if state is not None:
        results = winding_all_methods(state, check=False)
        methods = {name: r.n_w for name, r in results.items()}
        record = {"params": params.as_dict(), "n": state.n, "eta": state.eta,
                  "n_w": results["integral"].n_w, "s_w": results["closed_form"].s_w,
                  "method_agreement": len(set(methods.values())) == 1, "methods": methods}
    else:
        spec, index = numeric
        result = winding_integral(numeric_texture(spec, index))
        record = {"params": params.as_dict(), "level": index + 1, "n": None, "eta": None,
                  "n_w": result.n_w, "parity": int(round(spec.parities[index])),
                  "method_agreement": True, "methods": {"integral": result.n_w}}
    if args.format == "json":
        return json.dumps(record, indent=1) + "\n"
    columns = ["n", "eta", "n_w", "method_agreement"] + [f"n_w_{k}" for k in record["methods"]]
    row = [record["n"], record["eta"], record["n_w"], record["method_agreement"]]
    row += list(record["methods"].values())
    return _table_csv(args, columns, [row])


def cmd_phasediagram(args) -> str:
    x_name, y_name = args.plane
    ranges = {x_name: args.x_range, y_name: args.y_range}
    axes = []
    for name, steps in zip((x_name, y_name), args.steps):
        if name not in DEFAULT_RANGES:
            raise UsageError(f"plane axis must be one of {sorted(DEFAULT_RANGES)}, got {name!r}")
        lo, hi = ranges[name] or DEFAULT_RANGES[name]
        axes.append(AxisSpec(name, lo, hi, steps))
    fixed = {"g": args.g, "omega": args.omega, "chi": args.chi}
    for name in (x_name, y_name):
        fixed.pop(name, None)
    grid = scan_diagram(axes[0], axes[1], fixed, workers=args.threads,
                        boundaries=not args.no_boundaries)
    if args.format == "json":
        return grid_to_json(grid) + "\n"
    return _header(args) + grid_to_csv(grid)


def _gap_row(job):
    params, g, n_max = job
    spec = diagonalize(build_hamiltonian(params.with_(g=g), n_max), 3)
    jc = params.with_(g=g, lam=0.0)
    labels = [(lv.n, lv.eta) for lv in spectrum(jc, 3)]
    (n1, e1), (n2, e2) = labels[1], labels[2]
    pert = perturbative_gap(params.with_(g=g), n1, e1 if n1 else -1, n2, e2 if n2 else -1)
    return (g / params.g_s, spec.energies[1] - spec.energies[0],
            spec.energies[2] - spec.energies[1], pert)


def _map(func, jobs, threads):
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(func, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    return [func(job) for job in jobs]


def crossing_analysis(params: ModelParams, g_lo: float, g_hi: float, n_max: int) -> list[dict]:
    """ED minimum gap vs ``2|d|`` at every lam = 0 crossing among the lowest 3 levels."""
    out = []
    for c in find_crossings(params, g_lo, g_hi, levels=3):
        q = params.with_(g=c.g)
        (n, eta), (m, eta2) = c.below, c.above
        d = perturbative_d(q, n, eta if n else -1, m, eta2 if m else -1)
        half = max(40.0 * abs(d), 1e-4 * c.g)
        try:
            found = minimum_gap(params, c.index, max(1e-12, c.g - half), c.g + half, n_max)
            g_min, gap = found.g, found.gap
        except NumericalError:
            g_min, gap = math.nan, math.nan
        pert = 2.0 * abs(d)
        out.append({"g": c.g / params.g_s, "gap_index": c.index + 1, "lower": list(c.below),
                    "upper": list(c.above), "same_parity": c.same_parity, "d": d,
                    "gap_pert": pert, "ed_min_gap": gap,
                    "ed_g_min": g_min / params.g_s if g_min == g_min else math.nan,
                    "rel_error": (gap - pert) / pert if pert > 0 else math.nan})
    return out


def cmd_gapscan(args) -> str:
    params = _params(args)
    if params.lam == 0.0:
        raise UsageError("gapscan needs --lambda > 0")
    n_max = _truncation(args, 20)
    gs = np.linspace(args.g_range[0], args.g_range[1], args.steps) * params.g_s
    rows = _map(_gap_row, [(params, float(g), n_max) for g in gs], args.threads)
    crossings = crossing_analysis(params, max(gs[0], 1e-9), gs[-1], n_max)
    sidecar = _sidecar(args, args.crossings_output, ".crossings.csv")
    if sidecar and args.format == "csv":
        cols = ["g", "gap_index", "lower", "upper", "same_parity", "d", "gap_pert",
                "ed_min_gap", "ed_g_min", "rel_error"]
        crow = [[("%d:%d" % tuple(c[k]) if k in ("lower", "upper") else c[k]) for k in cols]
                for c in crossings]
        _write(sidecar, _table_csv(args, cols, crow))
    return _emit(args, ["g", "gap1", "gap2", "gap_pert"], rows, {"crossings": crossings})


def _sweep_chunk(job):
    params, g, levels, n_max, winding = job
    return sweep(params, [g], levels, n_max, winding=winding)


def cmd_sweep(args) -> str:
    params = _params(args)
    n_max = _truncation(args, 2 * args.levels + 10)
    gs = np.linspace(args.g_range[0], args.g_range[1], args.steps) * params.g_s
    chunks = _map(_sweep_chunk, [(params, float(g), args.levels, n_max, not args.no_winding)
                                 for g in gs], args.threads)
    rows = []
    for records in chunks:
        for r in records:
            if args.only_level is None or r["level"] == args.only_level:
                rows.append((r["g"] / params.g_s, r["level"], r["energy"], r["parity"], r["n_w"]))
    return _emit(args, ["g", "level", "energy", "parity", "n_w"], rows)


def cmd_variational(args) -> str:
    params = _params(args)
    if args.ground:
        gs = np.linspace(args.g_range[0], args.g_range[1], args.steps) * params.g_s
        data = ground_order_parameters(params, gs)
        rows = list(zip(gs / params.g_s, data["sigma_x"], data["n_mean"], data["energy"]))
        return _emit(args, ["g", "sigma_x", "n_mean", "energy"], rows)
    curve = variational_curve(params, args.n, args.kind, args.samples)
    rows = list(zip(curve.param, curve.eps_minus, curve.eps_plus))
    w_plus, w_minus = stationary_weights(params, args.n)
    extra = {"w_plus": w_plus, "w_minus": w_minus, "psi0_energy": -0.5 * params.Omega}
    return _emit(args, ["param_value", "epsilon_minus", "epsilon_plus"], rows, extra)


def cmd_hermite(args) -> str:
    n = args.n
    if n < 1:
        raise UsageError("--n must be >= 1")
    half = math.sqrt(2 * n + 1) + 6.0
    lo, hi = args.x_range if args.x_range else (-half, half)
    x = np.linspace(lo, hi, args.points)
    rows = list(zip(x, oscillator_eval(n - 1, x), oscillator_eval(n, x)))
    extra = {"roots_prev": hermite_roots(n - 1).roots if n > 1 else [],
             "roots": hermite_roots(n).roots}
    return _emit(args, ["x", "phi_prev", "phi_n"], rows, extra)


COMMANDS = {
    "solve": cmd_solve,
    "texture": cmd_texture,
    "winding": cmd_winding,
    "phasediagram": cmd_phasediagram,
    "gapscan": cmd_gapscan,
    "sweep": cmd_sweep,
    "variational": cmd_variational,
    "hermite": cmd_hermite,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"jcstark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        text = COMMANDS[args.command](args)
        _write(args.output, text)
    except NumericalError as exc:
        print(f"jcstark: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, JCStarkError, ValueError) as exc:
        print(f"jcstark: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
