"""Command-line front end.

Subcommands: ``bounds`` (closed-form bound report for one model point),
``simulate`` (collective covariant estimator on n qubit copies),
``gaussian`` (squeezed-measurement Monte Carlo of the shift model),
``limits`` (spin-to-Gaussian residual table over a (p, j) grid) and
``sweep`` (bound / origin / radial prediction tables over grids).

Single reports are emitted as JSON (CSV on request), tables as CSV.  Every
report embeds the package version, the seed and an echo of the parsed
configuration, so reruns with the same flags are byte-identical.  Exit
codes: 0 success, 2 usage or validation error, 3 numerical failure.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .bounds import full_model_report, gaussian_report, submodel_report
from .collective import (
    asymptotic_predictions,
    origin_cov_fisher,
    origin_fisher_deficit,
    origin_fisher_deficit_approx,
    origin_exact,
    origin_approx,
    simulate_covariant,
)
from .errors import ConvergenceError, ValidationError
from .gaussian import simulate_gaussian
from .spin import limit_report
from .qubit import fisher_pair
from .bounds import sld_bound, rld_bound, quasi_cr_qubit, holevo_full_qubit

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

WEIGHT_DIMS = {"full": 3, "submodel": 2, "gaussian": 2}


def parse_weight(literal: str, dim: int) -> np.ndarray:
    """Parse a weight-matrix literal.

    Accepted forms: ``identity``, ``diag:a,b[,c]`` and the full row-major
    form ``a,b;b,c`` with rows separated by semicolons.  Symmetry is
    validated on parse.
    """
    text = literal.strip()
    if text == "identity":
        return np.eye(dim)
    if text.startswith("diag:"):
        entries = [float(x) for x in text[len("diag:"):].split(",") if x.strip()]
        if len(entries) != dim:
            raise ValidationError(
                f"diagonal weight needs {dim} entries, got {len(entries)}"
            )
        return np.diag(entries)
    rows = [
        [float(x) for x in row.split(",") if x.strip()]
        for row in text.split(";")
        if row.strip()
    ]
    mat = np.array(rows, dtype=float)
    if mat.shape != (dim, dim):
        raise ValidationError(f"weight literal must be {dim}x{dim}, got {mat.shape}")
    if np.max(np.abs(mat - mat.T)) > 1e-12:
        raise ValidationError("weight literal is not symmetric")
    return mat


def parse_list(text: str) -> list:
    """Comma list or start:stop:step range (inclusive of the endpoint)."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValidationError(f"range literal must be start:stop:step, got {text!r}")
        start, stop, step = (float(x) for x in parts)
        if step <= 0:
            raise ValidationError("range step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    return [float(x) for x in text.split(",") if x.strip()]


def emit(text: str, path):
    """Write atomically to ``path`` (temp file + rename), or to stdout."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def envelope(kind: str, seed: int, config: dict, report: dict) -> dict:
    return {
        "version": __version__,
        "seed": seed,
        "kind": kind,
        "config": config,
        "report": report,
    }


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _flatten(prefix: str, value, out: dict):
    if isinstance(value, dict):
        for key, sub in value.items():
            _flatten(f"{prefix}{key}_", sub, out)
    elif isinstance(value, list):
        for idx, sub in enumerate(value):
            _flatten(f"{prefix}{idx}_", sub, out)
    else:
        out[prefix.rstrip("_")] = value


def render_single_csv(payload: dict) -> str:
    """Flatten a single report to comment lines plus one CSV row."""
    flat = {}
    _flatten("", payload["report"], flat)
    buf = io.StringIO()
    buf.write(f"# qcrb {payload['version']} kind={payload['kind']} seed={payload['seed']}\n")
    buf.write(f"# config={json.dumps(payload['config'])}\n")
    writer = csv.writer(buf)
    writer.writerow(list(flat.keys()))
    writer.writerow([flat[k] for k in flat])
    return buf.getvalue()


def render_table_csv(meta: dict, header: list, rows: list) -> str:
    buf = io.StringIO()
    buf.write(f"# qcrb {meta['version']} kind={meta['kind']} seed={meta['seed']}\n")
    buf.write(f"# config={json.dumps(meta['config'])}\n")
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def cmd_bounds(args) -> int:
    dim = WEIGHT_DIMS[args.model]
    weight = parse_weight(args.weight, dim)
    if args.model == "full":
        report = full_model_report(args.r, weight)
    elif args.model == "submodel":
        report = submodel_report(args.r, args.phi, weight)
    else:
        report = gaussian_report(args.nbar, weight)
    config = {
        "command": "bounds",
        "model": args.model,
        "r": args.r,
        "phi": args.phi,
        "nbar": args.nbar,
        "weight": args.weight,
    }
    payload = envelope("bounds", args.seed, config, report.to_dict())
    text = render_json(payload) if args.out == "json" else render_single_csv(payload)
    emit(text, args.path)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.trials < 1:
        raise ValidationError("trials must be >= 1")
    if args.trials * args.n > 10**10:
        raise ValidationError(
            f"trials * n = {args.trials * args.n} exceeds the 1e10 sampling guard"
        )
    theta = (0.0, 0.0, args.r)
    report = simulate_covariant(args.n, theta, args.risk, args.trials, args.seed)
    config = {
        "command": "simulate",
        "n": args.n,
        "r": args.r,
        "risk": args.risk,
        "trials": args.trials,
    }
    payload = envelope("simulation", args.seed, config, report.to_dict())
    text = render_json(payload) if args.out == "json" else render_single_csv(payload)
    emit(text, args.path)
    return EXIT_OK


def cmd_gaussian(args) -> int:
    if args.trials * args.n > 10**10:
        raise ValidationError(
            f"trials * n = {args.trials * args.n} exceeds the 1e10 sampling guard"
        )
    weight = parse_weight(args.weight, 2)
    theta = [float(x) for x in args.theta.split(",")] if args.theta else [0.0, 0.0]
    if len(theta) != 2:
        raise ValidationError("gaussian shift must have two components")
    report = simulate_gaussian(args.nbar, theta, weight, args.n, args.trials, args.seed)
    config = {
        "command": "gaussian",
        "nbar": args.nbar,
        "theta": theta,
        "weight": args.weight,
        "n": args.n,
        "trials": args.trials,
    }
    payload = envelope("simulation", args.seed, config, report.to_dict())
    text = render_json(payload) if args.out == "json" else render_single_csv(payload)
    emit(text, args.path)
    return EXIT_OK


def cmd_limits(args) -> int:
    p_values = parse_list(args.p)
    j_values = parse_list(args.j)
    if not p_values or not j_values:
        raise ValidationError("limits needs nonempty --p and --j grids")
    z = complex(*(float(x) for x in args.z_probe.split(","))) if args.z_probe else 0.5 + 0.25j
    gtilde = parse_weight(args.gtilde, 2) if args.gtilde else None
    rows = []
    header = None
    for p in p_values:
        for j in j_values:
            rep = limit_report(j, p, z_probe=z, gtilde=gtilde).as_dict()
            if header is None:
                header = list(rep.keys())
            rows.append([rep[key] for key in header])
    config = {"command": "limits", "p": args.p, "j": args.j, "z_probe": str(z)}
    meta = envelope("limits", args.seed, config, {})
    emit(render_table_csv(meta, header, rows), args.path)
    return EXIT_OK


def _sweep_bounds(args):
    r_values = parse_list(args.r or "")
    if not r_values:
        raise ValidationError("sweep bounds needs a nonempty --r grid")
    weight = parse_weight(args.weight, 3)
    header = ["r", "c_sld", "c_rld", "c_holevo", "c_quasi"]
    rows = []
    for r in r_values:
        pair = fisher_pair(r)
        value, _, _ = holevo_full_qubit(r, weight)
        rows.append(
            [
                r,
                sld_bound(pair.j_sld, weight),
                rld_bound(pair.jtilde_inv, weight),
                value,
                quasi_cr_qubit(pair.j_sld, weight),
            ]
        )
    return header, rows


def _sweep_origin(args):
    n_values = [int(x) for x in parse_list(args.n or "")]
    if not n_values:
        raise ValidationError("sweep origin needs a nonempty --n grid")
    header = [
        "n",
        "origin_exact",
        "origin_approx",
        "origin_fisher",
        "deficit_exact",
        "deficit_approx",
    ]
    rows = [
        [
            n,
            origin_exact(n),
            origin_approx(n),
            origin_cov_fisher(n),
            origin_fisher_deficit(n),
            origin_fisher_deficit_approx(n),
        ]
        for n in n_values
    ]
    return header, rows


def _sweep_radial(args):
    n_values = [int(x) for x in parse_list(args.n or "")]
    r_values = parse_list(args.r or "")
    if not n_values or not r_values:
        raise ValidationError("sweep radial needs nonempty --n and --r grids")
    header = [
        "n",
        "r",
        "radial_mse_exact",
        "radial_mse_approx",
        "jnr_inv_exact",
        "jnr_inv_approx",
        "origin_exact",
        "origin_approx",
    ]
    rows = []
    for n in n_values:
        for r in r_values:
            pred = asymptotic_predictions(n, r)
            rows.append(
                [
                    n,
                    r,
                    pred.radial_mse_exact,
                    pred.radial_mse_approx,
                    pred.jnr_inv_exact,
                    pred.jnr_inv_approx,
                    pred.origin_exact,
                    pred.origin_approx,
                ]
            )
    return header, rows


def cmd_sweep(args) -> int:
    builders = {"bounds": _sweep_bounds, "origin": _sweep_origin, "radial": _sweep_radial}
    header, rows = builders[args.command_name](args)
    config = {
        "command": f"sweep:{args.command_name}",
        "r": args.r,
        "n": args.n,
        "weight": args.weight,
    }
    meta = envelope("sweep", args.seed, config, {})
    emit(render_table_csv(meta, header, rows), args.path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcrb",
        description="Estimation-error bounds and collective-estimator simulations "
        "for qubit and Gaussian shift models.",
    )
    parser.add_argument("--version", action="version", version=f"qcrb {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed echoed in the report")
    common.add_argument("--path", default=None, help="output file (atomic write); stdout if omitted")

    def add_out(sub_parser, default):
        # per-subparser action: a shared parent action would alias the default
        sub_parser.add_argument("--out", choices=["json", "csv"], default=default)

    pb = sub.add_parser("bounds", parents=[common], help="closed-form bound report")
    add_out(pb, "json")
    pb.add_argument("--model", choices=["full", "submodel", "gaussian"], required=True)
    pb.add_argument("--r", type=float, default=0.0)
    pb.add_argument("--phi", type=float, default=0.0)
    pb.add_argument("--nbar", type=float, default=0.0)
    pb.add_argument("--weight", default="identity")
    pb.set_defaults(func=cmd_bounds)

    ps = sub.add_parser("simulate", parents=[common], help="collective covariant estimator MC")
    add_out(ps, "json")
    ps.add_argument("--n", type=int, required=True, help="number of copies")
    ps.add_argument("--r", type=float, required=True)
    ps.add_argument("--risk", choices=["euclidean", "bures"], default="euclidean")
    ps.add_argument("--trials", type=int, required=True)
    ps.set_defaults(func=cmd_simulate)

    pg = sub.add_parser("gaussian", parents=[common], help="squeezed-measurement MC")
    add_out(pg, "json")
    pg.add_argument("--nbar", type=float, required=True)
    pg.add_argument("--theta", default=None, help="shift t1,t2 (default 0,0)")
    pg.add_argument("--weight", default="identity")
    pg.add_argument("--n", type=int, default=1, help="copies averaged per trial")
    pg.add_argument("--trials", type=int, required=True)
    pg.set_defaults(func=cmd_gaussian)

    pl = sub.add_parser("limits", parents=[common], help="spin-to-Gaussian residual table")
    add_out(pl, "csv")
    pl.add_argument("--p", required=True, help="comma list of thermal parameters")
    pl.add_argument("--j", required=True, help="comma list of spins")
    pl.add_argument("--z-probe", default=None, help="probe amplitude re,im")
    pl.add_argument("--gtilde", default=None, help="optional 2x2 weight literal")
    pl.set_defaults(func=cmd_limits)

    pw = sub.add_parser("sweep", parents=[common], help="prediction tables over grids")
    add_out(pw, "csv")
    pw.add_argument("--command", dest="command_name", choices=["bounds", "origin", "radial"], required=True)
    pw.add_argument("--r", default=None, help="radius grid (list or start:stop:step)")
    pw.add_argument("--n", default=None, help="copy-count grid")
    pw.add_argument("--weight", default="identity")
    pw.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        best = f" (best value {exc.best_value})" if exc.best_value is not None else ""
        print(f"numerical failure: {exc}{best}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
