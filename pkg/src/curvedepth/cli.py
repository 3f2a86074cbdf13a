"""Command-line front end.

Subcommands:
  depth    one ensemble/degree computation (kacrice | montecarlo | closedform)
  sweep    CSV table over a list or range of degrees
  density  CSV table of the one-dimensional Kac root density factor

Machine-readable records go to stdout as JSON lines (or to --out); a
human-readable table is mirrored to stderr when it is a terminal.
Exit codes: 0 success, 1 usage errors, 2 non-convergence or excessive
discards.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

from . import __version__
from .ensembles import load_custom_scheme, scheme_by_name
from .errors import ExcessiveDiscards, NonConvergence
from .kernel import kac_phi, make_kernel
from .curvetopo import emit_loops, monte_carlo_depth
from .quadrature import (
    QuadConfig,
    expected_depth,
    kostlan_closed_form,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


@dataclass
class RunRecord:
    command: str
    ensemble: str
    degree: int
    method: str
    value: float
    err_or_stderr: float
    a_d_band: float
    trials: int | None
    panels: int | None
    seed: int | None
    wall_time_ms: float
    version: str


def _resolve_scheme(ensemble: str, degree: int):
    if ensemble.startswith("custom:"):
        return load_custom_scheme(ensemble.split(":", 1)[1])
    return scheme_by_name(ensemble, degree)


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("CURVEDEPTH_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _emit(records, out_path):
    lines = [json.dumps(asdict(r)) for r in records]
    if out_path:
        with open(out_path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    else:
        for line in lines:
            print(line)
    if sys.stderr.isatty():
        for r in records:
            print(
                f"{r.ensemble:>8s} d={r.degree:<5d} {r.method:<11s} "
                f"value={r.value:.10g} +- {r.err_or_stderr:.3g} "
                f"band=+-{r.a_d_band}",
                file=sys.stderr,
            )


def _run_one(ensemble, degree, method, args, seed):
    t0 = time.perf_counter()
    trials = panels = None
    if method == "closedform":
        if not ensemble.startswith("kostlan"):
            raise _UsageError("--method closedform is only valid for the kostlan ensemble")
        value = kostlan_closed_form(degree)
        err = 0.0
        band = 0.5 if degree % 2 else 0.0
    elif method == "kacrice":
        scheme = _resolve_scheme(ensemble, degree)
        cfg = QuadConfig(tol=args.tol, max_panels=args.max_panels)
        res = expected_depth(make_kernel(scheme), cfg)
        value, err, band, panels = res.value, res.err_est, res.a_d_band, res.n_evals
    elif method == "montecarlo":
        scheme = _resolve_scheme(ensemble, degree)
        res = monte_carlo_depth(
            scheme, scheme.degree, args.trials, seed,
            mesh_cfg=args.subdiv, threads=_threads(args),
            keep_first_loops=bool(args.emit_loops),
        )
        value, err = res.mean, res.stderr
        band = 0.5 if scheme.homogenization_degree % 2 else 0.0
        trials = res.trials
        if args.emit_loops and res.first_loops is not None:
            with open(args.emit_loops, "w") as fh:
                emit_loops(res.first_loops, fh)
    else:
        raise _UsageError(f"unknown method {method!r}")
    wall = 1000.0 * (time.perf_counter() - t0)
    return RunRecord(
        command="depth",
        ensemble=ensemble,
        degree=degree,
        method=method,
        value=float(value),
        err_or_stderr=float(err),
        a_d_band=float(band),
        trials=trials,
        panels=panels,
        seed=seed if method == "montecarlo" else None,
        wall_time_ms=wall,
        version=__version__,
    )


def _parse_degrees(spec: str):
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise _UsageError("degree range must be start:stop[:step]")
        start, stop = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
        degrees = list(range(start, stop + 1, step))
    else:
        degrees = [int(tok) for tok in spec.replace(",", " ").split()]
    if not degrees:
        raise _UsageError("no degrees given")
    return sorted(set(degrees))


def cmd_depth(args):
    record = _run_one(args.ensemble, args.degree, args.method, args, args.seed)
    _emit([record], args.out)
    return EXIT_OK


def cmd_sweep(args):
    degrees = _parse_degrees(args.degrees)
    rows = []
    failed = False
    for d in degrees:
        try:
            r = _run_one(args.ensemble, d, args.method, args, args.seed)
            rows.append([d, r.value, r.err_or_stderr, r.a_d_band, r.method,
                         r.seed if r.seed is not None else "", "ok"])
        except (NonConvergence, ExcessiveDiscards) as exc:
            failed = True
            rows.append([d, "", "", "", args.method, args.seed or "",
                         f"error:{type(exc).__name__}"])
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["degree", "value", "err", "a_d_band", "method", "seed", "status"])
        w.writerows(rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_density(args):
    if args.step <= 0:
        raise _UsageError("--step must be positive")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "phi_d", "sqrt_phi_d"])
        s = args.s_min
        while s <= args.s_max + 1e-12:
            phi = kac_phi(args.degree, s)
            w.writerow([f"{s:.12g}", f"{phi:.17g}", f"{math.sqrt(phi):.17g}"])
            s += args.step
    return EXIT_OK


def build_parser():
    p = _Parser(prog="curvedepth", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(q):
        q.add_argument("--ensemble", default="kostlan",
                       help="kostlan | kac | custom:<weights file>")
        q.add_argument("--method", default="kacrice",
                       choices=["kacrice", "montecarlo", "closedform"])
        q.add_argument("--tol", type=float, default=1e-8)
        q.add_argument("--max-panels", type=int, default=1_000_000)
        q.add_argument("--trials", type=int, default=4000)
        q.add_argument("--seed", type=int, default=0)
        q.add_argument("--subdiv", type=int, default=None,
                       help="icosphere subdivision override")
        q.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: CURVEDEPTH_THREADS or all cores)")
        q.add_argument("--epsilon", type=float, default=0.01,
                       help="mollifier half-width (diagnostics)")
        q.add_argument("--emit-loops", default=None, metavar="PATH",
                       help="write extracted loop polylines (montecarlo)")
        q.add_argument("--out", default=None, metavar="PATH")

    d = sub.add_parser("depth", help="single depth computation")
    common(d)
    d.add_argument("--degree", type=int, required=True)
    d.set_defaults(func=cmd_depth)

    s = sub.add_parser("sweep", help="degree sweep to CSV")
    common(s)
    s.add_argument("--degrees", required=True,
                   help="comma list '4,16,36' or range 'start:stop[:step]'")
    s.set_defaults(func=cmd_sweep)

    y = sub.add_parser("density", help="Kac 1-D density table to CSV")
    y.add_argument("--degree", type=int, required=True)
    y.add_argument("--s-min", type=float, default=0.0)
    y.add_argument("--s-max", type=float, default=2.0)
    y.add_argument("--step", type=float, default=0.01)
    y.add_argument("--out", required=True, metavar="PATH")
    y.set_defaults(func=cmd_density)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "cmd", None) == "sweep" and not args.out:
            raise _UsageError("sweep requires --out")
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NonConvergence, ExcessiveDiscards) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
