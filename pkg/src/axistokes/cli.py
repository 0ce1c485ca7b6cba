"""Command-line driver.

Subcommands::

    axistokes run      --domain omega1 --kappa 0.2 --k 1 --levels 6 --data paper --out-dir out
    axistokes grading  --domain omega2 [--vertex-omega 0=0.711] [--k 1]
    axistokes domains

``--config FILE`` reads flat ``key = value`` lines whose keys mirror the long
flag names (``kappa = auto``, ``vertex_omega = 0=0.711, 3=0.8``; the key
``vertex_omega_overrides`` is accepted as an alias). Flags given on the
command line win over the file.

The exit code is 0 on success, 2 for usage errors and 1 for any other
error; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .domain import BUILTIN_NAMES, builtin_domain, load_domain
from .errors import AxiStokesError
from .experiment import DATA_SETS, ExperimentConfig, run_experiment
from .grading import kappa_from_eta, vertex_exponents

__all__ = ["main", "build_parser", "read_config"]

log = logging.getLogger("axistokes")

_DEFAULTS = ExperimentConfig()


def _omega_pair(text):
    try:
        idx, val = text.split("=")
        return int(idx), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected INDEX=VALUE, got {text!r}") from None


def _kappa(text):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"kappa must be a number or 'auto', got {text!r}") from None


def _formats(text):
    out = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = set(out) - {"markdown", "csv"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(sorted(bad))}")
    return out


def read_config(path):
    """Parse a flat ``key = value`` file into a dict of argparse destinations.

    Blank lines and lines starting with ``#`` are ignored.
    """
    conv = dict(domain=str, k=int, kappa=_kappa, levels=int, data=str, tol=float, out_dir=str,
                emit=_formats, dump_mesh=lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
                t0=str, grade=str, solver=str, rate_floor=float)
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in ("vertex_omega", "vertex_omega_overrides"):
            pairs = [_omega_pair(s.strip()) for s in val.replace(";", ",").split(",") if s.strip()]
            out["vertex_omega"] = pairs
        elif key in conv:
            try:
                out[key] = conv[key](val)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ValueError(f"{path}:{n}: bad value for {key}: {exc}") from None
        else:
            raise ValueError(f"{path}:{n}: unknown key {key!r}")
    return out


def _add_common(p):
    p.add_argument("--domain", help=f"built-in name ({', '.join(BUILTIN_NAMES)}) or JSON file")
    p.add_argument("--k", type=int, help="pressure degree; velocities use k+1 (default 1)")
    p.add_argument("--vertex-omega", type=_omega_pair, action="append", metavar="INDEX=OMEGA",
                   help="override the singular exponent of a vertex (repeatable)")
    p.add_argument("--config", help="flat key = value file with defaults for these flags")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="axistokes",
        description="Axisymmetric Stokes convergence experiments on graded meshes.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve on a mesh hierarchy and report convergence rates")
    _add_common(run)
    run.add_argument("--kappa", type=_kappa, help="grading factor in (0, 1/2] or 'auto' (default 0.2)")
    run.add_argument("--levels", type=int, help="finest refinement level (default 6)")
    run.add_argument("--data", choices=sorted(DATA_SETS), help="forcing and boundary data (default paper)")
    run.add_argument("--tol", type=float, help="relative solver residual (default 1e-10)")
    run.add_argument("--out-dir", help="directory for rates.md, rates.csv and metadata.json")
    run.add_argument("--emit", type=_formats, help="comma-separated subset of markdown,csv")
    run.add_argument("--dump-mesh", action="store_const", const=True, default=None,
                     help="also write every level's mesh to the output directory")
    run.add_argument("--t0", choices=("strict", "coarse"),
                     help="initial triangulation: edges bounded by half the corner separation "
                          "(strict, default) or the plain polygon triangulation (coarse)")
    run.add_argument("--grade", choices=("marked", "all"),
                     help="vertices graded by an explicit kappa (default: the marked vertex)")
    run.add_argument("--solver", choices=("auto", "direct", "minres"), help="linear solver")
    run.add_argument("--rate-floor", type=float,
                     help="relative round-off floor below which rates are reported as x")

    gr = sub.add_parser("grading", help="print (omega, eta, kappa) per corner")
    _add_common(gr)
    gr.add_argument("--safety", type=float, default=0.95, help="a = safety * eta (default 0.95)")

    sub.add_parser("domains", help="list the built-in domains and their vertices")
    return parser


def _merged(args, keys):
    """Command-line values over config-file values over defaults."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key in keys:
        val = getattr(args, key, None)
        if key == "vertex_omega" and val is not None and "vertex_omega" in cfg:
            val = list(cfg["vertex_omega"]) + list(val)
        out[key] = val if val is not None else cfg.get(key)
    return out


def _cmd_run(args):
    v = _merged(args, ("domain", "k", "kappa", "levels", "data", "tol", "out_dir", "emit",
                       "dump_mesh", "vertex_omega", "t0", "grade", "solver", "rate_floor"))
    d = _DEFAULTS
    config = ExperimentConfig(
        domain=v["domain"] or d.domain, k=v["k"] or d.k,
        kappa=d.kappa if v["kappa"] is None else v["kappa"],
        levels=d.levels if v["levels"] is None else v["levels"],
        data=v["data"] or d.data, rel_tol=v["tol"] or d.rel_tol, out_dir=v["out_dir"],
        emit=v["emit"] or d.emit, dump_mesh=bool(v["dump_mesh"]),
        vertex_omega=dict(v["vertex_omega"] or []), t0=v["t0"] or d.t0,
        grade=v["grade"] or d.grade, solver=v["solver"] or d.solver,
        rate_floor=d.rate_floor if v["rate_floor"] is None else v["rate_floor"])
    report = run_experiment(config)
    print(report.table.to_markdown(), end="")
    meta = report.metadata
    print(f"kappa = {meta['kappa']:.6g}; unknowns per level: "
          + ", ".join(str(lv["n_unknowns"]) for lv in meta["levels"]))
    if config.out_dir:
        print(f"wrote {config.out_dir}")
    return 0


def _cmd_grading(args):
    v = _merged(args, ("domain", "k", "vertex_omega"))
    domain = load_domain(v["domain"] or _DEFAULTS.domain)
    k = v["k"] or 1
    overrides = dict(v["vertex_omega"] or [])
    bad = [i for i in overrides if i not in domain.corners]
    if bad:
        raise ValueError(f"vertex index {bad[0]} is not a corner of {domain.name}")
    print(f"domain {domain.name}, k = {k}, a = {args.safety:g} * eta")
    print(f"{'vertex':>6} {'r':>9} {'z':>9} {'angle/pi':>9} {'kind':>9} "
          f"{'omega':>9} {'eta':>9} {'kappa':>9}  source")
    for vi in domain.corners:
        r, z = domain.vertices[vi]
        ang = domain.interior_angles[vi] / math.pi
        kind = domain.vertex_kinds[vi].value
        try:
            (e,) = vertex_exponents(domain, overrides, [vi])
        except AxiStokesError as exc:
            print(f"{vi:>6} {r:9.4f} {z:9.4f} {ang:9.4f} {kind:>9} {'-':>9} {'-':>9} {'-':>9}  "
                  f"({type(exc).__name__}: supply --vertex-omega {vi}=VALUE)")
            continue
        kap = kappa_from_eta(args.safety * e.eta, k)
        mark = " *" if vi == domain.marked_vertex else ""
        print(f"{vi:>6} {r:9.4f} {z:9.4f} {ang:9.4f} {kind:>9} {e.omega:9.6f} {e.eta:9.6f} "
              f"{kap:9.6f}  {e.source.value}{mark}")
    if domain.marked_vertex is not None:
        print("* marked vertex")
    return 0


def _cmd_domains(_args):
    for name in BUILTIN_NAMES:
        dom = builtin_domain(name)
        pts = ", ".join(f"({r:g}, {z:g})" for r, z in dom.vertices)
        mark = "" if dom.marked_vertex is None else f"; marked vertex {dom.marked_vertex}"
        print(f"{name}: {pts}{mark}")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    handler = dict(run=_cmd_run, grading=_cmd_grading, domains=_cmd_domains)[args.command]
    try:
        return handler(args)
    except (AxiStokesError, ValueError, OSError, KeyError) as exc:
        print(f"axistokes: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except MemoryError:
        print("axistokes: error: out of memory; try fewer --levels", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
