"""Convergence-rate experiments on graded mesh hierarchies.

An experiment builds a domain, chooses the grading factor, refines
``T_0, ..., T_n``, solves the Stokes problem on every level and records the
norms of the differences between consecutive discrete solutions together with
the observed rates.

Levels are processed one at a time: only the previous solution is kept, so
memory is bounded by the finest level. If a level fails, the rows finished so
far are still written before the error propagates.
"""
from __future__ import annotations

import dataclasses
import json
import logging
import math
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import assemble_system
from .domain import load_domain
from .grading import auto_kappas, vertex_exponents
from .mesh import GradingPlan, initial_triangulation, kappa_refine, write_mesh
from .norms import RateTable, consecutive_difference, rates_with_floor
from .solver import solve_saddle
from .spaces import build_space

__all__ = ["DATA_SETS", "ExperimentConfig", "ExperimentReport", "run_experiment", "emit_report",
           "forcing_for"]

log = logging.getLogger(__name__)

#: Differences below this fraction of the finer solution's norm count as
#: round-off and get a NaN rate.
DEFAULT_RATE_FLOOR = 1e-8


def _paper_forcing(r, z):
    s = np.power(r, 0.6)
    return 4.0 * s, 8.0 * s * np.cos(z)


def _unit_forcing(r, z):
    one = np.ones(np.broadcast(r, z).shape)
    return one, one


def _zero_forcing(r, z):
    zero = np.zeros(np.broadcast(r, z).shape)
    return zero, zero


def _polynomial_lift(r, z):
    return r, -2.0 * z


#: name -> (forcing, boundary lift or None, description)
DATA_SETS = {
    "paper": (_paper_forcing, None, "f = (4 r^(3/5), 8 r^(3/5) cos z), u = 0 on the wall"),
    "manufactured": (_unit_forcing, _polynomial_lift,
                     "f = (1, 1), u = (r, -2z) on the wall; exact solution is discrete"),
    "zero": (_zero_forcing, None, "f = 0, u = 0 on the wall; the solution vanishes"),
}


def forcing_for(name):
    """``(forcing, lift)`` of a named data set."""
    try:
        f, g, _ = DATA_SETS[name]
    except KeyError:
        raise ValueError(f"unknown data set {name!r}; choose from {sorted(DATA_SETS)}") from None
    return f, g


@dataclass
class ExperimentConfig:
    """Parameters of one convergence experiment.

    Attributes
    ----------
    domain : str or MeridianDomain
        Built-in name or path to a JSON domain file.
    k : int
        Pressure degree; velocities use ``k + 1``.
    kappa : float or "auto"
        Explicit grading factor in ``(0, 1/2]`` applied at every graded
        vertex, or ``"auto"`` for per-vertex factors from the corner
        exponents.
    levels : int
        Finest level ``n``; meshes ``T_0, ..., T_n`` are solved.
    data : str
        Key of :data:`DATA_SETS`.
    rel_tol : float
        Relative residual required from the linear solver.
    out_dir : str or None
        Where :func:`emit_report` writes; ``None`` writes nothing.
    emit : tuple of str
        Subset of ``("markdown", "csv")``.
    dump_mesh : bool
        Also write every level's mesh to ``out_dir``.
    vertex_omega : dict
        Vertex index -> singular exponent overrides.
    t0 : {"strict", "coarse"}
        ``"strict"`` enforces edges of ``T_0`` no longer than half the corner
        separation; ``"coarse"`` triangulates the polygon without extra
        points.
    grade : {"marked", "all"}
        Vertices graded with an explicit ``kappa``: the domain's marked
        vertex (all corners when it has none) or every corner.
    solver : {"auto", "direct", "minres"}
    rate_floor : float
        Relative round-off floor for rates, see :data:`DEFAULT_RATE_FLOOR`.
    """

    domain: object = "omega1"
    k: int = 1
    kappa: object = 0.2
    levels: int = 6
    data: str = "paper"
    rel_tol: float = 1e-10
    out_dir: object = None
    emit: tuple = ("markdown", "csv")
    dump_mesh: bool = False
    vertex_omega: dict = field(default_factory=dict)
    t0: str = "strict"
    grade: str = "marked"
    solver: str = "auto"
    rate_floor: float = DEFAULT_RATE_FLOOR

    def validate(self):
        """Raise ``ValueError`` for an inconsistent configuration."""
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if int(self.levels) != self.levels or self.levels < 2:
            raise ValueError(f"levels must be an integer >= 2, got {self.levels}")
        if self.kappa != "auto":
            kap = float(self.kappa)
            if not 0.0 < kap <= 0.5:
                raise ValueError(f"kappa must lie in (0, 1/2] or be 'auto', got {self.kappa}")
        if self.data not in DATA_SETS:
            raise ValueError(f"unknown data set {self.data!r}; choose from {sorted(DATA_SETS)}")
        if not 0.0 < float(self.rel_tol) < 1.0:
            raise ValueError(f"tol must lie in (0, 1), got {self.rel_tol}")
        bad = set(self.emit) - {"markdown", "csv"}
        if bad:
            raise ValueError(f"unknown output format(s) {sorted(bad)}")
        if self.t0 not in ("strict", "coarse"):
            raise ValueError(f"t0 must be 'strict' or 'coarse', got {self.t0!r}")
        if self.grade not in ("marked", "all"):
            raise ValueError(f"grade must be 'marked' or 'all', got {self.grade!r}")
        if self.solver not in ("auto", "direct", "minres"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if not self.rate_floor >= 0:
            raise ValueError("rate_floor must be non-negative")
        return self

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["domain"] = getattr(self.domain, "name", str(self.domain))
        d["out_dir"] = None if self.out_dir is None else str(self.out_dir)
        d["emit"] = list(self.emit)
        d["vertex_omega"] = {str(i): float(w) for i, w in self.vertex_omega.items()}
        return d


@dataclass
class ExperimentReport:
    """Rate table plus run metadata.

    ``metadata`` holds the configuration, the grading factor per vertex, the
    exponents of the graded vertices, dof counts and timings per level, and
    ``status`` (``"complete"`` or ``"failed"`` with the error message).
    """

    table: RateTable
    metadata: dict

    @property
    def complete(self):
        return self.metadata.get("status") == "complete"


def _grading_plan(domain, config):
    """``(GradingPlan, exponents, kappa_summary)`` for the configuration."""
    overrides = {int(i): float(w) for i, w in config.vertex_omega.items()}
    if config.kappa == "auto":
        kappas, exps = auto_kappas(domain, config.k, overrides)
        return GradingPlan(kappas, config.k), exps, min(kappas.values())
    kap = float(config.kappa)
    if config.grade == "all" or domain.marked_vertex is None:
        verts = list(domain.corners)
    else:
        verts = sorted({int(domain.marked_vertex), *overrides})
    exps = []
    for vi in verts:
        try:
            exps.extend(vertex_exponents(domain, overrides, [vi]))
        except Exception as exc:  # exponents are informative only here
            log.info("no exponent for vertex %d: %s", vi, exc)
    return GradingPlan({vi: kap for vi in verts}, config.k), exps, kap


def _level_record(j, mesh, space, system, sol, t_assemble):
    d = sol.diagnostics
    return dict(level=j, n_triangles=int(mesh.n_triangles), n_velocity_dofs=int(2 * space.n_velocity),
                n_pressure_dofs=int(space.n_pressure), n_unknowns=int(system.K.shape[0]),
                assemble_time=t_assemble, solve_time=float(d.get("solve_time", math.nan)),
                solver=d.get("method"), residual=float(d.get("residual", math.nan)),
                iterations=d.get("iterations"))


def run_experiment(config):
    """Solve on every level and tabulate consecutive differences.

    Parameters
    ----------
    config : ExperimentConfig

    Returns
    -------
    ExperimentReport

    Notes
    -----
    When ``config.out_dir`` is set the report is written there, including
    after a failure at some level (the error is re-raised afterwards).
    """
    config.validate()
    domain = load_domain(config.domain)
    forcing, lift = forcing_for(config.data)
    plan, exps, kappa_used = _grading_plan(domain, config)
    meta = dict(
        config=config.to_dict(),
        domain=dict(name=domain.name, vertices=domain.vertices.tolist(),
                    marked_vertex=domain.marked_vertex, separation_L=domain.separation_L),
        kappa=kappa_used,
        kappa_per_vertex={str(v): kap for v, kap in sorted(plan.kappas.items())},
        exponents=[dict(vertex=e.vertex_index, omega=e.omega, eta=e.eta, source=e.source.value)
                   for e in exps],
        data=DATA_SETS[config.data][2],
        levels=[],
        status="running",
        python=platform.python_version(),
        numpy=np.__version__,
    )
    table = RateTable()
    floors_u, floors_p = [], []
    report = ExperimentReport(table, meta)
    out = None if config.out_dir is None else Path(config.out_dir)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    t_start = time.perf_counter()
    mesh = None
    prev = None
    try:
        for j in range(config.levels + 1):
            t0 = time.perf_counter()
            if mesh is None:
                mesh = initial_triangulation(domain, enforce_edge_bound=config.t0 == "strict")
            else:
                mesh = kappa_refine(mesh, domain, plan)
            if config.dump_mesh and out is not None:
                write_mesh(mesh, out / f"mesh_level{j}.txt")
            space = build_space(mesh, config.k)
            system = assemble_system(space, forcing, lift=lift)
            t_asm = time.perf_counter() - t0
            sol = solve_saddle(system, rel_tol=config.rel_tol, method=config.solver)
            rec = _level_record(j, mesh, space, system, sol, t_asm)
            del system
            if prev is not None:
                t1 = time.perf_counter()
                eu, ep, nu, npn = consecutive_difference(prev, sol, with_norms=True)
                rec["norm_time"] = time.perf_counter() - t1
                table.levels.append(j)
                table.error_u.append(eu)
                table.error_p.append(ep)
                floors_u.append(config.rate_floor * nu)
                floors_p.append(config.rate_floor * npn)
                table.rate_u = rates_with_floor(table.error_u, floors_u)
                table.rate_p = rates_with_floor(table.error_p, floors_p)
            meta["levels"].append(rec)
            log.info("level %d: %d unknowns, solve %.1fs", j, rec["n_unknowns"], rec["solve_time"])
            prev = sol
    except Exception as exc:
        meta["status"] = "failed"
        meta["error"] = f"{type(exc).__name__}: {exc}"
        meta["failed_level"] = len(meta["levels"])
        meta["total_time"] = time.perf_counter() - t_start
        if out is not None:
            emit_report(report, out, config.emit)
        raise
    meta["status"] = "complete"
    meta["total_time"] = time.perf_counter() - t_start
    if out is not None:
        emit_report(report, out, config.emit)
    return report


def _title(meta):
    cfg = meta.get("config", {})
    if not cfg:
        return None
    return (f"{cfg.get('domain')}, k = {cfg.get('k')}, kappa = {meta.get('kappa')}, "
            f"data = {cfg.get('data')}")


def emit_report(report, out_dir, formats=("markdown", "csv")):
    """Write ``rates.md`` / ``rates.csv`` and ``metadata.json`` to ``out_dir``.

    Returns the list of written paths. The CSV keeps every digit, so
    :meth:`RateTable.from_csv` recovers the table exactly.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "markdown" in formats:
        p = out / "rates.md"
        p.write_text(report.table.to_markdown(title=_title(report.metadata)))
        written.append(p)
    if "csv" in formats:
        p = out / "rates.csv"
        p.write_text(report.table.to_csv())
        written.append(p)
    p = out / "metadata.json"
    p.write_text(json.dumps(report.metadata, indent=2, default=_json_default) + "\n")
    written.append(p)
    return written


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)
