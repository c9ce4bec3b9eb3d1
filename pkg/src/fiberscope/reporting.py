"""Experiment orchestration: build the instance from a :class:`RunConfig`,
run the requested analyses in a fixed order, and write JSON/CSV artifacts.

Exit codes: 0 when every requested verdict is true, 2 when any is false,
1 on configuration or runtime errors.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import warnings
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import ANALYSES, DEFAULT_ANALYSES, RunConfig
from .errors import FiberscopeError
from .fibers import FiberField, save_fiber_field, synthesize
from .invariance import (beta_decompose, check_invariance, decompose, measure_report,
                         support_bound)
from .lattice import LatticeConfig, build_sections, tiling_check
from .ranges import DimensionFunction, range_function, write_dimension_csv
from .schrodinger import GammaSet, RepGrid
from .transform import fiberize, load_sampled_function, plancherel_check

log = logging.getLogger(__name__)

EXIT_OK, EXIT_ERROR, EXIT_FALSE = 0, 1, 2
PLANCHEREL_TOL = 1e-2
TIMESTAMP_KEY = "generated_at"


def generator_seed(run_seed: int, index: int, spec_seed: int | None):
    """Seed material for one generator: the run seed combined with either the
    spec's own seed or the generator's position.  Fed to NumPy's PCG64."""
    return [int(run_seed), 0 if spec_seed is None else 1, int(index if spec_seed is None else spec_seed)]


class Instance:
    """Grids, translation set and generator fields built from a config."""

    def __init__(self, cfg: RunConfig, base_dir: Path | None = None):
        self.cfg = cfg
        self.lattice = LatticeConfig(cfg.c, cfg.N, cfg.d)
        self.grid, self.residues = build_sections(self.lattice, cfg.S, cfg.K)
        self.rep_grid = RepGrid(cfg.M, cfg.L, cfg.d)
        self.gamma = GammaSet(cfg.a, cfg.b, cfg.pairs, cfg.d)
        self.gamma.check_grid(self.rep_grid)
        base = Path(base_dir) if base_dir is not None else Path.cwd()
        self.names = []
        self.fields = []
        self.sampled = {}
        for index, spec in enumerate(cfg.generators):
            self.names.append(spec.name)
            self.fields.append(self._build(spec, index, base))
        self.template = synthesize("zero", self.grid, self.residues, self.rep_grid)

    def _build(self, spec, index, base) -> FiberField:
        seed = generator_seed(self.cfg.seed, index, spec.seed)
        if spec.kind == "sampled":
            f = load_sampled_function(base / spec.path)
            self.sampled[spec.name] = f
            return fiberize(f, self.grid, self.residues, self.rep_grid)
        path = base / spec.path if spec.path else None
        return synthesize(spec.kind, self.grid, self.residues, self.rep_grid, seed,
                          residue=spec.residue, support=spec.support, path=path)

    def field(self, name) -> FiberField:
        return self.fields[self.names.index(name)]


def _floats(arr):
    return [float(v) for v in np.asarray(arr).ravel()]


def _analyses_for(command: str, cfg: RunConfig):
    if command == "tile-check":
        return ("tile-check",)
    if command == "decompose":
        return ("decompose",)
    if command == "beta":
        return ("beta",)
    if command == "transform":
        return ()
    if command == "report":
        return ANALYSES if cfg.beta_target else DEFAULT_ANALYSES
    return cfg.analyses


def run(cfg: RunConfig, command: str = "analyze", out_dir=None, write_json=True, write_csv=True,
        base_dir=None):
    """Execute ``command`` for ``cfg``; returns ``(report, exit_code)``.

    ``report`` is a JSON-ready dict.  Files are written only when ``out_dir``
    (or ``cfg.out``) is set.
    """
    out_dir = out_dir if out_dir is not None else cfg.out
    report = {
        "tool": "fiberscope",
        "version": __version__,
        "command": command,
        TIMESTAMP_KEY: datetime.now(timezone.utc).isoformat(),
        "config": cfg.to_dict(),
        "tolerances": {"rank": cfg.tol_rank, "member": cfg.tol_member, "supp": cfg.tol_supp},
        "analyses": {},
        "verdicts": {},
        "error": None,
    }
    try:
        inst = Instance(cfg, base_dir)
        _execute(inst, command, report)
    except FiberscopeError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except OSError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc),
                           "path": getattr(exc, "filename", None)}
    if report["error"] is not None:
        code = EXIT_ERROR
    elif all(report["verdicts"].values()):
        code = EXIT_OK
    else:
        code = EXIT_FALSE
    report["exit_code"] = code
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if write_json:
            write_report(report, out / "report.json")
        if write_csv and report["error"] is None:
            if "range" in report["analyses"]:
                rng = report["analyses"]["range"]
                write_dimension_csv(DimensionFunction(np.array(rng["sigma"]), np.array(rng["dim_W"])),
                                    out / "dimension.csv")
            emit_plotdata(report, out)
        if cfg.dump_fields and report["error"] is None:
            for name, F in zip(inst.names, inst.fields):
                save_fiber_field(F, out / f"{name}.fibf")
    return report, code


def _execute(inst: Instance, command: str, report: dict) -> None:
    cfg = inst.cfg
    gens, gamma = inst.fields, inst.gamma
    A = report["analyses"]
    V = report["verdicts"]
    report["occupancy"] = {name: F.block_norms().tolist() for name, F in zip(inst.names, gens)}
    report["band"] = inst.residues.band.tolist()
    report["sigma"] = _floats(inst.grid.points)

    if command == "transform":
        A["transform"] = {}
        for name, f in inst.sampled.items():
            err = plancherel_check(f, inst.grid, inst.residues, inst.rep_grid)
            A["transform"][name] = {"plancherel_relative_error": err,
                                    "norm_sq_samples": f.norm_sq(),
                                    "norm_sq_fibers": inst.field(name).norm_sq()}
            V[f"plancherel:{name}"] = err < PLANCHEREL_TOL
        return

    wanted = _analyses_for(command, cfg)
    kw = dict(tol_rank=cfg.tol_rank)
    basis = range_function(gens, gamma, cfg.tol_rank, template=inst.template)
    invariance = None

    def invariance_report():
        nonlocal invariance
        if invariance is None:
            invariance = check_invariance(gens, gamma, tol_rank=cfg.tol_rank,
                                          tol_member=cfg.tol_member, template=inst.template)
        return invariance

    for analysis in wanted:
        if analysis == "tile-check":
            rep = tiling_check(inst.grid, inst.residues)
            A["tile-check"] = rep.to_dict()
            V["tile-check"] = rep.holds
        elif analysis == "range":
            A["range"] = {"sigma": _floats(basis.sigmas), "dim_W": basis.ranks.tolist(),
                          "singular_values": [_floats(sv) for sv in basis.singular_values]}
        elif analysis in ("oracle", "containment", "membership", "dimension"):
            test = invariance_report().tests[analysis]
            A[analysis] = test.to_dict()
            V[analysis] = test.verdict
        elif analysis == "decompose":
            inv = invariance_report().verdict_oracle
            rep = decompose(gens, gamma, invariant=inv, seed=[cfg.seed, 101],
                            tol_member=cfg.tol_member, basis=basis, **kw)
            A["decompose"] = rep.to_dict()
            V["decompose"] = rep.passed
        elif analysis == "measure":
            inv = invariance_report().verdict_oracle
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")  # advisory status is recorded in the report
                rep = measure_report(gens, gamma, invariant=inv, tol_member=cfg.tol_member,
                                     tol_supp=cfg.tol_supp, template=inst.template,
                                     basis=basis, **kw)
            A["measure"] = rep.to_dict()
            if not rep.advisory:
                V["measure"] = rep.holds
        elif analysis == "support-bound":
            inv = invariance_report().verdict_oracle
            out = {}
            for name, F in zip(inst.names, gens):
                rep = support_bound(F, gamma, invariant=inv if len(gens) == 1 else None,
                                    tol_member=cfg.tol_member, tol_supp=cfg.tol_supp, **kw)
                out[name] = rep.to_dict()
                if rep.status != "not-applicable":
                    V[f"support-bound:{name}"] = rep.status == "holds"
            A["support-bound"] = out
        elif analysis == "beta":
            res = beta_decompose(inst.field(cfg.beta_target), inst.field(cfg.beta_source), gamma,
                                 tol_member=cfg.tol_member, **kw)
            A["beta"] = {"target": cfg.beta_target, "source": cfg.beta_source, **res.to_dict()}
            V["beta"] = res.max_residual < cfg.tol_member


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def emit_plotdata(report: dict, out_dir) -> list[Path]:
    """Write ``dimension_by_residue.csv`` and one ``occupancy_<name>.csv`` per generator.

    Column order is fixed: ``sigma, dim_W, dim_V0 .. dim_V{N-1}``; occupancy
    rows are section points, columns band indices, values block HS norms.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    N = report["config"]["N"]
    written = []
    path = out / "dimension_by_residue.csv"
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sigma", "dim_W"] + [f"dim_V{j}" for j in range(N)])
            dim = report.get("analyses", {}).get("dimension")
            if dim is not None:
                for s, sigma in enumerate(report["sigma"]):
                    w.writerow([repr(sigma), dim["dim_W"][s]] + [dim["dim_V"][j][s] for j in range(N)])
        written.append(path)
        band = report.get("band", [])
        for name, grid in report.get("occupancy", {}).items():
            path = out / f"occupancy_{name}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["s"] + [f"n={n}" for n in band])
                for s, row in enumerate(grid):
                    w.writerow([s] + [repr(float(v)) for v in row])
            written.append(path)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write plot data: {exc.strerror}", str(path)) from exc
    return written


def thread_limit():
    """Parallelism cap from ``FIBERSCOPE_THREADS`` (0 or unset means no cap)."""
    raw = os.environ.get("FIBERSCOPE_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        log.warning("ignoring non-integer FIBERSCOPE_THREADS=%r", raw)
        return None
    return value if value > 0 else None
