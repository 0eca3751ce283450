"""Command-line front end: generate models, solve, compare, export fields.

Exit codes: 0 solver converged, 2 solver did not converge (report still
written), 1 configuration or I/O error. All reports are JSON; comparison
tables are written as CSV and JSON with the column set of the solver
comparison tables (equation, DOFs, method, preconditioner, NIT, r_rel,
T_sol plus the condensation timings).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import pipeline
from .errors import ConfigurationError
from .krylov import dense_solve, save_matrix_market
from .mesh import build_contact_model, write_mesh_text


@dataclass
class RunConfig:
    """Validated solver run configuration."""

    model_id: int
    resolution: int
    mismatch: float = 1.0
    method: str = "condensed"
    preconditioner: str | None = None
    tol: float = 1e-8
    maxit: int = 2000
    verify: bool = False
    dump_matrices: bool = False
    out_dir: Path = Path(".")

    def __post_init__(self):
        if self.model_id not in (1, 2, 3):
            raise ConfigurationError(f"model must be 1, 2 or 3, got {self.model_id}")
        if self.method not in ("condensed", "saddle"):
            raise ConfigurationError(f"method must be condensed or saddle, "
                                     f"got {self.method!r}")
        if not 0.0 < self.tol < 1.0:
            raise ConfigurationError(f"tol must be in (0, 1), got {self.tol}")
        if self.maxit < 1:
            raise ConfigurationError(f"maxit must be >= 1, got {self.maxit}")
        if self.preconditioner is None:
            self.preconditioner = "ssor" if self.method == "condensed" else "jac"
        self.out_dir = Path(self.out_dir)

    @property
    def solver(self) -> str:
        # condensed systems are SPD -> CG; the raw saddle system needs GCR
        return "cg" if self.method == "condensed" else "gcr"


@dataclass
class FieldExport:
    """Nodal output fields of one solve: merged node coordinates and
    triangles over all bodies, displacement vectors, magnitudes, and the
    per-surface multiplier values."""

    coords: np.ndarray
    triangles: np.ndarray
    displacement: np.ndarray
    multipliers: list[np.ndarray] = field(default_factory=list)

    @property
    def magnitude(self) -> np.ndarray:
        return np.linalg.norm(self.displacement, axis=1)


def collect_fields(assembled, recovered=None, x=None) -> FieldExport:
    """Map a solution vector back to per-node displacements.

    Accepts either a recovered condensed solution or a full saddle solution
    vector.
    """
    dofmap = assembled.dofmap
    if x is None:
        x = recovered.x
    disp = x[:dofmap.n_disp]
    lam = x[dofmap.n_disp:]
    coords_parts, tri_parts = [], []
    disp_parts = []
    offset = 0
    for b, mesh in enumerate(assembled.model.bodies):
        coords_parts.append(mesh.nodes)
        tri_parts.append(mesh.triangles + offset)
        slots = dofmap.node_slot[b]
        disp_parts.append(np.column_stack([disp[2 * slots], disp[2 * slots + 1]]))
        offset += mesh.n_nodes
    multipliers = [lam[sl] for sl in dofmap.surface_lambda]
    return FieldExport(coords=np.vstack(coords_parts),
                       triangles=np.vstack(tri_parts),
                       displacement=np.vstack(disp_parts),
                       multipliers=multipliers)


def export_vtk(fields: FieldExport, path) -> None:
    """Write a legacy ASCII VTK unstructured grid with point vectors
    ``displacement`` and scalars ``magnitude``."""
    n = len(fields.coords)
    if len(fields.displacement) != n:
        raise ValueError("one displacement vector per node is required")
    m = len(fields.triangles)
    lines = [
        "# vtk DataFile Version 3.0",
        "tied-contact solution fields",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {n} double",
    ]
    for x, y in fields.coords:
        lines.append(f"{x:.17g} {y:.17g} 0.0")
    lines.append(f"CELLS {m} {4 * m}")
    for a, b, c in fields.triangles:
        lines.append(f"3 {a} {b} {c}")
    lines.append(f"CELL_TYPES {m}")
    lines.extend(["5"] * m)
    lines.append(f"POINT_DATA {n}")
    lines.append("VECTORS displacement double")
    for ux, uy in fields.displacement:
        lines.append(f"{ux:.17g} {uy:.17g} 0.0")
    lines.append("SCALARS magnitude double 1")
    lines.append("LOOKUP_TABLE default")
    for v in fields.magnitude:
        lines.append(f"{v:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk(path) -> FieldExport:
    """Parse a file written by :func:`export_vtk` (round-trip oracle)."""
    tokens = Path(path).read_text().splitlines()
    i = tokens.index("DATASET UNSTRUCTURED_GRID") + 1
    n = int(tokens[i].split()[1]); i += 1
    coords = np.array([[float(v) for v in tokens[i + k].split()[:2]]
                       for k in range(n)])
    i += n
    m = int(tokens[i].split()[1]); i += 1
    tris = np.array([[int(v) for v in tokens[i + k].split()[1:]]
                     for k in range(m)], dtype=np.int64)
    i += m
    i += 1 + m  # CELL_TYPES header and entries
    assert tokens[i].startswith("POINT_DATA")
    i += 2  # POINT_DATA + VECTORS headers
    disp = np.array([[float(v) for v in tokens[i + k].split()[:2]]
                     for k in range(n)])
    return FieldExport(coords=coords, triangles=tris, displacement=disp)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(config: RunConfig) -> int:
    """Write per-body mesh files and a JSON model manifest."""
    model = build_contact_model(config.model_id, config.resolution, config.mismatch)
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    mesh_files = []
    for b, mesh in enumerate(model.bodies):
        path = out / f"model{config.model_id}_body{b}.mesh"
        write_mesh_text(mesh, path)
        mesh_files.append(path.name)
    manifest = {
        "model": config.model_id,
        "resolution": config.resolution,
        "mismatch": config.mismatch,
        "bodies": [
            {"index": b, "mesh_file": mesh_files[b], "n_nodes": mesh.n_nodes,
             "n_triangles": len(mesh.triangles),
             "material": {"E": model.materials[b][0], "nu": model.materials[b][1]}}
            for b, mesh in enumerate(model.bodies)
        ],
        "surfaces": [
            {"index": i, "slave_body": s.slave_body, "master_body": s.master_body,
             "n_slave_nodes": len(s.slave_nodes),
             "n_master_nodes": len(s.master_nodes)}
            for i, s in enumerate(model.surfaces)
        ],
        "dirichlet": [{"body": b, "tag": tag, "value": list(v)}
                      for b, tag, v in model.dirichlet],
        "tractions": [{"body": b, "tag": tag, "value": list(v)}
                      for b, tag, v in model.tractions],
    }
    (out / f"model{config.model_id}_manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(mesh_files)} mesh files and manifest to {out}")
    return 0


def cmd_solve(config: RunConfig) -> int:
    """Run the full pipeline, write the JSON report and the VTK fields."""
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    assembled = pipeline.assemble_model(config.model_id, config.resolution,
                                        config.mismatch)
    if config.method == "condensed":
        run = pipeline.solve_condensed(assembled, pc=config.preconditioner,
                                       tol=config.tol, maxit=config.maxit)
        report = run.report
        fields = collect_fields(assembled, recovered=run.recovered)
        x_full = run.recovered.x
        if config.dump_matrices:
            ops = run.condensed.operators
            for name, mat in (("A", assembled.saddle.A),
                              ("Ahat", run.condensed.A_hat), ("P", ops.P),
                              ("T", ops.T), ("C", ops.C), ("F", ops.F)):
                save_matrix_market(mat, out / f"{name}.mtx")
    else:
        run = pipeline.solve_saddle(assembled, pc=config.preconditioner,
                                    tol=config.tol, maxit=config.maxit)
        report = run.report
        fields = collect_fields(assembled, x=run.x)
        x_full = run.x
        if config.dump_matrices:
            save_matrix_market(assembled.saddle.A, out / "A.mtx")
    report.extra["model"] = config.model_id
    report.extra["resolution"] = config.resolution
    report.extra["mismatch"] = config.mismatch
    if config.verify:
        x_ref = dense_solve(assembled.saddle.A, assembled.saddle.b)
        scale = float(np.max(np.abs(x_ref))) or 1.0
        report.extra["verify_max_deviation"] = float(
            np.max(np.abs(x_full - x_ref)) / scale)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
    export_vtk(fields, out / "solution.vtk")
    status = "converged" if report.converged else "NOT converged"
    print(f"model {config.model_id} {config.method}+{report.preconditioner}: "
          f"{status} in {report.nit} iterations, "
          f"r_rel = {report.rel_residual_final:.3e}")
    print(f"report: {out / 'report.json'}  fields: {out / 'solution.vtk'}")
    return 0 if report.converged else 2


def cmd_compare(config: RunConfig, runs: list[tuple[str, str]],
                resolutions: list[int]) -> int:
    """One table row per (equation form, preconditioner, resolution)."""
    if not runs:
        raise ConfigurationError("compare needs at least one method:pc run")
    out = config.out_dir
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for resolution in resolutions:
        assembled = pipeline.assemble_model(config.model_id, resolution,
                                            config.mismatch)
        for method, pc in runs:
            if method == "condensed":
                r = pipeline.solve_condensed(assembled, pc=pc, tol=config.tol,
                                             maxit=config.maxit).report
                dofs = r.n
            else:
                r = pipeline.solve_saddle(assembled, pc=pc, tol=config.tol,
                                          maxit=config.maxit).report
                dofs = r.n
            rows.append({
                "equation": method,
                "model": config.model_id,
                "resolution": resolution,
                "dofs": dofs,
                "method": r.method,
                "preconditioner": r.preconditioner,
                "nit": r.nit,
                "converged": r.converged,
                "r_rel": r.rel_residual_final,
                "t_con_s": r.t_con_s,
                "t_sol_s": r.t_sol_s,
                "t_tot_s": r.t_tot_s,
            })
    (out / "compare.json").write_text(json.dumps(rows, indent=2) + "\n")
    with open(out / "compare.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    print(f"{'equation':>10} {'dofs':>8} {'method':>6} {'pc':>6} {'nit':>5} "
          f"{'r_rel':>10} {'t_sol':>8}")
    for row in rows:
        print(f"{row['equation']:>10} {row['dofs']:>8} {row['method']:>6} "
              f"{row['preconditioner']:>6} {row['nit']:>5} "
              f"{row['r_rel']:>10.3e} {row['t_sol_s']:>8.3f}")
    print(f"wrote {out / 'compare.csv'} and {out / 'compare.json'}")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", type=int, required=True,
                        help="benchmark model id: 1, 2 or 3")
    parser.add_argument("--resolution", type=int, default=4,
                        help="master-side cells per unit length")
    parser.add_argument("--mismatch", type=float, default=1.0,
                        help="slave/master surface mesh density ratio")
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--maxit", type=int, default=2000)
    parser.add_argument("--out", type=Path, default=Path("."))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tiedcontact",
        description="2D tied-contact solver: mortar saddle-point assembly "
                    "and DOF-condensation solve")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write mesh files and a model manifest")
    _add_common(gen)

    solve = sub.add_parser("solve", help="assemble and solve one model")
    _add_common(solve)
    solve.add_argument("--method", choices=("condensed", "saddle"),
                       default="condensed")
    solve.add_argument("--pc", choices=("jac", "ssor", "bjac", "simple", "none"),
                       default=None, help="preconditioner (default: ssor for "
                       "condensed, jac for saddle)")
    solve.add_argument("--verify", action="store_true",
                       help="compare against the dense direct oracle")
    solve.add_argument("--dump-matrices", action="store_true",
                       help="write the assembled operators (A, Ahat, P, T, "
                            "C, F) in MatrixMarket format")

    comp = sub.add_parser("compare", help="run several solver configurations")
    _add_common(comp)
    comp.add_argument("--runs", required=True,
                      help="comma-separated method:pc pairs, e.g. "
                           "condensed:ssor,saddle:jac")
    comp.add_argument("--resolutions", default=None,
                      help="comma-separated resolutions for refinement sweeps")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig(
            model_id=args.model, resolution=args.resolution,
            mismatch=args.mismatch,
            method=getattr(args, "method", "condensed"),
            preconditioner=getattr(args, "pc", None),
            tol=args.tol, maxit=args.maxit,
            verify=getattr(args, "verify", False),
            dump_matrices=getattr(args, "dump_matrices", False),
            out_dir=args.out)
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "solve":
            return cmd_solve(config)
        if args.command == "compare":
            runs = []
            for item in args.runs.split(","):
                if not item:
                    continue
                method, _, pc = item.partition(":")
                if method not in ("condensed", "saddle"):
                    raise ConfigurationError(f"unknown method in --runs: {method!r}")
                runs.append((method, pc or ("ssor" if method == "condensed" else "jac")))
            resolutions = ([int(r) for r in args.resolutions.split(",")]
                           if args.resolutions else [args.resolution])
            return cmd_compare(config, runs, resolutions)
        parser.error(f"unknown command {args.command!r}")
    except (ConfigurationError, ValueError, OSError) as exc:
        print(parser.format_usage(), end="", file=sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
