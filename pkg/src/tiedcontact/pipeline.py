"""End-to-end driving: model -> assembled system -> solve -> recovery.

Used by the command-line front end, the acceptance tests and the demo
scripts. Timing follows the reporting convention of the solver comparison:
``t_con`` (condensation, split into the T/C/A_hat/other stages), ``t_sol``
(Krylov solve) and ``t_tot = t_con + t_sol``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import elasticity, krylov, mortar, system
from .condense import (
    CondensedSystem,
    EliminationOperators,
    RecoveredSolution,
    build_projection_matrix,
    build_selector,
    build_transform,
    compute_projections,
    condense,
    recover,
)
from .errors import ConfigurationError
from .krylov import SolveReport
from .mesh import ContactModel, build_contact_model


@dataclass
class AssembledModel:
    """Model plus everything assembled from it."""

    model: ContactModel
    dofmap: elasticity.DofMap
    bodies: list[elasticity.BodySystem]
    mortars: list[mortar.MortarPair]
    saddle: system.SaddleSystem


def dirichlet_node_values(model: ContactModel, body: int) -> tuple[np.ndarray, np.ndarray]:
    """Expand the model's tag-based Dirichlet specs of one body to
    (dofs, values) in global coordinates.

    Contact-surface nodes are excluded: slave DOFs must stay free for the
    elimination, and constraining master contact DOFs would bypass the
    mortar coupling rows. The benchmark geometries only hit this at
    interface corner nodes.
    """
    mesh = model.bodies[body]
    contact = model.contact_nodes(body)
    dofs: list[int] = []
    values: list[float] = []
    for b, tag, value in model.dirichlet:
        if b != body:
            continue
        nodes = [n for n in mesh.nodes_with_tag(tag) if n not in contact]
        if not nodes and not mesh.edges_with_tag(tag):
            raise ValueError(f"no boundary edge carries Dirichlet tag {tag!r}")
        for n in nodes:
            dofs.extend([2 * n, 2 * n + 1])
            values.extend([value[0], value[1]])
    return np.array(dofs, dtype=np.int64), np.array(values)


def assemble(model: ContactModel, constraints=None) -> AssembledModel:
    """Assemble bodies, apply Dirichlet data, build mortar pairs and the
    saddle system.

    ``constraints`` optionally overrides the model's tag-based Dirichlet
    data with a list of (body, dofs, values) triples (DOFs local to the
    body's nodes: 2*node, 2*node+1).
    """
    dofmap = system.partition_dofs(model)
    bodies = []
    for b, mesh in enumerate(model.bodies):
        E, nu = model.materials[b]
        K = elasticity.assemble_stiffness(mesh, E, nu, dofmap, body=b)
        tractions = [(tag, t) for bb, tag, t in model.tractions if bb == b]
        f = elasticity.assemble_loads(mesh, tractions, dofmap, body=b)
        bs = elasticity.BodySystem(K=K, f=f, body=b)
        if constraints is None:
            local_dofs, values = dirichlet_node_values(model, b)
        else:
            parts = [(np.asarray(dfs, dtype=np.int64), np.asarray(vals, dtype=float))
                     for bb, dfs, vals in constraints if bb == b]
            local_dofs = (np.concatenate([p[0] for p in parts]) if parts
                          else np.zeros(0, dtype=np.int64))
            values = (np.concatenate([p[1] for p in parts]) if parts
                      else np.zeros(0))
        if len(local_dofs):
            nodes, comps = local_dofs // 2, local_dofs % 2
            slots = dofmap.node_slot[b][nodes]
            global_dofs = 2 * slots + comps
            bs = elasticity.apply_dirichlet(bs, global_dofs, values, dofmap)
        bodies.append(bs)
    mortars = [mortar.assemble_mortar(surf, model.bodies, surface_index=i)
               for i, surf in enumerate(model.surfaces)]
    saddle = system.assemble_saddle(model, bodies, mortars, dofmap)
    return AssembledModel(model=model, dofmap=dofmap, bodies=bodies,
                          mortars=mortars, saddle=saddle)


def assemble_model(model_id: int, resolution: int, mismatch: float = 1.0,
                   ) -> AssembledModel:
    return assemble(build_contact_model(model_id, resolution, mismatch))


@dataclass
class CondensedRun:
    """Result of the condensed-path solve."""

    assembled: AssembledModel
    condensed: CondensedSystem
    x_hat: np.ndarray
    recovered: RecoveredSolution
    report: SolveReport
    full_rel_residual: float
    timings: dict = field(default_factory=dict)


def condense_system(assembled: AssembledModel, threads: int | None = None,
                    ) -> tuple[CondensedSystem, dict]:
    """Run the elimination with a stage-by-stage timing breakdown."""
    dofmap = assembled.dofmap
    t0 = time.perf_counter()
    factors, p_blocks = compute_projections(assembled.mortars, threads=threads)
    P = build_projection_matrix(dofmap, p_blocks)
    T = build_transform(dofmap, P)
    t_T = time.perf_counter() - t0

    t1 = time.perf_counter()
    C = build_selector(dofmap)
    t_C = time.perf_counter() - t1

    t2 = time.perf_counter()
    F = krylov.finalize_csr(C @ T)
    ops = EliminationOperators(P=P, T=T, C=C, F=F, factors=tuple(factors),
                               dofmap=dofmap)
    condensed = condense(assembled.saddle, ops)
    t_Ahat = time.perf_counter() - t2

    t_other = max(time.perf_counter() - t0 - t_T - t_C - t_Ahat, 0.0)
    timings = {
        "t_con_T_s": t_T,
        "t_con_C_s": t_C,
        "t_con_Ahat_s": t_Ahat,
        "t_con_other_s": t_other,
        "t_con_s": t_T + t_C + t_Ahat + t_other,
    }
    return condensed, timings


def solve_condensed(assembled: AssembledModel, pc: str = "ssor",
                    tol: float = 1e-8, maxit: int = 2000, omega: float = 1.0,
                    threads: int | None = None) -> CondensedRun:
    """Condense, solve with preconditioned CG, and recover the eliminated
    unknowns; the report carries the full-system relative residual."""
    condensed, timings = condense_system(assembled, threads=threads)
    precond = krylov.make_preconditioner(pc, condensed.A_hat, omega=omega)
    x_hat, report = krylov.cg(condensed.A_hat, condensed.b_hat,
                              precond=precond, tol=tol, maxit=maxit)
    recovered = recover(x_hat, assembled.saddle, condensed.operators)
    b = assembled.saddle.b
    norm_b = np.linalg.norm(b)
    full_rel = float(np.linalg.norm(b - assembled.saddle.A @ recovered.x)
                     / (norm_b if norm_b > 0 else 1.0))
    report.t_con_s = timings["t_con_s"]
    report.t_tot_s = report.t_con_s + report.t_sol_s
    report.extra.update(timings)
    report.extra["full_system_rel_residual"] = full_rel
    report.extra["equation"] = "condensed"
    return CondensedRun(assembled=assembled, condensed=condensed, x_hat=x_hat,
                        recovered=recovered, report=report,
                        full_rel_residual=full_rel, timings=timings)


@dataclass
class SaddleRun:
    """Result of the saddle-path (baseline) solve."""

    assembled: AssembledModel
    x: np.ndarray
    report: SolveReport


def solve_saddle(assembled: AssembledModel, pc: str = "jac", tol: float = 1e-8,
                 maxit: int = 2000, restart: int = 50) -> SaddleRun:
    """Solve the raw saddle system with restarted GCR (baseline path)."""
    saddle = assembled.saddle
    if pc == "simple":
        precond = krylov.make_preconditioner(
            pc, saddle.A, saddle_blocks=(saddle.K, saddle.G))
    else:
        precond = krylov.make_preconditioner(pc, saddle.A)
    x, report = krylov.gcr(saddle.A, saddle.b, precond=precond, tol=tol,
                           maxit=maxit, restart=restart)
    report.extra["equation"] = "saddle"
    return SaddleRun(assembled=assembled, x=x, report=report)


def run(model_id: int, resolution: int, mismatch: float = 1.0,
        method: str = "condensed", pc: str | None = None, tol: float = 1e-8,
        maxit: int = 2000, threads: int | None = None):
    """One-call convenience wrapper: build, assemble and solve."""
    assembled = assemble_model(model_id, resolution, mismatch)
    if method == "condensed":
        return solve_condensed(assembled, pc=pc or "ssor", tol=tol,
                               maxit=maxit, threads=threads)
    if method == "saddle":
        return solve_saddle(assembled, pc=pc or "jac", tol=tol, maxit=maxit)
    raise ConfigurationError(f"unknown method {method!r}")
