"""2D tied-contact solver: mortar saddle-point assembly and a
DOF-condensation solve path (block-Thomas elimination of the multipliers
and slave displacements, preconditioned CG on the condensed SPD system),
with a GCR saddle-point baseline for comparison."""

from .condense import (
    CondensedSystem,
    EliminationOperators,
    RecoveredSolution,
    ThomasFactors,
    build_elimination,
    condense,
    condensed_blocks,
    recover,
    surface_projection,
    thomas_factor,
    thomas_solve,
    thomas_solve_transpose,
)
from .elasticity import (
    BodySystem,
    DofMap,
    apply_dirichlet,
    assemble_loads,
    assemble_stiffness,
    element_stiffness,
)
from .krylov import (
    CsrMatrix,
    SolveReport,
    cg,
    dense_solve,
    gcr,
    load_matrix_market,
    make_preconditioner,
    save_matrix_market,
    sparse_triple_product,
    spmv,
)
from .mesh import (
    ContactModel,
    Mesh2D,
    SurfaceSpec,
    build_contact_model,
    extract_surface_nodes,
    generate_rect_mesh,
    read_mesh_text,
    write_mesh_text,
)
from .mortar import (
    MortarPair,
    MortarSegment,
    assemble_mortar,
    project_segments,
    verify_tridiagonal,
)
from .pipeline import (
    assemble,
    assemble_model,
    solve_condensed,
    solve_saddle,
)
from .system import SaddleSystem, assemble_saddle, partition_dofs

__version__ = "0.1.0"

__all__ = [
    "BodySystem", "CondensedSystem", "ContactModel", "CsrMatrix", "DofMap",
    "EliminationOperators", "Mesh2D", "MortarPair", "MortarSegment",
    "RecoveredSolution", "SaddleSystem", "SolveReport", "SurfaceSpec",
    "ThomasFactors", "apply_dirichlet", "assemble", "assemble_loads",
    "assemble_model", "assemble_mortar", "assemble_saddle",
    "assemble_stiffness", "build_contact_model", "build_elimination", "cg",
    "condense", "condensed_blocks", "dense_solve", "element_stiffness",
    "extract_surface_nodes", "gcr", "generate_rect_mesh",
    "load_matrix_market", "make_preconditioner", "partition_dofs",
    "project_segments", "read_mesh_text", "recover", "save_matrix_market",
    "solve_condensed", "solve_saddle", "sparse_triple_product", "spmv",
    "surface_projection", "thomas_factor", "thomas_solve",
    "thomas_solve_transpose", "verify_tridiagonal", "write_mesh_text",
]
