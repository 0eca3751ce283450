"""P1 linear-elasticity assembly (plane strain) and Dirichlet handling.

Per-body stiffness matrices are assembled directly in global displacement
coordinates so the multi-body block structure is a plain sum. Dirichlet
conditions are applied by symmetric row/column elimination with a unit
diagonal, which keeps every assembled operator symmetric and preserves the
positive-definiteness the condensation step relies on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, GeometryError
from .krylov import CsrMatrix, finalize_csr
from .mesh import Mesh2D

NDIM = 2


@dataclass(frozen=True)
class DofMap:
    """Global DOF layout over the node sets (N, M, S) plus multipliers.

    ``node_slot[body][local_node]`` is the global node slot; DOFs of a node
    slot g are (2g, 2g+1). Slots are ordered: all remaining nodes N
    (body-major), then master contact nodes M (surface-major, spatial
    order), then slave contact nodes S (the same way). Multiplier DOFs
    follow all displacement DOFs, one 2-vector per slave node, so each
    surface contributes 2 * n_slave multipliers.
    """

    node_slot: tuple
    n_count: int            # DOF counts of the three displacement sets
    m_count: int
    s_count: int
    surface_slave: tuple = ()    # per surface: slice into the S DOF range
    surface_master: tuple = ()   # per surface: slice into the M DOF range
    surface_lambda: tuple = ()   # per surface: slice into the multiplier range

    @property
    def n_disp(self) -> int:
        return self.n_count + self.m_count + self.s_count

    @property
    def n_lambda(self) -> int:
        return self.s_count

    @property
    def n_total(self) -> int:
        return self.n_disp + self.n_lambda

    @property
    def n_range(self) -> slice:
        return slice(0, self.n_count)

    @property
    def m_range(self) -> slice:
        return slice(self.n_count, self.n_count + self.m_count)

    @property
    def s_range(self) -> slice:
        return slice(self.n_count + self.m_count, self.n_disp)

    @property
    def lambda_range(self) -> slice:
        return slice(self.n_disp, self.n_total)

    def dofs_of(self, body: int, nodes) -> np.ndarray:
        """Interleaved (x, y) DOF indices of the given local nodes."""
        slots = self.node_slot[body][np.asarray(nodes, dtype=np.int64)]
        return np.column_stack([2 * slots, 2 * slots + 1]).ravel()

    def body_dofs(self, body: int) -> np.ndarray:
        return self.dofs_of(body, np.arange(len(self.node_slot[body])))

    def is_slave_dof(self, dofs) -> np.ndarray:
        dofs = np.asarray(dofs)
        lo = self.n_count + self.m_count
        return (dofs >= lo) & (dofs < self.n_disp)

    @classmethod
    def single_body(cls, mesh: Mesh2D) -> "DofMap":
        """Trivial map for a standalone mesh: every node lands in N."""
        slots = np.arange(mesh.n_nodes, dtype=np.int64)
        return cls(node_slot=(slots,), n_count=2 * mesh.n_nodes,
                   m_count=0, s_count=0)


@dataclass(frozen=True)
class BodySystem:
    """One body's stiffness matrix and load vector in global coordinates."""

    K: CsrMatrix
    f: np.ndarray
    body: int = 0


# ---------------------------------------------------------------------------
# Element and global assembly
# ---------------------------------------------------------------------------

def _plane_strain_matrix(E: float, nu: float) -> np.ndarray:
    c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return c * np.array([
        [1.0 - nu, nu, 0.0],
        [nu, 1.0 - nu, 0.0],
        [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)],
    ])


def element_stiffness(coords, E: float, nu: float) -> np.ndarray:
    """6x6 stiffness of a P1 triangle (plane strain), K_e = A B^T D B.

    The result is symmetrized exactly and positive semidefinite with the
    three rigid-body modes in its null space.
    """
    p = np.asarray(coords, dtype=float)
    if p.shape != (3, 2):
        raise ValueError(f"expected 3 vertex coordinates, got shape {p.shape}")
    area2 = ((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1])
             - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
    scale = max(np.abs(p).max(), 1.0)
    if area2 <= 1e-14 * scale * scale:
        raise GeometryError(f"degenerate triangle, signed area {0.5 * area2:.3e}")
    # shape-function gradients: grad N_i = (b_i, c_i) / (2A)
    b = np.array([p[1, 1] - p[2, 1], p[2, 1] - p[0, 1], p[0, 1] - p[1, 1]])
    c = np.array([p[2, 0] - p[1, 0], p[0, 0] - p[2, 0], p[1, 0] - p[0, 0]])
    B = np.zeros((3, 6))
    B[0, 0::2] = b
    B[1, 1::2] = c
    B[2, 0::2] = c
    B[2, 1::2] = b
    B /= area2
    Ke = 0.5 * area2 * (B.T @ _plane_strain_matrix(E, nu) @ B)
    return 0.5 * (Ke + Ke.T)


def assemble_stiffness(mesh: Mesh2D, E: float, nu: float, dofmap: DofMap,
                       body: int = 0) -> CsrMatrix:
    """Scatter-add element stiffness matrices into the global pattern.

    The result is sized to the full displacement DOF count of ``dofmap``
    with entries only in rows/columns of ``body``; summing body matrices
    therefore yields the block-diagonal multi-body stiffness.
    """
    n = dofmap.n_disp
    ntri = len(mesh.triangles)
    rows = np.empty(36 * ntri, dtype=np.int64)
    cols = np.empty(36 * ntri, dtype=np.int64)
    data = np.empty(36 * ntri)
    for t, tri in enumerate(mesh.triangles):
        Ke = element_stiffness(mesh.nodes[tri], E, nu)
        dofs = dofmap.dofs_of(body, tri)
        rows[36 * t:36 * (t + 1)] = np.repeat(dofs, 6)
        cols[36 * t:36 * (t + 1)] = np.tile(dofs, 6)
        data[36 * t:36 * (t + 1)] = Ke.ravel()
    return finalize_csr(sp.coo_matrix((data, (rows, cols)), shape=(n, n)))


def assemble_loads(mesh: Mesh2D, tractions, dofmap: DofMap,
                   body: int = 0) -> np.ndarray:
    """Consistent P1 edge loads for constant tractions.

    ``tractions`` is a list of (tag, (tx, ty)); each tagged edge of length L
    contributes t*L/2 to both endpoint DOF pairs.
    """
    f = np.zeros(dofmap.n_disp)
    for tag, t in tractions:
        edges = mesh.edges_with_tag(tag)
        if not edges:
            raise ValueError(f"no boundary edge carries traction tag {tag!r}")
        t = np.asarray(t, dtype=float)
        for a, b in edges:
            length = float(np.linalg.norm(mesh.nodes[b] - mesh.nodes[a]))
            half = 0.5 * length * t
            f[dofmap.dofs_of(body, [a])] += half
            f[dofmap.dofs_of(body, [b])] += half
    return f


def apply_dirichlet(system: BodySystem, dofs, values,
                    dofmap: DofMap | None = None) -> BodySystem:
    """Symmetric Dirichlet elimination: zero the constrained rows and
    columns, put 1 on the diagonal, and move the eliminated columns times
    the prescribed values to the right-hand side.

    Constraining a slave-surface DOF is rejected: the condensation step
    needs the full slave rows available for elimination.
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if dofs.shape != values.shape:
        raise ValueError("constrained DOFs and values must align")
    if len(np.unique(dofs)) != len(dofs):
        raise ValueError("duplicate constrained DOF")
    if not np.all(np.isfinite(values)):
        raise ValueError("prescribed values must be finite")
    if dofmap is not None and np.any(dofmap.is_slave_dof(dofs)):
        raise ConfigurationError(
            "Dirichlet constraint on a slave contact-surface DOF is unsupported")
    K, f = system.K, system.f
    n = K.shape[0]
    if dofs.size and (dofs.min() < 0 or dofs.max() >= n):
        raise ValueError("constrained DOF out of range")
    prescribed = np.zeros(n)
    prescribed[dofs] = values
    mask = np.ones(n)
    mask[dofs] = 0.0
    f_new = mask * (f - K @ prescribed)
    f_new[dofs] = values
    keep = sp.diags(mask)
    K_new = finalize_csr(keep @ K @ keep + sp.diags(1.0 - mask))
    return BodySystem(K=K_new, f=f_new, body=system.body)
