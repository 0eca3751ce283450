"""Global DOF partitioning and assembly of the saddle-point system
[[K, G^T], [G, 0]] x = [f, 0] for multi-body tied contact.

The global unknown ordering is (N, M, S, lambda): remaining nodes, master
contact nodes, slave contact nodes, multipliers. Within the S, M and lambda
ranges, surfaces are concatenated in surface order and nodes in spatial
order, so the global mortar blocks D and M are block diagonal over surfaces
with tridiagonal (scalar x identity) surface blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .elasticity import BodySystem, DofMap
from .errors import ConfigurationError
from .krylov import CsrMatrix, finalize_csr
from .mesh import ContactModel
from .mortar import MortarPair


def partition_dofs(model: ContactModel) -> DofMap:
    """Segregate all nodes into the sets N, M, S and lay out global DOFs.

    A node may belong to at most one contact surface (and only one side of
    it); other configurations raise ConfigurationError.
    """
    n_bodies = len(model.bodies)
    role = [np.full(mesh.n_nodes, -1, dtype=np.int64) for mesh in model.bodies]
    SLAVE, MASTER = 0, 1
    for si, surf in enumerate(model.surfaces):
        for node in surf.slave_nodes:
            if role[surf.slave_body][node] != -1:
                raise ConfigurationError(
                    f"node {int(node)} of body {surf.slave_body} appears in two "
                    "contact surfaces")
            role[surf.slave_body][node] = SLAVE
        for node in surf.master_nodes:
            if role[surf.master_body][node] != -1:
                raise ConfigurationError(
                    f"node {int(node)} of body {surf.master_body} appears in two "
                    "contact surfaces")
            role[surf.master_body][node] = MASTER

    node_slot = [np.full(mesh.n_nodes, -1, dtype=np.int64) for mesh in model.bodies]
    slot = 0
    for b in range(n_bodies):
        free = np.nonzero(role[b] == -1)[0]
        node_slot[b][free] = slot + np.arange(len(free))
        slot += len(free)
    n_count = 2 * slot

    surface_master = []
    for surf in model.surfaces:
        start = slot
        for node in surf.master_nodes:
            node_slot[surf.master_body][node] = slot
            slot += 1
        surface_master.append(slice(2 * start - n_count, 2 * slot - n_count))
    m_count = 2 * slot - n_count

    surface_slave = []
    s_base = slot
    for surf in model.surfaces:
        start = slot
        for node in surf.slave_nodes:
            node_slot[surf.slave_body][node] = slot
            slot += 1
        surface_slave.append(slice(2 * (start - s_base), 2 * (slot - s_base)))
    s_count = 2 * (slot - s_base)

    surface_lambda = list(surface_slave)  # one multiplier pair per slave node

    return DofMap(node_slot=tuple(node_slot), n_count=n_count, m_count=m_count,
                  s_count=s_count, surface_slave=tuple(surface_slave),
                  surface_master=tuple(surface_master),
                  surface_lambda=tuple(surface_lambda))


@dataclass(frozen=True)
class SaddleSystem:
    """Assembled saddle-point system with block-range bookkeeping.

    ``A`` is the full symmetric matrix, ``b`` the right-hand side (zero in
    the multiplier rows: the tied constraint is homogeneous), ``K`` and
    ``G`` the displacement and constraint blocks used by preconditioners and
    recovery.
    """

    A: CsrMatrix
    b: np.ndarray
    dofmap: DofMap
    surfaces: list[MortarPair]
    K: CsrMatrix
    G: CsrMatrix

    def block(self, rows: slice, cols: slice) -> CsrMatrix:
        return finalize_csr(self.A[rows, cols])

    @cached_property
    def K_NN(self) -> CsrMatrix:
        return self.block(self.dofmap.n_range, self.dofmap.n_range)

    @cached_property
    def K_NM(self) -> CsrMatrix:
        return self.block(self.dofmap.n_range, self.dofmap.m_range)

    @cached_property
    def K_NS(self) -> CsrMatrix:
        return self.block(self.dofmap.n_range, self.dofmap.s_range)

    @cached_property
    def K_MM(self) -> CsrMatrix:
        return self.block(self.dofmap.m_range, self.dofmap.m_range)

    @cached_property
    def K_MS(self) -> CsrMatrix:
        return self.block(self.dofmap.m_range, self.dofmap.s_range)

    @cached_property
    def K_SS(self) -> CsrMatrix:
        return self.block(self.dofmap.s_range, self.dofmap.s_range)

    @cached_property
    def K_SN(self) -> CsrMatrix:
        return self.block(self.dofmap.s_range, self.dofmap.n_range)

    @cached_property
    def K_MN(self) -> CsrMatrix:
        return self.block(self.dofmap.m_range, self.dofmap.n_range)

    @property
    def f_N(self) -> np.ndarray:
        return self.b[self.dofmap.n_range]

    @property
    def f_M(self) -> np.ndarray:
        return self.b[self.dofmap.m_range]

    @property
    def f_S(self) -> np.ndarray:
        return self.b[self.dofmap.s_range]


def assemble_saddle(model: ContactModel, bodies: list[BodySystem],
                    mortars: list[MortarPair], dofmap: DofMap) -> SaddleSystem:
    """Form A = [[K, G^T], [G, 0]] and b = [f, 0].

    ``bodies`` carry the per-body stiffness blocks in global coordinates
    (Dirichlet already applied); ``mortars`` supply D and M per surface. The
    multiplier rows are stored as [0 | -M | D] over the (N, M, S) column
    ranges.
    """
    n_disp, n_lam = dofmap.n_disp, dofmap.n_lambda
    if len(bodies) != len(model.bodies) or len(mortars) != len(model.surfaces):
        raise ValueError("assembly inputs do not match the model layout")
    K = bodies[0].K
    f = bodies[0].f.copy()
    for bs in bodies[1:]:
        K = K + bs.K
        f = f + bs.f
    K = finalize_csr(K)
    if K.shape != (n_disp, n_disp):
        raise ValueError(f"stiffness block is {K.shape}, expected {(n_disp, n_disp)}")

    rows, cols, data = [], [], []
    m_off = dofmap.m_range.start
    s_off = dofmap.s_range.start
    for si, pair in enumerate(mortars):
        lam = dofmap.surface_lambda[si]
        d = sp.coo_matrix(pair.d_block())
        if d.shape[0] != lam.stop - lam.start:
            raise ValueError(f"mortar pair {si} does not match the DOF layout")
        rows.append(lam.start + d.row)
        cols.append(s_off + dofmap.surface_slave[si].start + d.col)
        data.append(d.data)
        m = sp.coo_matrix(pair.m_block())
        rows.append(lam.start + m.row)
        cols.append(m_off + dofmap.surface_master[si].start + m.col)
        data.append(-m.data)
    if rows:
        G = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_lam, n_disp))
    else:
        G = sp.coo_matrix((n_lam, n_disp))
    G = finalize_csr(G)

    A = finalize_csr(sp.bmat([[K, G.T], [G, None]], format="csr"))
    b = np.concatenate([f, np.zeros(n_lam)])
    return SaddleSystem(A=A, b=b, dofmap=dofmap, surfaces=list(mortars), K=K, G=G)
