"""Mortar coupling on straight interfaces: segment projection and the
surface matrices D (slave-slave) and M (slave-master).

The multiplier basis equals the slave displacement trace basis (standard
mortar), so D is the 1D P1 mass matrix of the slave surface: square, block
tridiagonal in spatial node order, with every block a scalar multiple of the
2x2 identity. The slave-to-master map is the shared arc-length
parameterization of the interface line; integration runs segment by
segment, where a segment is a slave sub-interval covered by exactly one
master element.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ContactSearchError, GeometryError
from .krylov import CsrMatrix, finalize_csr
from .mesh import Mesh2D, SurfaceSpec

# Two-point Gauss on [-1, 1]: exact for cubics, so exact for the quadratic
# integrands Phi_j * N_k of two linear bases.
GAUSS_RULES = {
    2: (np.array([-1.0, 1.0]) / np.sqrt(3.0), np.array([1.0, 1.0])),
    4: (np.array([-np.sqrt(3.0 / 7.0 + 2.0 / 7.0 * np.sqrt(1.2)),
                  -np.sqrt(3.0 / 7.0 - 2.0 / 7.0 * np.sqrt(1.2)),
                  np.sqrt(3.0 / 7.0 - 2.0 / 7.0 * np.sqrt(1.2)),
                  np.sqrt(3.0 / 7.0 + 2.0 / 7.0 * np.sqrt(1.2))]),
        np.array([(18.0 - np.sqrt(30.0)) / 36.0, (18.0 + np.sqrt(30.0)) / 36.0,
                  (18.0 + np.sqrt(30.0)) / 36.0, (18.0 - np.sqrt(30.0)) / 36.0])),
}

PARAM_TOL = 1e-12


@dataclass(frozen=True)
class MortarSegment:
    """One integration cell: slave arc-length interval [a, b] lying in a
    single slave element and mapping into a single master element."""

    slave_element: int
    a: float
    b: float
    master_element: int


@dataclass(frozen=True)
class MortarPair:
    """Assembled mortar matrices of one contact surface.

    ``d_scalar`` and ``m_scalar`` hold the scalar entries D_jk and M_jl; the
    DOF-level block matrices are their Kronecker products with the 2x2
    identity (see :meth:`d_block` / :meth:`m_block`).
    """

    surface: int
    slave_nodes: np.ndarray
    master_nodes: np.ndarray
    d_scalar: CsrMatrix
    m_scalar: CsrMatrix

    @property
    def n_slave(self) -> int:
        return len(self.slave_nodes)

    @property
    def n_master(self) -> int:
        return len(self.master_nodes)

    def d_block(self) -> CsrMatrix:
        return finalize_csr(sp.kron(self.d_scalar, sp.identity(2)))

    def m_block(self) -> CsrMatrix:
        return finalize_csr(sp.kron(self.m_scalar, sp.identity(2)))


def _line_params(coords: np.ndarray, line) -> np.ndarray:
    point, direction = line
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    return (coords - np.asarray(point, dtype=float)) @ direction


def project_segments(slave_params: np.ndarray, master_params: np.ndarray,
                     ) -> list[MortarSegment]:
    """Cut the slave arc-length range at every master node parameter.

    Returns segments covering the overlap of the two parameter ranges, each
    inside exactly one slave and one master element. Raises
    ContactSearchError on empty overlap and GeometryError on non-monotone
    parameters.
    """
    s = np.asarray(slave_params, dtype=float)
    m = np.asarray(master_params, dtype=float)
    if np.any(np.diff(s) <= 0.0):
        raise GeometryError("slave surface parameters must be strictly increasing")
    if np.any(np.diff(m) <= 0.0):
        raise GeometryError("master surface parameters must be strictly increasing")
    span = max(s[-1] - s[0], m[-1] - m[0])
    tol = PARAM_TOL * max(span, 1.0)
    lo, hi = max(s[0], m[0]), min(s[-1], m[-1])
    if hi - lo <= tol:
        raise ContactSearchError(
            f"slave and master surfaces do not overlap ([{s[0]}, {s[-1]}] vs "
            f"[{m[0]}, {m[-1]}])")
    cuts = np.concatenate([s, m])
    cuts = cuts[(cuts >= lo - tol) & (cuts <= hi + tol)]
    cuts = np.union1d(np.clip(cuts, lo, hi), [lo, hi])
    # merge breakpoints that coincide within tolerance
    merged = [cuts[0]]
    for c in cuts[1:]:
        if c - merged[-1] > tol:
            merged.append(c)
    segments = []
    for a, b in zip(merged[:-1], merged[1:]):
        mid = 0.5 * (a + b)
        se = int(np.clip(np.searchsorted(s, mid) - 1, 0, len(s) - 2))
        me = int(np.clip(np.searchsorted(m, mid) - 1, 0, len(m) - 2))
        segments.append(MortarSegment(slave_element=se, a=float(a), b=float(b),
                                      master_element=me))
    return segments


def assemble_mortar(surface: SurfaceSpec, meshes: list[Mesh2D],
                    surface_index: int = 0, n_gauss: int = 2) -> MortarPair:
    """Assemble D and M for one surface by per-segment Gauss quadrature.

    The master side must fully cover the slave side (the benchmark models
    always do); partial overlap is rejected.
    """
    slave_coords = meshes[surface.slave_body].nodes[surface.slave_nodes]
    master_coords = meshes[surface.master_body].nodes[surface.master_nodes]
    s = _line_params(slave_coords, surface.line)
    m = _line_params(master_coords, surface.line)
    span = max(s[-1] - s[0], m[-1] - m[0])
    tol = PARAM_TOL * max(span, 1.0)
    if m[0] > s[0] + tol or m[-1] < s[-1] - tol:
        raise ContactSearchError(
            "master surface does not cover the slave surface "
            f"([{m[0]}, {m[-1]}] vs [{s[0]}, {s[-1]}])")
    segments = project_segments(s, m)
    pts, wts = GAUSS_RULES[n_gauss]

    n_s, n_m = len(s), len(m)
    D = np.zeros((n_s, n_s))
    M = np.zeros((n_s, n_m))
    for seg in segments:
        a, b = seg.a, seg.b
        gp = 0.5 * (a + b) + 0.5 * (b - a) * pts
        gw = 0.5 * (b - a) * wts
        js = seg.slave_element
        jm = seg.master_element
        hs = s[js + 1] - s[js]
        hm = m[jm + 1] - m[jm]
        # linear trace shape functions on the slave / master elements
        ns = np.stack([(s[js + 1] - gp) / hs, (gp - s[js]) / hs])
        nm = np.stack([(m[jm + 1] - gp) / hm, (gp - m[jm]) / hm])
        loc_d = (ns * gw) @ ns.T
        D[js:js + 2, js:js + 2] += 0.5 * (loc_d + loc_d.T)
        M[js:js + 2, jm:jm + 2] += (ns * gw) @ nm.T
    return MortarPair(surface=surface_index,
                      slave_nodes=np.asarray(surface.slave_nodes),
                      master_nodes=np.asarray(surface.master_nodes),
                      d_scalar=finalize_csr(sp.csr_matrix(D)),
                      m_scalar=finalize_csr(sp.csr_matrix(M)))


def verify_tridiagonal(D) -> tuple[bool, list[tuple[int, int]]]:
    """Check that every nonzero block sits on the three central diagonals.

    Returns (ok, offending (row, col) positions); diagnostic only.
    """
    coo = sp.coo_matrix(D)
    bad = [(int(i), int(j)) for i, j, v in zip(coo.row, coo.col, coo.data)
           if v != 0.0 and abs(int(i) - int(j)) > 1]
    return (len(bad) == 0, bad)


def tridiagonal_parts(D: CsrMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extract (diag, lower, upper) arrays from a tridiagonal scalar matrix.

    Raises GeometryError if entries fall outside the three diagonals.
    """
    ok, bad = verify_tridiagonal(D)
    if not ok:
        raise GeometryError(f"matrix is not tridiagonal; offending entries {bad[:5]}")
    A = sp.csr_matrix(D)
    n = A.shape[0]
    diag = A.diagonal()
    lower = A.diagonal(-1) if n > 1 else np.zeros(0)
    upper = A.diagonal(1) if n > 1 else np.zeros(0)
    return diag, lower, upper
