"""DOF condensation: eliminate multipliers and slave displacements.

The multiplier rows give lambda = D^{-T}(f_S - K_SN d_N - K_SS d_S) and the
constraint rows give d_S = P d_M with P = D^{-1} M. Because every mortar
block is a scalar multiple of the 2x2 identity and D is block tridiagonal
in spatial node order, D P = M is solved *exactly* by a scalar Thomas
factorization D = L U applied to block rows (each block row is two scalar
rows; no 2x2 inverses are ever formed).

The same elimination in matrix form: a congruence transform T (unit
diagonal, P^T in the (M, S) block) followed by a row selector C onto the
(N, M) unknowns gives the elimination matrix F = C T; the condensed system
A_hat = F A F^T, b_hat = F b is symmetric positive definite whenever the
saddle matrix is nonsingular and the body stiffness blocks are positive
semidefinite.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .elasticity import DofMap
from .errors import SingularPivotError
from .krylov import CsrMatrix, finalize_csr, sparse_triple_product
from .mortar import MortarPair, tridiagonal_parts
from .system import SaddleSystem

PIVOT_TOL = 1e-14


@dataclass(frozen=True)
class ThomasFactors:
    """Scalar LU factors of a tridiagonal matrix: unit-lower multipliers
    ``l`` (n-1), pivots ``u`` (n) and the unchanged superdiagonal (n-1)."""

    l: np.ndarray
    u: np.ndarray
    super: np.ndarray

    @property
    def n(self) -> int:
        return len(self.u)


def thomas_factor(diag: np.ndarray, lower: np.ndarray,
                  upper: np.ndarray) -> ThomasFactors:
    """LU-factor a tridiagonal matrix without pivoting.

    u_1 = d_1; l_i = a_i / u_{i-1}, u_i = d_i - l_i c_{i-1} for i >= 2.
    A pivot below 1e-14 * max|entry| raises SingularPivotError (the surface
    mass matrices this runs on are diagonally dominant, so a tiny pivot
    means broken input, not a regime to push through).
    """
    d = np.asarray(diag, dtype=float)
    a = np.asarray(lower, dtype=float)
    c = np.asarray(upper, dtype=float)
    n = len(d)
    if n < 1 or len(a) != n - 1 or len(c) != n - 1:
        raise ValueError("inconsistent tridiagonal band lengths")
    scale = max(np.abs(d).max(initial=0.0), np.abs(a).max(initial=0.0),
                np.abs(c).max(initial=0.0))
    tol = PIVOT_TOL * scale
    u = np.empty(n)
    l = np.empty(max(n - 1, 0))
    u[0] = d[0]
    if abs(u[0]) <= tol:
        raise SingularPivotError(f"pivot u_1 = {u[0]:.3e} below tolerance")
    for i in range(1, n):
        l[i - 1] = a[i - 1] / u[i - 1]
        u[i] = d[i] - l[i - 1] * c[i - 1]
        if abs(u[i]) <= tol:
            raise SingularPivotError(f"pivot u_{i + 1} = {u[i]:.3e} below tolerance")
    return ThomasFactors(l=l, u=u, super=c.copy())


def thomas_solve(factors: ThomasFactors, rhs: np.ndarray) -> np.ndarray:
    """Solve (L U) X = RHS for all right-hand-side columns at once.

    Forward sweep Y_i = RHS_i - l_i Y_{i-1}, then backward sweep
    X_i = (Y_i - c_i X_{i+1}) / u_i. Exact up to round-off; works the same
    whether rows are scalar node rows or expanded block (DOF) rows.
    """
    b = np.array(rhs, dtype=float)
    single = b.ndim == 1
    if single:
        b = b[:, None]
    n = factors.n
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, factors expect {n}")
    for i in range(1, n):
        b[i] -= factors.l[i - 1] * b[i - 1]
    b[n - 1] /= factors.u[n - 1]
    for i in range(n - 2, -1, -1):
        b[i] = (b[i] - factors.super[i] * b[i + 1]) / factors.u[i]
    return b[:, 0] if single else b


def thomas_solve_transpose(factors: ThomasFactors, rhs: np.ndarray) -> np.ndarray:
    """Solve (L U)^T X = RHS reusing the stored factors (U^T then L^T)."""
    b = np.array(rhs, dtype=float)
    single = b.ndim == 1
    if single:
        b = b[:, None]
    n = factors.n
    if b.shape[0] != n:
        raise ValueError(f"rhs has {b.shape[0]} rows, factors expect {n}")
    b[0] /= factors.u[0]
    for i in range(1, n):
        b[i] = (b[i] - factors.super[i - 1] * b[i - 1]) / factors.u[i]
    for i in range(n - 2, -1, -1):
        b[i] -= factors.l[i] * b[i + 1]
    return b[:, 0] if single else b


def surface_projection(pair: MortarPair) -> tuple[ThomasFactors, np.ndarray]:
    """Factor a surface's D and solve D P = M for the scalar P block."""
    diag, lower, upper = tridiagonal_parts(pair.d_scalar)
    factors = thomas_factor(diag, lower, upper)
    p_scalar = thomas_solve(factors, pair.m_scalar.toarray())
    return factors, p_scalar


def compute_projections(mortars: list[MortarPair], threads: int | None = None,
                        ) -> tuple[list[ThomasFactors], list[np.ndarray]]:
    """Run :func:`surface_projection` for every surface.

    Surfaces are independent, so they may run concurrently; ``threads``
    defaults to the MC_THREADS environment variable (1 = sequential).
    Results come back in surface order either way.
    """
    if threads is None:
        threads = int(os.environ.get("MC_THREADS", "1"))
    if threads > 1 and len(mortars) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(surface_projection, mortars))
    else:
        results = [surface_projection(pair) for pair in mortars]
    factors = [r[0] for r in results]
    p_blocks = [r[1] for r in results]
    return factors, p_blocks


@dataclass(frozen=True)
class EliminationOperators:
    """The sparse operators of the elimination: block-diagonal P, the
    congruence transform T, the row selector C, and F = C T."""

    P: CsrMatrix
    T: CsrMatrix
    C: CsrMatrix
    F: CsrMatrix
    factors: tuple
    dofmap: DofMap


def build_projection_matrix(dofmap: DofMap, p_blocks: list[np.ndarray]) -> CsrMatrix:
    """Global P: block diagonal over surfaces, each scalar block expanded by
    the 2x2 identity (one block per contact surface)."""
    nM, nS = dofmap.m_count, dofmap.s_count
    if len(p_blocks) != len(dofmap.surface_slave):
        raise ValueError(f"expected {len(dofmap.surface_slave)} P blocks, "
                         f"got {len(p_blocks)}")
    if p_blocks:
        expanded = [sp.kron(sp.csr_matrix(p), sp.identity(2)) for p in p_blocks]
        P = finalize_csr(sp.block_diag(expanded, format="csr"))
    else:
        P = sp.csr_matrix((0, nM))
    if P.shape != (nS, nM):
        raise ValueError(f"P is {P.shape}, expected {(nS, nM)}")
    return P


def build_transform(dofmap: DofMap, P: CsrMatrix) -> CsrMatrix:
    """The congruence transform T: identity plus P^T in the (M, S) block.

    Unit block lower-triangular when rows/columns are read in the
    (S, N, M, lambda) order.
    """
    n_tot = dofmap.n_total
    nN, nM = dofmap.n_count, dofmap.m_count
    pt = sp.coo_matrix(P.T)
    T = sp.coo_matrix(
        (np.concatenate([np.ones(n_tot), pt.data]),
         (np.concatenate([np.arange(n_tot), nN + pt.row]),
          np.concatenate([np.arange(n_tot), nN + nM + pt.col]))),
        shape=(n_tot, n_tot))
    return finalize_csr(T)


def build_selector(dofmap: DofMap) -> CsrMatrix:
    """The row selector C: one unit entry per row, keeping N then M DOFs."""
    n_keep = dofmap.n_count + dofmap.m_count
    sel = np.arange(n_keep)
    return finalize_csr(sp.coo_matrix(
        (np.ones(n_keep), (sel, sel)), shape=(n_keep, dofmap.n_total)))


def build_elimination(dofmap: DofMap, p_blocks: list[np.ndarray],
                      factors: list[ThomasFactors] | None = None,
                      ) -> EliminationOperators:
    """Assemble P, T, C and the elimination matrix F = C T.

    With no surfaces, F degenerates to the identity on the (N, M) DOFs and
    the condensed system equals the assembled stiffness.
    """
    P = build_projection_matrix(dofmap, p_blocks)
    T = build_transform(dofmap, P)
    C = build_selector(dofmap)
    F = finalize_csr(C @ T)
    return EliminationOperators(P=P, T=T, C=C, F=F,
                                factors=tuple(factors or ()), dofmap=dofmap)


@dataclass(frozen=True)
class CondensedSystem:
    """The condensed SPD system A_hat x_hat = b_hat plus everything needed
    to recover the eliminated unknowns."""

    A_hat: CsrMatrix
    b_hat: np.ndarray
    operators: EliminationOperators
    saddle: SaddleSystem


def condense(saddle: SaddleSystem, ops: EliminationOperators) -> CondensedSystem:
    """Form A_hat = F A F^T and b_hat = F b by exact sparse products."""
    if ops.F.shape[1] != saddle.A.shape[0]:
        raise ValueError("elimination operators do not match the saddle system")
    A_hat = sparse_triple_product(ops.F, saddle.A)
    b_hat = ops.F @ saddle.b
    return CondensedSystem(A_hat=A_hat, b_hat=b_hat, operators=ops, saddle=saddle)


def condensed_blocks(saddle: SaddleSystem, ops: EliminationOperators,
                     ) -> tuple[CsrMatrix, np.ndarray]:
    """The condensed system via the explicit block formula (the two-step
    elimination written out):

        [[K_NN,              K_NM + K_NS P        ],
         [K_MN + P^T K_SN,   K_MM + P^T K_SS P    ]]

    with right-hand side [f_N, f_M + P^T f_S]. Serves as the independent
    cross-check of the F A F^T route.
    """
    P = ops.P
    A11 = saddle.K_NN
    A12 = finalize_csr(saddle.K_NM + saddle.K_NS @ P)
    A21 = finalize_csr(saddle.K_MN + P.T @ saddle.K_SN)
    A22 = finalize_csr(saddle.K_MM + P.T @ saddle.K_SS @ P)
    A_hat = finalize_csr(sp.bmat([[A11, A12], [A21, A22]], format="csr"))
    b_hat = np.concatenate([saddle.f_N, saddle.f_M + P.T @ saddle.f_S])
    return A_hat, b_hat


@dataclass(frozen=True)
class RecoveredSolution:
    """Full solution recovered from the condensed unknowns."""

    d_N: np.ndarray
    d_M: np.ndarray
    d_S: np.ndarray
    lam: np.ndarray
    x: np.ndarray      # full vector in (N, M, S, lambda) order
    d: np.ndarray      # displacement part only


def recover(x_hat: np.ndarray, saddle: SaddleSystem,
            ops: EliminationOperators) -> RecoveredSolution:
    """Recover d_S = P d_M and the multipliers from a condensed solution.

    lambda = D^{-T} (f_S - K_SN d_N - K_SS d_S), solved per surface with
    transpose sweeps of the stored Thomas factors.
    """
    x_hat = np.asarray(x_hat, dtype=float)
    if not np.all(np.isfinite(x_hat)):
        raise ValueError("condensed solution contains non-finite entries")
    dofmap = saddle.dofmap
    nN, nM = dofmap.n_count, dofmap.m_count
    if x_hat.shape[0] != nN + nM:
        raise ValueError(f"condensed solution has {x_hat.shape[0]} entries, "
                         f"expected {nN + nM}")
    if len(ops.factors) != len(dofmap.surface_lambda):
        raise ValueError("elimination operators carry no Thomas factors; "
                         "multiplier recovery needs them")
    d_N = x_hat[:nN]
    d_M = x_hat[nN:]
    d_S = ops.P @ d_M
    r_S = saddle.f_S - saddle.K_SN @ d_N - saddle.K_SS @ d_S
    lam = np.empty(dofmap.n_lambda)
    for si, factors in enumerate(ops.factors):
        sl = dofmap.surface_lambda[si]
        block = r_S[sl].reshape(-1, 2)
        lam[sl] = thomas_solve_transpose(factors, block).ravel()
    d = np.concatenate([d_N, d_M, d_S])
    x = np.concatenate([d, lam])
    return RecoveredSolution(d_N=d_N, d_M=d_M, d_S=d_S, lam=lam, x=x, d=d)
