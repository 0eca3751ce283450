"""Sparse matrix kernels, Krylov solvers and preconditioners.

The sparse carrier everywhere in this package is ``scipy.sparse.csr_matrix``
(row offsets / column indices / 64-bit values), re-exported as ``CsrMatrix``.
Solvers are hand-rolled because the convergence bookkeeping is part of the
contract: zero initial guess, stopping on the *true* relative residual
``||b - A x_k|| / ||b - A x_0||``, and a full per-iteration residual history
in the returned report.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp

from .errors import PreconditionerError

CsrMatrix = sp.csr_matrix


# ---------------------------------------------------------------------------
# CSR helpers
# ---------------------------------------------------------------------------

def finalize_csr(A) -> CsrMatrix:
    """Return ``A`` as canonical CSR: duplicates summed, explicit zeros
    dropped, column indices sorted within each row."""
    A = sp.csr_matrix(A)
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def spmv(A: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse matrix-vector product y = A x (sequential, deterministic)."""
    x = np.asarray(x, dtype=float)
    if A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, x has {x.shape[0]} rows")
    return A @ x


def sparse_triple_product(F: CsrMatrix, A: CsrMatrix) -> CsrMatrix:
    """Exact sparse product F A F^T, symmetrized by averaging.

    The averaging removes round-off asymmetry (<= 1e-15 relative); no drop
    tolerance is applied anywhere, so the result keeps the exact sparsity of
    the symbolic product.
    """
    if F.shape[1] != A.shape[0] or A.shape[0] != A.shape[1]:
        raise ValueError(f"dimension mismatch: F is {F.shape}, A is {A.shape}")
    B = F @ (A @ F.T.tocsr())
    B = 0.5 * (B + B.T)
    return finalize_csr(B)


def dense_solve(A, b: np.ndarray, max_size: int = 4000) -> np.ndarray:
    """Direct LU solve with partial pivoting; verification oracle.

    Accepts a dense array or a sparse matrix (densified). Refuses systems
    larger than ``max_size`` so the oracle stays a desk-scale tool, and
    raises LinAlgError on matrices that are singular to working precision.
    """
    if sp.issparse(A):
        A = A.toarray()
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    if n > max_size:
        raise ValueError(f"system size {n} exceeds dense cap {max_size}")
    b = np.asarray(b, dtype=float)
    if b.shape[0] != n:
        raise ValueError("right-hand side size mismatch")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(A)
    if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
        raise np.linalg.LinAlgError("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), b)


def save_matrix_market(A, path) -> None:
    """Write a sparse matrix in MatrixMarket coordinate format (1-based,
    ``%%MatrixMarket matrix coordinate real general`` header)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(A), field="real",
                     symmetry="general", precision=17)


def load_matrix_market(path) -> CsrMatrix:
    """Read a MatrixMarket file written by :func:`save_matrix_market`."""
    return finalize_csr(scipy.io.mmread(str(path)))


# ---------------------------------------------------------------------------
# Solve reports
# ---------------------------------------------------------------------------

@dataclass
class SolveReport:
    """Outcome of one iterative solve.

    ``nit`` counts Krylov iterations, ``rel_residual_history[k]`` is the true
    relative residual ||r_k||/||r_0|| (history[0] == 1 for nonzero b), and
    ``converged`` holds iff the final residual met the tolerance within the
    iteration budget. Times are wall seconds; ``t_con_s`` is zero unless a
    condensation stage preceded the solve.
    """

    method: str
    preconditioner: str
    n: int
    nnz: int
    nit: int
    converged: bool
    rel_residual_final: float
    rel_residual_history: list[float] = field(default_factory=list)
    t_sol_s: float = 0.0
    t_con_s: float = 0.0
    t_tot_s: float = 0.0
    breakdown: bool = False
    stagnated: bool = False
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "preconditioner": self.preconditioner,
            "n": self.n,
            "nnz": self.nnz,
            "nit": self.nit,
            "converged": self.converged,
            "rel_residual_final": self.rel_residual_final,
            "rel_residual_history": list(self.rel_residual_history),
            "t_sol_s": self.t_sol_s,
            "t_con_s": self.t_con_s,
            "t_tot_s": self.t_tot_s,
            "breakdown": self.breakdown,
            "stagnated": self.stagnated,
        }
        d.update(self.extra)
        return d


# ---------------------------------------------------------------------------
# Preconditioners
# ---------------------------------------------------------------------------

class IdentityPreconditioner:
    """No-op preconditioner."""

    name = "none"

    def apply(self, r: np.ndarray) -> np.ndarray:
        return r.copy()


class JacobiPreconditioner:
    """Diagonal scaling z = r / diag(A).

    Zero diagonal entries are replaced by 1.0 so the operator stays usable on
    raw saddle matrices (whose multiplier block has an exactly zero
    diagonal); this mirrors how generic library Jacobi behaves in the
    baseline runs.
    """

    name = "jac"

    def __init__(self, A: CsrMatrix):
        d = A.diagonal().astype(float)
        d[d == 0.0] = 1.0
        self._inv_diag = 1.0 / d

    def apply(self, r: np.ndarray) -> np.ndarray:
        return self._inv_diag * r


class SsorPreconditioner:
    """Symmetric SOR sweep with relaxation ``omega`` (one sweep per apply).

    Applies M^{-1} r with M = (D/w + L) (w/(2-w)) D^{-1} (D/w + U) for
    A = L + D + U. Symmetric as an operator, so it is admissible inside CG.
    """

    name = "ssor"

    def __init__(self, A: CsrMatrix, omega: float = 1.0):
        if not 0.0 < omega < 2.0:
            raise PreconditionerError(f"ssor relaxation must be in (0, 2), got {omega}")
        d = A.diagonal().astype(float)
        if np.any(d == 0.0):
            raise PreconditionerError("ssor requires a nonzero diagonal")
        self.omega = omega
        scaled = sp.diags(d / omega)
        self._lower = finalize_csr(sp.tril(A, k=-1) + scaled)
        self._upper = finalize_csr(sp.triu(A, k=1) + scaled)
        self._mid = ((2.0 - omega) / omega) * d

    def apply(self, r: np.ndarray) -> np.ndarray:
        y = sp.linalg.spsolve_triangular(self._lower, r, lower=True)
        y *= self._mid
        return sp.linalg.spsolve_triangular(self._upper, y, lower=False)


class BlockJacobiPreconditioner:
    """Exact dense inverses of the diagonal blocks of given size.

    Default block size 2 corresponds to nodal (x, y) blocks. Construction
    fails on singular diagonal blocks, which is exactly what happens on a raw
    saddle matrix where the multiplier rows carry zero diagonal blocks.
    """

    name = "bjac"

    def __init__(self, A: CsrMatrix, block_size: int = 2):
        n = A.shape[0]
        if block_size < 1 or n % block_size != 0:
            raise PreconditionerError(
                f"matrix size {n} is not a multiple of block size {block_size}")
        self.block_size = block_size
        nb = n // block_size
        dense_blocks = np.zeros((nb, block_size, block_size))
        coo = sp.coo_matrix(A)
        for i, j, v in zip(coo.row, coo.col, coo.data):
            bi, bj = i // block_size, j // block_size
            if bi == bj:
                dense_blocks[bi, i % block_size, j % block_size] += v
        try:
            self._inv_blocks = np.linalg.inv(dense_blocks)
        except np.linalg.LinAlgError as exc:
            raise PreconditionerError(
                "block Jacobi construction failed: singular diagonal block "
                "(zero elements on the diagonal)") from exc

    def apply(self, r: np.ndarray) -> np.ndarray:
        rb = r.reshape(-1, self.block_size, 1)
        return (self._inv_blocks @ rb).reshape(-1)


class SimplePreconditioner:
    """Block preconditioner for the 2x2 saddle structure [[K, G^T], [G, 0]].

    Simplified variant: the Schur complement is approximated with the inverse
    diagonal of K, S = G diag(K)^{-1} G^T, and both sub-solves run a fixed
    small number of Jacobi-preconditioned CG iterations. Predictor z_u from
    the K block, Schur solve for z_lam, then the displacement correction
    z_u -= diag(K)^{-1} G^T z_lam.
    """

    name = "simple"

    def __init__(self, K: CsrMatrix, G: CsrMatrix, inner_iters: int = 5):
        dk = K.diagonal().astype(float)
        if np.any(dk == 0.0):
            raise PreconditionerError("simple requires nonzero diag(K)")
        self._K = K
        self._G = finalize_csr(G)
        self._Gt = finalize_csr(G.T)
        self._inv_dk = 1.0 / dk
        # S is SPD provided G has full row rank
        self._S = finalize_csr(self._G @ sp.diags(self._inv_dk) @ self._Gt)
        self._inner = inner_iters
        self._n_disp = K.shape[0]

    def _inner_cg(self, A: CsrMatrix, rhs: np.ndarray) -> np.ndarray:
        invd = A.diagonal().astype(float)
        invd[invd == 0.0] = 1.0
        invd = 1.0 / invd
        x = np.zeros_like(rhs)
        r = rhs.copy()
        z = invd * r
        p = z.copy()
        rz = float(r @ z)
        for _ in range(self._inner):
            Ap = A @ p
            pAp = float(p @ Ap)
            if pAp <= 0.0 or rz == 0.0:
                break
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            z = invd * r
            rz_new = float(r @ z)
            beta = rz_new / rz
            p = z + beta * p
            rz = rz_new
        return x

    def apply(self, r: np.ndarray) -> np.ndarray:
        ru, rl = r[:self._n_disp], r[self._n_disp:]
        zu = self._inner_cg(self._K, ru)
        rhat = rl - self._G @ zu
        zl = -self._inner_cg(self._S, -rhat)
        zu = zu - self._inv_dk * (self._Gt @ zl)
        return np.concatenate([zu, zl])


def make_preconditioner(kind: str, A: CsrMatrix, *, omega: float = 1.0,
                        block_size: int = 2, saddle_blocks=None):
    """Build a preconditioner operator by name.

    ``kind`` is one of ``none | jac | ssor | bjac | simple``. ``simple``
    needs ``saddle_blocks = (K, G)``, the displacement block and the
    constraint block of the saddle matrix.
    """
    kind = kind.lower()
    if kind in ("none", "identity"):
        return IdentityPreconditioner()
    if kind in ("jac", "jacobi"):
        return JacobiPreconditioner(A)
    if kind == "ssor":
        return SsorPreconditioner(A, omega=omega)
    if kind in ("bjac", "block_jacobi"):
        return BlockJacobiPreconditioner(A, block_size=block_size)
    if kind == "simple":
        if saddle_blocks is None:
            raise PreconditionerError("simple requires the (K, G) saddle blocks")
        K, G = saddle_blocks
        return SimplePreconditioner(K, G)
    raise PreconditionerError(f"unknown preconditioner kind: {kind!r}")


# ---------------------------------------------------------------------------
# Iterative solvers
# ---------------------------------------------------------------------------

def cg(A: CsrMatrix, b: np.ndarray, precond=None, tol: float = 1e-8,
       maxit: int = 2000) -> tuple[np.ndarray, SolveReport]:
    """Preconditioned conjugate gradients for SPD systems.

    Starts from x0 = 0 and stops when the true relative residual
    ||b - A x_k|| / ||b|| drops below ``tol``. A non-positive curvature
    p^T A p <= 0 is reported as breakdown (the runtime witness that the
    matrix was not positive definite) rather than raised.
    """
    if precond is None:
        precond = IdentityPreconditioner()
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    t0 = time.perf_counter()
    x = np.zeros(n)
    r = b.copy()
    norm0 = float(np.linalg.norm(b))
    history = [1.0 if norm0 > 0.0 else 0.0]
    converged = norm0 == 0.0
    breakdown = False
    nit = 0
    if not converged:
        z = precond.apply(r)
        p = z.copy()
        rz = float(r @ z)
        for k in range(1, maxit + 1):
            Ap = A @ p
            pAp = float(p @ Ap)
            if pAp <= 0.0:
                breakdown = True
                break
            alpha = rz / pAp
            x += alpha * p
            r -= alpha * Ap
            rel = float(np.linalg.norm(b - A @ x)) / norm0
            history.append(rel)
            nit = k
            if rel <= tol:
                converged = True
                break
            z = precond.apply(r)
            rz_new = float(r @ z)
            beta = rz_new / rz
            p = z + beta * p
            rz = rz_new
    report = SolveReport(
        method="cg", preconditioner=getattr(precond, "name", "custom"),
        n=n, nnz=A.nnz, nit=nit, converged=converged,
        rel_residual_final=history[-1], rel_residual_history=history,
        t_sol_s=time.perf_counter() - t0, breakdown=breakdown)
    report.t_tot_s = report.t_sol_s
    return x, report


def gcr(A: CsrMatrix, b: np.ndarray, precond=None, tol: float = 1e-8,
        maxit: int = 2000, restart: int = 50) -> tuple[np.ndarray, SolveReport]:
    """Restarted generalized conjugate residuals with right preconditioning.

    Handles general (indefinite, nonsymmetric) systems, so it serves as the
    baseline solver for the raw saddle matrix. Right preconditioning keeps
    the reported residuals unpreconditioned. When the residual-based
    direction candidate is linearly dependent on the current space (the
    classical GCR breakdown on indefinite systems), the space is extended
    Krylov-style from the last direction image instead, which restores the
    GMRES search space. Stagnation over a full restart cycle is flagged in
    the report, not raised.
    """
    if precond is None:
        precond = IdentityPreconditioner()
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    t0 = time.perf_counter()
    x = np.zeros(n)
    r = b.copy()
    norm0 = float(np.linalg.norm(b))
    history = [1.0 if norm0 > 0.0 else 0.0]
    converged = norm0 == 0.0
    stagnated = False
    nit = 0

    def orthonormal_direction(z, dirs, imgs):
        v = A @ z
        z = z.copy()
        pre_norm = float(np.linalg.norm(v))
        for sj, vj in zip(dirs, imgs):
            h = float(v @ vj)
            v -= h * vj
            z -= h * sj
        beta = float(np.linalg.norm(v))
        if beta <= 1e-13 * pre_norm or beta == 0.0:
            return None
        return z / beta, v / beta

    while not converged and nit < maxit:
        cycle_start = history[-1]
        dirs: list[np.ndarray] = []
        imgs: list[np.ndarray] = []
        exhausted = False
        for _ in range(restart):
            if nit >= maxit:
                break
            cand = orthonormal_direction(precond.apply(r), dirs, imgs)
            if cand is None and imgs:
                cand = orthonormal_direction(precond.apply(imgs[-1]), dirs, imgs)
            if cand is None:
                exhausted = True
                break
            z, v = cand
            alpha = float(v @ r)
            x += alpha * z
            r -= alpha * v
            dirs.append(z)
            imgs.append(v)
            rel = float(np.linalg.norm(b - A @ x)) / norm0
            history.append(rel)
            nit += 1
            if rel <= tol:
                converged = True
                break
        if converged:
            break
        if history[-1] >= cycle_start:
            stagnated = True
        if exhausted:
            break
        r = b - A @ x  # fresh true residual at restart
    report = SolveReport(
        method="gcr", preconditioner=getattr(precond, "name", "custom"),
        n=n, nnz=A.nnz, nit=nit, converged=converged,
        rel_residual_final=history[-1], rel_residual_history=history,
        t_sol_s=time.perf_counter() - t0, stagnated=stagnated)
    report.t_tot_s = report.t_sol_s
    return x, report
