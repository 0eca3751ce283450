"""Block-Thomas solve, elimination operators, condensation and recovery."""

from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from tiedcontact.condense import (
    build_elimination,
    compute_projections,
    condense,
    condensed_blocks,
    surface_projection,
    thomas_factor,
    thomas_solve,
    thomas_solve_transpose,
)
from tiedcontact.errors import SingularPivotError
from tiedcontact.krylov import dense_solve
from tiedcontact.mesh import ContactModel, build_contact_model, generate_rect_mesh
from tiedcontact.pipeline import assemble, assemble_model, solve_condensed


def random_dominant_tridiag(rng, n):
    lower = rng.uniform(-1.0, 1.0, max(n - 1, 0))
    upper = rng.uniform(-1.0, 1.0, max(n - 1, 0))
    diag = 2.5 + rng.uniform(0.0, 1.0, n)
    return diag, lower, upper


def dense_tridiag(diag, lower, upper):
    n = len(diag)
    return (np.diag(diag) + np.diag(lower, -1) + np.diag(upper, 1)
            if n > 1 else np.array([[diag[0]]]))


class TestThomasFactor:
    def test_single_entry(self):
        f = thomas_factor([3.0], [], [])
        assert f.u.tolist() == [3.0]
        assert f.l.size == 0

    def test_mass_matrix_hand_lu(self):
        # 1D P1 mass matrix of two unit elements: diag (1/3, 2/3, 1/3),
        # off-diagonals 1/6. Hand elimination (exact fractions):
        #   u1 = 1/3,  l2 = 1/2,  u2 = 7/12,  l3 = 2/7,  u3 = 2/7
        f = thomas_factor([1 / 3, 2 / 3, 1 / 3], [1 / 6, 1 / 6], [1 / 6, 1 / 6])
        expect_u = [Fraction(1, 3), Fraction(7, 12), Fraction(2, 7)]
        expect_l = [Fraction(1, 2), Fraction(2, 7)]
        np.testing.assert_allclose(f.u, [float(v) for v in expect_u], rtol=1e-15)
        np.testing.assert_allclose(f.l, [float(v) for v in expect_l], rtol=1e-15)

    def test_reconstruction_n50(self):
        rng = np.random.default_rng(5)
        diag, lower, upper = random_dominant_tridiag(rng, 50)
        f = thomas_factor(diag, lower, upper)
        L = np.eye(50) + np.diag(f.l, -1)
        U = np.diag(f.u) + np.diag(f.super, 1)
        D = dense_tridiag(diag, lower, upper)
        assert np.max(np.abs(L @ U - D)) <= 1e-13 * np.max(np.abs(D))

    def test_singular_pivot(self):
        # u2 = 1 - 2*0.5 = 0 exactly
        with pytest.raises(SingularPivotError):
            thomas_factor([1.0, 1.0], [2.0], [0.5])

    def test_inconsistent_bands(self):
        with pytest.raises(ValueError):
            thomas_factor([1.0, 2.0], [0.1, 0.2], [0.3])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=60), st.integers(min_value=0, max_value=2**32 - 1))
    def test_reconstruction_property(self, n, seed):
        rng = np.random.default_rng(seed)
        diag, lower, upper = random_dominant_tridiag(rng, n)
        f = thomas_factor(diag, lower, upper)
        L = np.eye(n) + np.diag(f.l, -1)
        U = np.diag(f.u) + (np.diag(f.super, 1) if n > 1 else 0.0)
        D = dense_tridiag(diag, lower, upper)
        assert np.max(np.abs(L @ U - D)) <= 1e-13 * np.max(np.abs(D))


class TestThomasSolve:
    def test_matching_identity(self):
        model = build_contact_model(3, 4, 1.0)
        pair = assemble_mortar_pair(model)
        factors, p = surface_projection(pair)
        assert np.max(np.abs(p - np.eye(pair.n_slave))) <= 1e-13

    def test_row_sums_partition_of_unity(self):
        # 3 slave vs 2 master nodes on uniform meshes
        model = build_contact_model(3, 1, 2.0)
        pair = assemble_mortar_pair(model)
        assert pair.n_slave == 3 and pair.n_master == 2
        _, p = surface_projection(pair)
        np.testing.assert_allclose(p.sum(axis=1), np.ones(3), rtol=0, atol=1e-12)

    def test_random_residual_n40(self):
        rng = np.random.default_rng(9)
        diag, lower, upper = random_dominant_tridiag(rng, 40)
        f = thomas_factor(diag, lower, upper)
        M = rng.standard_normal((40, 7))
        P = thomas_solve(f, M)
        D = dense_tridiag(diag, lower, upper)
        assert np.max(np.abs(D @ P - M)) <= 1e-12 * np.max(np.abs(M))

    def test_vector_rhs(self):
        f = thomas_factor([2.0, 2.0], [0.5], [0.5])
        x = thomas_solve(f, np.array([1.0, 1.0]))
        D = np.array([[2.0, 0.5], [0.5, 2.0]])
        np.testing.assert_allclose(D @ x, [1.0, 1.0], rtol=1e-14)

    def test_transpose_solve_matches_dense(self):
        rng = np.random.default_rng(13)
        diag, lower, upper = random_dominant_tridiag(rng, 25)
        f = thomas_factor(diag, lower, upper)
        R = rng.standard_normal((25, 2))
        X = thomas_solve_transpose(f, R)
        D = dense_tridiag(diag, lower, upper)
        np.testing.assert_allclose(D.T @ X, R, rtol=0, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=1, max_value=50), st.integers(min_value=0, max_value=2**32 - 1))
    def test_exactness_property(self, n, seed):
        rng = np.random.default_rng(seed)
        diag, lower, upper = random_dominant_tridiag(rng, n)
        f = thomas_factor(diag, lower, upper)
        M = rng.standard_normal((n, 3))
        P = thomas_solve(f, M)
        D = dense_tridiag(diag, lower, upper)
        assert np.max(np.abs(D @ P - M)) <= 1e-12 * max(np.max(np.abs(M)), 1e-30)


def assemble_mortar_pair(model):
    from tiedcontact.mortar import assemble_mortar
    return assemble_mortar(model.surfaces[0], model.bodies)


class TestBuildElimination:
    def test_matching_surface_gives_identity_block(self):
        assembled = assemble_model(3, 3, 1.0)
        factors, p_blocks = compute_projections(assembled.mortars)
        ops = build_elimination(assembled.dofmap, p_blocks, factors)
        dofmap = assembled.dofmap
        nN, nM = dofmap.n_count, dofmap.m_count
        t_ms = ops.T[nN:nN + nM, nN + nM:nN + nM + dofmap.s_count].toarray()
        np.testing.assert_allclose(t_ms, np.eye(nM), rtol=0, atol=1e-13)

    def test_zero_surfaces_degenerate(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 2, 2)
        model = ContactModel(bodies=[mesh], surfaces=[], materials=[(20.0, 0.3)],
                             dirichlet=[(0, "left", (0.0, 0.0))], tractions=[])
        assembled = assemble(model)
        ops = build_elimination(assembled.dofmap, [], [])
        n = assembled.dofmap.n_disp
        np.testing.assert_array_equal(ops.F.toarray(), np.eye(n))
        condensed = condense(assembled.saddle, ops)
        assert np.max(np.abs((condensed.A_hat - assembled.saddle.A).toarray())) == 0.0

    def test_two_surface_block_diagonal(self):
        assembled = assemble_model(1, 2, 1.5)
        factors, p_blocks = compute_projections(assembled.mortars)
        ops = build_elimination(assembled.dofmap, p_blocks, factors)
        dofmap = assembled.dofmap
        P = ops.P.toarray()
        s0, s1 = dofmap.surface_slave
        m0, m1 = dofmap.surface_master
        assert np.max(np.abs(P[s0, m1])) == 0.0
        assert np.max(np.abs(P[s1, m0])) == 0.0
        assert np.any(P[s0, m0] != 0) and np.any(P[s1, m1] != 0)

    def test_structural_invariants(self):
        assembled = assemble_model(2, 2, 1.5)
        factors, p_blocks = compute_projections(assembled.mortars)
        ops = build_elimination(assembled.dofmap, p_blocks, factors)
        dofmap = assembled.dofmap
        # C has exactly one unit entry per row
        C = ops.C.tocsr()
        assert np.all(np.diff(C.indptr) == 1)
        assert np.all(C.data == 1.0)
        # T has unit diagonal
        np.testing.assert_array_equal(ops.T.diagonal(),
                                      np.ones(dofmap.n_total))
        # F dimensions
        assert ops.F.shape == (dofmap.n_count + dofmap.m_count, dofmap.n_total)


class TestCondense:
    def test_structural_identity(self):
        for mid, mism in ((1, 1.5), (2, 2.0), (3, 1.5)):
            assembled = assemble_model(mid, 2, mism)
            factors, p_blocks = compute_projections(assembled.mortars)
            ops = build_elimination(assembled.dofmap, p_blocks, factors)
            condensed = condense(assembled.saddle, ops)
            A_blocks, b_blocks = condensed_blocks(assembled.saddle, ops)
            scale = np.max(np.abs(condensed.A_hat.data))
            diff = (condensed.A_hat - A_blocks).toarray()
            assert np.max(np.abs(diff)) <= 1e-12 * scale
            np.testing.assert_allclose(condensed.b_hat, b_blocks,
                                       rtol=0, atol=1e-12 * max(scale, 1.0))

    def test_spd_model3(self):
        assembled = assemble_model(3, 3, 1.5)
        factors, p_blocks = compute_projections(assembled.mortars)
        ops = build_elimination(assembled.dofmap, p_blocks, factors)
        condensed = condense(assembled.saddle, ops)
        Ah = condensed.A_hat.toarray()
        assert np.max(np.abs(Ah - Ah.T)) <= 1e-13 * np.max(np.abs(Ah))
        scipy.linalg.cholesky(Ah)  # raises if not SPD
        assert scipy.linalg.eigvalsh(Ah)[0] > 0.0

    def test_spd_witness_random_vectors(self):
        assembled = assemble_model(3, 2, 1.5)
        factors, p_blocks = compute_projections(assembled.mortars)
        ops = build_elimination(assembled.dofmap, p_blocks, factors)
        condensed = condense(assembled.saddle, ops)
        rng = np.random.default_rng(21)
        for _ in range(1000):
            x = rng.standard_normal(condensed.A_hat.shape[0])
            assert x @ (condensed.A_hat @ x) > 0.0

    def test_matching_equals_merged_mesh(self):
        res = 3
        run = solve_condensed(assemble_model(3, res, 1.0), pc="ssor",
                              tol=1e-12, maxit=4000)
        merged = generate_rect_mesh((0.0, 0.0), 1.0, 2.0, res, 2 * res)
        from tiedcontact.elasticity import (BodySystem, DofMap, apply_dirichlet,
                                            assemble_loads, assemble_stiffness)
        dm = DofMap.single_body(merged)
        K = assemble_stiffness(merged, 20.0, 0.3, dm)
        f = assemble_loads(merged, [("top", (0.0, -1.0))], dm)
        bottom = merged.nodes_with_tag("bottom")
        dofs = np.column_stack([2 * bottom, 2 * bottom + 1]).ravel()
        ref_sys = apply_dirichlet(BodySystem(K=K, f=f), dofs,
                                  np.zeros(len(dofs)), dm)
        x_ref = dense_solve(ref_sys.K, ref_sys.f)
        scale = np.max(np.abs(x_ref))
        worst = 0.0
        for b, mesh in enumerate(run.assembled.model.bodies):
            slots = run.assembled.dofmap.node_slot[b]
            got = np.column_stack([run.recovered.d[2 * slots],
                                   run.recovered.d[2 * slots + 1]])
            for i, xy in enumerate(mesh.nodes):
                j = int(np.argmin(np.abs(merged.nodes - xy).sum(axis=1)))
                worst = max(worst, np.max(np.abs(got[i] - x_ref[2 * j:2 * j + 2])))
        assert worst <= 1e-10 * scale

    def test_fill_locality(self):
        # rows outside (M rows or rows coupling into S) keep K's pattern
        assembled = assemble_model(3, 3, 1.5)
        factors, p_blocks = compute_projections(assembled.mortars)
        ops = build_elimination(assembled.dofmap, p_blocks, factors)
        condensed = condense(assembled.saddle, ops)
        dofmap = assembled.dofmap
        nN, nM = dofmap.n_count, dofmap.m_count
        K_ns = assembled.saddle.K_NS.tocsr()
        K_nm_cols = assembled.saddle.A[dofmap.n_range,
                                       slice(0, nN + nM)].tocsr()
        A_hat = condensed.A_hat.tocsr()
        checked = 0
        for i in range(nN):
            if K_ns.indptr[i] != K_ns.indptr[i + 1]:
                continue  # row couples into S; fill expected
            got = set(A_hat.indices[A_hat.indptr[i]:A_hat.indptr[i + 1]])
            want = set(K_nm_cols.indices[K_nm_cols.indptr[i]:
                                         K_nm_cols.indptr[i + 1]])
            assert got == want
            checked += 1
        assert checked > 0


class TestRecover:
    def test_matching_slave_equals_master(self):
        run = solve_condensed(assemble_model(3, 3, 1.0), pc="ssor",
                              tol=1e-12, maxit=4000)
        rec = run.recovered
        scale = max(np.max(np.abs(rec.d_M)), 1e-30)
        assert np.max(np.abs(rec.d_S - rec.d_M)) <= 1e-12 * scale

    def test_zero_data_zero_solution(self):
        model = build_contact_model(3, 2, 1.5)
        stripped = ContactModel(bodies=model.bodies, surfaces=model.surfaces,
                                materials=model.materials,
                                dirichlet=model.dirichlet, tractions=[],
                                model_id=3)
        run = solve_condensed(assemble(stripped), pc="ssor", tol=1e-12,
                              maxit=100)
        assert np.all(run.recovered.x == 0.0)

    def test_full_residual_model2(self):
        run = solve_condensed(assemble_model(2, 3, 1.5), pc="ssor",
                              tol=1e-12, maxit=5000)
        assert run.full_rel_residual <= 1e-10

    def test_constraint_rows_satisfied(self):
        run = solve_condensed(assemble_model(1, 3, 2.0), pc="ssor",
                              tol=1e-12, maxit=5000)
        saddle = run.assembled.saddle
        g = saddle.G @ run.recovered.d
        assert np.linalg.norm(g) <= 1e-10 * np.linalg.norm(run.recovered.d)

    def test_lambda_satisfies_slave_rows(self):
        run = solve_condensed(assemble_model(3, 3, 1.5), pc="ssor",
                              tol=1e-12, maxit=5000)
        saddle = run.assembled.saddle
        rec = run.recovered
        # S rows: K_SN d_N + K_SS d_S + D^T lambda = f_S
        lamb = rec.lam
        dofmap = run.assembled.dofmap
        Dt_lam = np.zeros(dofmap.s_count)
        for si, pair in enumerate(saddle.surfaces):
            sl = dofmap.surface_lambda[si]
            Dt_lam[dofmap.surface_slave[si]] = pair.d_block().T @ lamb[sl]
        resid = (saddle.K_SN @ rec.d_N + saddle.K_SS @ rec.d_S + Dt_lam
                 - saddle.f_S)
        scale = max(np.max(np.abs(saddle.A.data)), 1.0)
        assert np.max(np.abs(resid)) <= 1e-11 * scale

    def test_thomas_exactness_on_model_surfaces(self):
        for mid, mism in ((1, 1.5), (2, 2.0), (3, 1.3)):
            assembled = assemble_model(mid, 3, mism)
            for pair in assembled.mortars:
                factors, p = surface_projection(pair)
                D = pair.d_scalar.toarray()
                M = pair.m_scalar.toarray()
                assert np.max(np.abs(D @ p - M)) <= 1e-12 * np.max(np.abs(M))


class TestEquivalenceSmall:
    @pytest.mark.parametrize("mid,mism", [(1, 1.5), (2, 1.5), (3, 2.0)])
    def test_condensed_matches_dense_saddle(self, mid, mism):
        assembled = assemble_model(mid, 2, mism)
        run = solve_condensed(assembled, pc="ssor", tol=1e-13, maxit=5000)
        x_ref = dense_solve(assembled.saddle.A, assembled.saddle.b)
        scale = np.max(np.abs(x_ref))
        assert np.max(np.abs(run.recovered.x - x_ref)) <= 1e-9 * scale
