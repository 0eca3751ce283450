"""Why condensing pays off: the solver contrast on all three models.

The raw saddle system defeats simple preconditioned Krylov methods (block
Jacobi cannot even be built: the multiplier block has a zero diagonal),
while the condensed SPD system yields to plain preconditioned CG. This is
the desk-scale version of the solver comparison tables.
"""

from tiedcontact.errors import PreconditionerError
from tiedcontact.krylov import make_preconditioner
from tiedcontact.pipeline import assemble_model, solve_condensed, solve_saddle

MAXIT = 2000
TOL = 1e-8

header = (f"{'model':>5} {'equation':>10} {'dofs':>6} {'method':>6} "
          f"{'pc':>6} {'nit':>5} {'r_rel':>10} {'t_sol[s]':>9}")
print(header)
print("-" * len(header))

for model_id in (1, 2, 3):
    assembled = assemble_model(model_id, resolution=4, mismatch=1.5)
    n = assembled.saddle.A.shape[0]

    # block Jacobi on the raw saddle matrix: zero diagonal block -> unusable
    try:
        make_preconditioner("bjac", assembled.saddle.A)
        bjac_note = "built (unexpected)"
    except PreconditionerError:
        bjac_note = "*"
    print(f"{model_id:>5} {'saddle':>10} {n:>6} {'gcr':>6} {'bjac':>6} "
          f"{'*':>5} {bjac_note:>10} {'*':>9}")

    for pc in ("jac", "simple"):
        rep = solve_saddle(assembled, pc=pc, tol=TOL, maxit=MAXIT).report
        print(f"{model_id:>5} {'saddle':>10} {n:>6} {rep.method:>6} {pc:>6} "
              f"{rep.nit:>5} {rep.rel_residual_final:>10.2e} {rep.t_sol_s:>9.3f}")

    for pc in ("jac", "bjac", "ssor"):
        run = solve_condensed(assembled, pc=pc, tol=TOL, maxit=MAXIT)
        rep = run.report
        nc = run.condensed.A_hat.shape[0]
        print(f"{model_id:>5} {'condensed':>10} {nc:>6} {rep.method:>6} {pc:>6} "
              f"{rep.nit:>5} {rep.rel_residual_final:>10.2e} {rep.t_sol_s:>9.3f}")
    print("-" * len(header))

print("condensed CG converges on every model; the saddle baselines "
      f"generally do not within {MAXIT} iterations.")
