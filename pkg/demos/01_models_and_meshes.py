"""Build the three benchmark tied-contact models and inspect their layout.

Model 1: three unit squares in a row, pulled to the right, left edge fixed.
Model 2: same bodies, all bottoms fixed, pressed down from above.
Model 3: two stacked squares, bottom fixed, pressed down on the top body.

The middle body (models 1-2) and the top body (model 3) act as masters;
`mismatch` controls how much finer the slave surfaces are meshed, which
makes the contact interfaces non-matching.
"""

import pathlib
import tempfile

from tiedcontact import build_contact_model, partition_dofs, write_mesh_text

for model_id in (1, 2, 3):
    model = build_contact_model(model_id, resolution=4, mismatch=1.5)
    dofmap = partition_dofs(model)
    print(f"model {model_id}")
    print(f"  bodies: {len(model.bodies)} "
          f"({[m.n_nodes for m in model.bodies]} nodes each)")
    for i, surf in enumerate(model.surfaces):
        print(f"  surface {i}: slave body {surf.slave_body} "
              f"({len(surf.slave_nodes)} nodes) -> master body "
              f"{surf.master_body} ({len(surf.master_nodes)} nodes)")
    print(f"  DOF split: N={dofmap.n_count} M={dofmap.m_count} "
          f"S={dofmap.s_count} lambda={dofmap.n_lambda} "
          f"(saddle size {dofmap.n_total})")
    print(f"  dirichlet: {model.dirichlet}")
    print(f"  tractions: {model.tractions}")

# meshes serialize to a plain three-section text format
out = pathlib.Path(tempfile.mkdtemp()) / "model3_body0.mesh"
write_mesh_text(build_contact_model(3, 2).bodies[0], out)
print(f"\nwrote {out}; first lines:")
print("\n".join(out.read_text().splitlines()[:4]))
