"""Mesh generation, benchmark models, surface extraction, text format."""

import numpy as np
import pytest

from tiedcontact.errors import GeometryError, TopologyError
from tiedcontact.mesh import (
    Mesh2D,
    build_contact_model,
    extract_surface_nodes,
    generate_rect_mesh,
    read_mesh_text,
    write_mesh_text,
)


class TestGenerateRectMesh:
    def test_smallest_grid(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 1, 1)
        assert mesh.n_nodes == 4
        assert len(mesh.triangles) == 2
        assert len(mesh.boundary_edges) == 4

    def test_two_by_one(self):
        mesh = generate_rect_mesh((0.0, 0.0), 2.0, 1.0, 2, 1)
        assert mesh.n_nodes == 6
        assert len(mesh.triangles) == 4
        assert np.isclose(mesh.signed_areas().sum(), 2.0, rtol=0, atol=1e-14)

    def test_area_accumulation(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 4, 4)
        assert abs(mesh.signed_areas().sum() - 1.0) <= 1e-14

    @pytest.mark.parametrize("width,height,nx,ny", [
        (0.7, 2.3, 3, 5), (10.0, 0.1, 7, 2), (1.0, 1.0, 9, 9),
    ])
    def test_area_invariant(self, width, height, nx, ny):
        mesh = generate_rect_mesh((-1.0, 2.0), width, height, nx, ny)
        total = mesh.signed_areas().sum()
        assert abs(total - width * height) <= 1e-12 * width * height

    def test_all_areas_positive(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 5, 3)
        assert np.all(mesh.signed_areas() > 0)

    @pytest.mark.parametrize("bad", [
        dict(width=-1.0, height=1.0, nx=1, ny=1),
        dict(width=1.0, height=0.0, nx=1, ny=1),
        dict(width=1.0, height=1.0, nx=0, ny=1),
        dict(width=1.0, height=1.0, nx=2, ny=-3),
    ])
    def test_invalid_arguments(self, bad):
        with pytest.raises(ValueError):
            generate_rect_mesh((0.0, 0.0), **bad)

    def test_boundary_edges_unique_triangle(self):
        # validated in the constructor; a broken edge list must raise
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 2, 2)
        bad_edges = list(mesh.boundary_edges) + [(1, 4, "inner")]
        with pytest.raises(TopologyError):
            Mesh2D(nodes=mesh.nodes, triangles=mesh.triangles,
                   boundary_edges=bad_edges)


def _scrambled_strip_mesh():
    """Five surface nodes at y=1 carrying global numbers [3, 0, 4, 1, 2]
    in spatial order (the rearrangement illustration), over a strip of
    triangles with bottom nodes 5..9."""
    xs = np.linspace(0.0, 1.0, 5)
    top_ids = [3, 0, 4, 1, 2]
    nodes = np.zeros((10, 2))
    for k, gid in enumerate(top_ids):
        nodes[gid] = (xs[k], 1.0)
    for k in range(5):
        nodes[5 + k] = (xs[k], 0.0)
    triangles = []
    edges = []
    for k in range(4):
        tl, tr = top_ids[k], top_ids[k + 1]
        bl, br = 5 + k, 6 + k
        triangles.append((bl, br, tr))
        triangles.append((bl, tr, tl))
        edges.append((tl, tr, "top"))
        edges.append((bl, br, "bottom"))
    edges.append((5, 3, "left"))
    edges.append((9, 2, "right"))
    return Mesh2D(nodes=nodes, triangles=np.array(triangles), boundary_edges=edges)


class TestExtractSurfaceNodes:
    def test_sort_by_coordinate(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 2, 1)
        line = (np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        order = extract_surface_nodes(mesh, "top", line)
        xs = mesh.nodes[order, 0]
        np.testing.assert_allclose(xs, [0.0, 0.5, 1.0])

    def test_idempotent_ordering(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 3, 2)
        line = (np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        first = extract_surface_nodes(mesh, "top", line)
        second = extract_surface_nodes(mesh, "top", line)
        np.testing.assert_array_equal(first, second)
        assert np.all(np.diff(mesh.nodes[first, 0]) > 0)

    def test_restores_spatial_order(self):
        mesh = _scrambled_strip_mesh()
        line = (np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        order = extract_surface_nodes(mesh, "top", line)
        np.testing.assert_array_equal(order, [3, 0, 4, 1, 2])

    def test_strictly_increasing_params_permutation(self):
        mesh = _scrambled_strip_mesh()
        line = (np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        order = extract_surface_nodes(mesh, "top", line)
        assert sorted(order) == sorted(mesh.nodes_with_tag("top"))
        params = mesh.nodes[order] @ np.array([1.0, 0.0])
        assert np.all(np.diff(params) > 0)

    def test_off_line_node_rejected(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 1, 1)
        line = (np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        with pytest.raises(GeometryError):
            extract_surface_nodes(mesh, "left", line)

    def test_disconnected_tag_rejected(self):
        base = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 3, 1)
        edges = []
        for a, b, tag in base.boundary_edges:
            if tag == "bottom" and 1 in (a, b) and 2 in (a, b):
                edges.append((a, b, "bottom"))  # the middle edge keeps its tag
            elif tag == "bottom":
                edges.append((a, b, "probe"))
            else:
                edges.append((a, b, tag))
        mesh = Mesh2D(nodes=base.nodes, triangles=base.triangles,
                      boundary_edges=edges)
        line = (np.array([0.0, 0.0]), np.array([1.0, 0.0]))
        with pytest.raises(TopologyError):
            extract_surface_nodes(mesh, "probe", line)

    def test_unknown_tag(self):
        mesh = generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 1, 1)
        with pytest.raises(ValueError):
            extract_surface_nodes(mesh, "nope",
                                  (np.array([0.0, 0.0]), np.array([1.0, 0.0])))


class TestBuildContactModel:
    def test_model3_matching(self):
        model = build_contact_model(3, 2, 1.0)
        assert len(model.bodies) == 2
        assert len(model.surfaces) == 1
        surf = model.surfaces[0]
        assert len(surf.slave_nodes) == len(surf.master_nodes) == 3

    def test_model1_nonmatching(self):
        model = build_contact_model(1, 2, 1.5)
        assert len(model.bodies) == 3
        assert len(model.surfaces) == 2
        for surf in model.surfaces:
            assert len(surf.slave_nodes) > len(surf.master_nodes)

    @pytest.mark.parametrize("resolution", [1, 2, 4])
    def test_model2_dirichlet_everywhere(self, resolution):
        model = build_contact_model(2, resolution)
        constrained = {b for b, tag, v in model.dirichlet}
        assert constrained == {0, 1, 2}

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            build_contact_model(4, 2)

    @pytest.mark.parametrize("model_id", [1, 3])
    def test_matching_coordinates_coincide(self, model_id):
        model = build_contact_model(model_id, 3, 1.0)
        for surf in model.surfaces:
            sc = model.bodies[surf.slave_body].nodes[surf.slave_nodes]
            mc = model.bodies[surf.master_body].nodes[surf.master_nodes]
            assert sc.shape == mc.shape
            assert np.max(np.abs(sc - mc)) <= 1e-14

    def test_materials(self):
        model = build_contact_model(1, 2)
        assert all(np.isclose(E, 20.0) and np.isclose(nu, 0.3)
                   for E, nu in model.materials)

    def test_slave_ordering_edge_adjacent(self):
        model = build_contact_model(1, 3, 2.0)
        for surf in model.surfaces:
            mesh = model.bodies[surf.slave_body]
            edge_set = {(min(a, b), max(a, b))
                        for a, b, t in mesh.boundary_edges}
            for a, b in zip(surf.slave_nodes[:-1], surf.slave_nodes[1:]):
                assert (min(a, b), max(a, b)) in edge_set

    def test_invalid_mismatch(self):
        with pytest.raises(ValueError):
            build_contact_model(3, 2, 0.0)
        with pytest.raises(ValueError):
            build_contact_model(3, 2, 0.1)  # rounds to zero slave cells


class TestMeshTextFormat:
    def test_round_trip(self, tmp_path):
        mesh = generate_rect_mesh((0.5, -0.25), 2.0, 1.0, 3, 2)
        path = tmp_path / "body.mesh"
        write_mesh_text(mesh, path)
        back = read_mesh_text(path)
        np.testing.assert_array_equal(back.nodes, mesh.nodes)
        np.testing.assert_array_equal(back.triangles, mesh.triangles)
        assert back.boundary_edges == mesh.boundary_edges

    def test_byte_identical_regeneration(self, tmp_path):
        p1, p2 = tmp_path / "a.mesh", tmp_path / "b.mesh"
        write_mesh_text(generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 4, 4), p1)
        write_mesh_text(generate_rect_mesh((0.0, 0.0), 1.0, 1.0, 4, 4), p2)
        assert p1.read_bytes() == p2.read_bytes()
