"""Structured triangular meshes and the three benchmark contact models.

Every benchmark body is a unit square partitioned into a structured grid of
triangles (each cell split along the same diagonal, so regeneration is
deterministic). Boundary edges carry string tags (``left``, ``right``,
``top``, ``bottom``) that the model builder maps to Dirichlet, traction and
contact surfaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GeometryError, TopologyError

# On-line tolerance for surface extraction, relative to the domain diameter.
LINE_TOL = 1e-10


@dataclass(frozen=True)
class Mesh2D:
    """Triangular mesh: node coordinates (meters), CCW triangles, tagged
    boundary edges stored as (node_a, node_b, tag) tuples."""

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: tuple

    def __post_init__(self):
        nodes = np.ascontiguousarray(np.asarray(self.nodes, dtype=float))
        tris = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        nodes.setflags(write=False)
        tris.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "triangles", tris)
        object.__setattr__(self, "boundary_edges", tuple(
            (int(a), int(b), str(tag)) for a, b, tag in self.boundary_edges))
        self._validate()

    def _validate(self):
        n = len(self.nodes)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise TopologyError("triangle node index out of range")
        areas = self.signed_areas()
        if np.any(areas <= 0.0):
            raise GeometryError("every triangle must have positive signed area")
        # each boundary edge must belong to exactly one triangle
        tri_edges: dict[tuple[int, int], int] = {}
        for tri in self.triangles:
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                key = (min(a, b), max(a, b))
                tri_edges[key] = tri_edges.get(key, 0) + 1
        for a, b, tag in self.boundary_edges:
            if not (0 <= a < n and 0 <= b < n):
                raise TopologyError(f"boundary edge ({a}, {b}) out of range")
            count = tri_edges.get((min(a, b), max(a, b)), 0)
            if count != 1:
                raise TopologyError(
                    f"boundary edge ({a}, {b}, {tag!r}) belongs to {count} triangles")

    # -- queries -------------------------------------------------------------

    def signed_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * ((p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                      - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]))

    def edges_with_tag(self, tag: str) -> list[tuple[int, int]]:
        return [(a, b) for a, b, t in self.boundary_edges if t == tag]

    def nodes_with_tag(self, tag: str) -> np.ndarray:
        found = sorted({n for a, b, t in self.boundary_edges if t == tag for n in (a, b)})
        return np.array(found, dtype=np.int64)

    def tags(self) -> set[str]:
        return {t for _, _, t in self.boundary_edges}

    def diameter(self) -> float:
        lo = self.nodes.min(axis=0)
        hi = self.nodes.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class SurfaceSpec:
    """One contact surface: ordered slave/master node lists on a straight
    interface line given as (point, unit direction)."""

    slave_body: int
    master_body: int
    slave_nodes: np.ndarray
    master_nodes: np.ndarray
    line: tuple[np.ndarray, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "slave_nodes",
                           np.asarray(self.slave_nodes, dtype=np.int64))
        object.__setattr__(self, "master_nodes",
                           np.asarray(self.master_nodes, dtype=np.int64))
        point = np.asarray(self.line[0], dtype=float)
        direction = np.asarray(self.line[1], dtype=float)
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise GeometryError("interface line direction must be nonzero")
        object.__setattr__(self, "line", (point, direction / norm))
        if len(self.slave_nodes) < 2 or len(self.master_nodes) < 2:
            raise ConfigurationError("contact surface needs at least 2 nodes per side")


@dataclass(frozen=True)
class ContactModel:
    """Multi-body tied-contact description: meshes, surfaces, materials
    (E in N/m^2, nu dimensionless), Dirichlet specs (body, tag, value) and
    traction specs (body, tag, vector in N/m)."""

    bodies: list[Mesh2D]
    surfaces: list[SurfaceSpec]
    materials: list[tuple[float, float]]
    dirichlet: list[tuple[int, str, tuple[float, float]]]
    tractions: list[tuple[int, str, tuple[float, float]]]
    model_id: int = 0

    def __post_init__(self):
        for E, nu in self.materials:
            if E <= 0.0:
                raise ConfigurationError(f"Young's modulus must be positive, got {E}")
            if not 0.0 < nu < 0.5:
                raise ConfigurationError(f"Poisson ratio must be in (0, 0.5), got {nu}")
        pairs = [(s.slave_body, s.master_body) for s in self.surfaces]
        if len(set(pairs)) != len(pairs):
            raise ConfigurationError("each surface must reference a distinct body pair")

    def contact_nodes(self, body: int) -> set[int]:
        """Node indices of ``body`` lying on any contact surface (either side)."""
        nodes: set[int] = set()
        for s in self.surfaces:
            if s.slave_body == body:
                nodes.update(int(i) for i in s.slave_nodes)
            if s.master_body == body:
                nodes.update(int(i) for i in s.master_nodes)
        return nodes


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def generate_rect_mesh(origin: tuple[float, float], width: float, height: float,
                       nx: int, ny: int) -> Mesh2D:
    """Structured triangulation of an axis-aligned rectangle.

    (nx+1)(ny+1) nodes; every cell is split into two CCW triangles along the
    same diagonal; boundary edges are tagged left/right/top/bottom.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"cell counts must be >= 1, got nx={nx}, ny={ny}")
    if width <= 0.0 or height <= 0.0:
        raise ValueError(f"dimensions must be positive, got {width} x {height}")
    x0, y0 = origin
    xs = np.linspace(x0, x0 + width, nx + 1)
    ys = np.linspace(y0, y0 + height, ny + 1)
    xx, yy = np.meshgrid(xs, ys)  # row-major: node (ix, iy) -> iy*(nx+1)+ix
    nodes = np.column_stack([xx.ravel(), yy.ravel()])

    def nid(ix, iy):
        return iy * (nx + 1) + ix

    triangles = []
    for iy in range(ny):
        for ix in range(nx):
            n00, n10 = nid(ix, iy), nid(ix + 1, iy)
            n01, n11 = nid(ix, iy + 1), nid(ix + 1, iy + 1)
            triangles.append((n00, n10, n11))
            triangles.append((n00, n11, n01))

    edges = []
    for ix in range(nx):
        edges.append((nid(ix, 0), nid(ix + 1, 0), "bottom"))
    for ix in range(nx):
        edges.append((nid(ix, ny), nid(ix + 1, ny), "top"))
    for iy in range(ny):
        edges.append((nid(0, iy), nid(0, iy + 1), "left"))
    for iy in range(ny):
        edges.append((nid(nx, iy), nid(nx, iy + 1), "right"))

    return Mesh2D(nodes=nodes, triangles=np.array(triangles), boundary_edges=edges)


def extract_surface_nodes(mesh: Mesh2D, tag: str,
                          line: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Node indices of the tagged boundary, ordered by arc length along the
    interface ``line`` (point, direction).

    Raises GeometryError if a tagged node lies off the line beyond
    tolerance, and TopologyError if consecutive nodes of the ordering are
    not connected by a tagged boundary edge.
    """
    edges = mesh.edges_with_tag(tag)
    if not edges:
        raise ValueError(f"no boundary edge carries tag {tag!r}")
    node_ids = sorted({n for e in edges for n in e})
    point = np.asarray(line[0], dtype=float)
    direction = np.asarray(line[1], dtype=float)
    direction = direction / np.linalg.norm(direction)
    coords = mesh.nodes[node_ids]
    rel = coords - point
    params = rel @ direction
    off = rel - np.outer(params, direction)
    tol = LINE_TOL * max(mesh.diameter(), 1.0)
    worst = float(np.max(np.linalg.norm(off, axis=1)))
    if worst > tol:
        raise GeometryError(
            f"tagged node lies {worst:.3e} off the interface line (tol {tol:.3e})")
    order = np.argsort(params, kind="stable")
    ordered = np.array(node_ids, dtype=np.int64)[order]
    edge_set = {(min(a, b), max(a, b)) for a, b in edges}
    for a, b in zip(ordered[:-1], ordered[1:]):
        if (min(a, b), max(a, b)) not in edge_set:
            raise TopologyError(
                f"tagged edge set is not a connected chain near nodes {a}, {b}")
    return ordered


def _unit_square_body(ox: float, oy: float, cells: int) -> Mesh2D:
    return generate_rect_mesh((ox, oy), 1.0, 1.0, cells, cells)


def build_contact_model(model_id: int, resolution: int,
                        mismatch: float = 1.0) -> ContactModel:
    """Build one of the three benchmark models.

    Model 1: three unit squares in a row, middle body is the master; left
    boundary fixed, rightward traction p=10 N on the right boundary.
    Model 2: same bodies, lower boundaries fixed, downward traction p=10 N
    on the upper boundaries.
    Model 3: two stacked squares, master on top; lower boundary of the slave
    fixed, downward traction of magnitude 1 N on the master top.

    ``resolution`` is the master-side cell count per unit length; slave
    bodies use round(resolution * mismatch) cells so the contact surface
    meshes are non-matching for mismatch != 1. E = 20 N/m^2, nu = 0.3, no
    body force.
    """
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    if mismatch <= 0.0:
        raise ValueError(f"mismatch must be positive, got {mismatch}")
    slave_cells = int(round(resolution * mismatch))
    if slave_cells < 1:
        raise ValueError(
            f"mismatch {mismatch} at resolution {resolution} leaves no slave cells")
    E, nu = 20.0, 0.3

    if model_id in (1, 2):
        bodies = [
            _unit_square_body(0.0, 0.0, slave_cells),   # slave, left
            _unit_square_body(1.0, 0.0, resolution),    # master, middle
            _unit_square_body(2.0, 0.0, slave_cells),   # slave, right
        ]
        line0 = (np.array([1.0, 0.0]), np.array([0.0, 1.0]))
        line1 = (np.array([2.0, 0.0]), np.array([0.0, 1.0]))
        surfaces = [
            SurfaceSpec(0, 1, extract_surface_nodes(bodies[0], "right", line0),
                        extract_surface_nodes(bodies[1], "left", line0), line0),
            SurfaceSpec(2, 1, extract_surface_nodes(bodies[2], "left", line1),
                        extract_surface_nodes(bodies[1], "right", line1), line1),
        ]
        if model_id == 1:
            dirichlet = [(0, "left", (0.0, 0.0))]
            tractions = [(2, "right", (10.0, 0.0))]
        else:
            dirichlet = [(b, "bottom", (0.0, 0.0)) for b in range(3)]
            tractions = [(b, "top", (0.0, -10.0)) for b in range(3)]
        materials = [(E, nu)] * 3
    elif model_id == 3:
        bodies = [
            _unit_square_body(0.0, 0.0, slave_cells),   # slave, bottom
            _unit_square_body(0.0, 1.0, resolution),    # master, top
        ]
        line = (np.array([0.0, 1.0]), np.array([1.0, 0.0]))
        surfaces = [
            SurfaceSpec(0, 1, extract_surface_nodes(bodies[0], "top", line),
                        extract_surface_nodes(bodies[1], "bottom", line), line),
        ]
        dirichlet = [(0, "bottom", (0.0, 0.0))]
        tractions = [(1, "top", (0.0, -1.0))]
        materials = [(E, nu)] * 2
    else:
        raise ValueError(f"unknown model id {model_id}; expected 1, 2 or 3")

    return ContactModel(bodies=bodies, surfaces=surfaces, materials=materials,
                        dirichlet=dirichlet, tractions=tractions, model_id=model_id)


# ---------------------------------------------------------------------------
# Plain-text mesh format
# ---------------------------------------------------------------------------

def write_mesh_text(mesh: Mesh2D, path) -> None:
    """Write the three-section plain-text format (NODES / TRIANGLES / EDGES)
    with deterministic ordering, so regeneration is byte-identical."""
    lines = [f"NODES {mesh.n_nodes}"]
    for i, (x, y) in enumerate(mesh.nodes):
        lines.append(f"{i} {float(x)!r} {float(y)!r}")
    lines.append(f"TRIANGLES {len(mesh.triangles)}")
    for i, (a, b, c) in enumerate(mesh.triangles):
        lines.append(f"{i} {a} {b} {c}")
    lines.append(f"EDGES {len(mesh.boundary_edges)}")
    for a, b, tag in mesh.boundary_edges:
        lines.append(f"{a} {b} {tag}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh_text(path) -> Mesh2D:
    """Read a mesh written by :func:`write_mesh_text`."""
    with open(path) as fh:
        tokens = [line.split() for line in fh if line.strip()]
    pos = 0
    if tokens[pos][0] != "NODES":
        raise ValueError("expected NODES section")
    n = int(tokens[pos][1]); pos += 1
    nodes = np.zeros((n, 2))
    for _ in range(n):
        i, x, y = tokens[pos]; pos += 1
        nodes[int(i)] = (float(x), float(y))
    if tokens[pos][0] != "TRIANGLES":
        raise ValueError("expected TRIANGLES section")
    m = int(tokens[pos][1]); pos += 1
    tris = np.zeros((m, 3), dtype=np.int64)
    for _ in range(m):
        i, a, b, c = tokens[pos]; pos += 1
        tris[int(i)] = (int(a), int(b), int(c))
    if tokens[pos][0] != "EDGES":
        raise ValueError("expected EDGES section")
    k = int(tokens[pos][1]); pos += 1
    edges = []
    for _ in range(k):
        a, b, tag = tokens[pos]; pos += 1
        edges.append((int(a), int(b), tag))
    return Mesh2D(nodes=nodes, triangles=tris, boundary_edges=edges)
