"""Surface meshes for boundary element computations.

A boundary is represented by flat panels: closed polygonal chains of
segments for d=2, flat triangles for d=3.  Element maps are affine, so
the metric factor g_tau is constant per element and the surface measure
is exact.  Spheres are approximated by inscribed panels; refinement
re-projects midpoints for meshes flagged `on_sphere`.
"""

from dataclasses import dataclass, field

import numpy as np

CLOSED_SURFACE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Mesh:
    """Flat-panel mesh of a closed boundary.

    vertices : (nv, d) float array
    elements : (ne, 2) int array for d=2 (segments, CCW) or (ne, 3) for
               d=3 (triangles, outward orientation)
    on_sphere : refinement re-projects new vertices to the unit sphere
    """

    d: int
    vertices: np.ndarray
    elements: np.ndarray
    on_sphere: bool = False
    normals: np.ndarray = field(init=False)
    areas: np.ndarray = field(init=False)
    diameters: np.ndarray = field(init=False)
    centroids: np.ndarray = field(init=False)

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=float))
        elems = np.ascontiguousarray(np.asarray(self.elements, dtype=np.int64))
        if verts.ndim != 2 or verts.shape[1] != self.d:
            raise ValueError("vertex array must be (nv, d)")
        if elems.ndim != 2 or elems.shape[1] != self.d:
            raise ValueError("element array must be (ne, d)")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "elements", elems)
        corners = verts[elems]  # (ne, d, d)
        if self.d == 2:
            edge = corners[:, 1] - corners[:, 0]
            length = np.linalg.norm(edge, axis=1)
            if np.any(length <= 0.0):
                raise ValueError("degenerate segment in mesh")
            normals = np.stack([edge[:, 1], -edge[:, 0]], axis=1) / length[:, None]
            areas = length
            diameters = length
        else:
            e1 = corners[:, 1] - corners[:, 0]
            e2 = corners[:, 2] - corners[:, 0]
            cross = np.cross(e1, e2)
            two_area = np.linalg.norm(cross, axis=1)
            if np.any(two_area <= 0.0):
                raise ValueError("degenerate triangle in mesh")
            normals = cross / two_area[:, None]
            areas = 0.5 * two_area
            d01 = np.linalg.norm(e1, axis=1)
            d02 = np.linalg.norm(e2, axis=1)
            d12 = np.linalg.norm(corners[:, 2] - corners[:, 1], axis=1)
            diameters = np.max(np.stack([d01, d02, d12]), axis=0)
        centroids = corners.mean(axis=1)
        for name, arr in (("normals", normals), ("areas", areas),
                          ("diameters", diameters), ("centroids", centroids)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        verts.setflags(write=False)
        elems.setflags(write=False)

    @property
    def n_elements(self):
        return self.elements.shape[0]

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def h_max(self):
        return float(self.diameters.max())

    @property
    def h_min(self):
        return float(self.diameters.min())

    @property
    def total_area(self):
        return float(self.areas.sum())

    @property
    def corners(self):
        """(ne, d, d) corner coordinates per element."""
        return self.vertices[self.elements]

    def diam(self):
        """Diameter of the vertex set."""
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(np.linalg.norm(hi - lo))

    def closed_surface_defect(self):
        """|sum_t s_t n_t| / sum_t s_t; ~0 for a closed oriented mesh."""
        v = (self.areas[:, None] * self.normals).sum(axis=0)
        return float(np.linalg.norm(v) / self.areas.sum())


@dataclass(frozen=True)
class StarCenter:
    """A candidate star center x0 with its star radius kappa.

    kappa > 0 iff the meshed boundary is star-shaped with respect to a
    ball of radius kappa centered at x0.
    """

    x0: np.ndarray
    kappa: float


def _segments_properly_intersect(p1, p2, q1, q2):
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if v == 0 else (1 if v > 0 else -1)

    o1 = orient(p1, p2, q1)
    o2 = orient(p1, p2, q2)
    o3 = orient(q1, q2, p1)
    o4 = orient(q1, q2, p2)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def _check_simple_polygon(verts):
    n = len(verts)
    for i in range(n):
        p1, p2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            q1, q2 = verts[j], verts[(j + 1) % n]
            if _segments_properly_intersect(p1, p2, q1, q2):
                raise ValueError(
                    f"polygon is self-intersecting: edge {i} crosses edge {j}")


def _signed_area(verts):
    x = verts[:, 0]
    y = verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def build_polygon(vertices, n_per_edge=1):
    """Closed polygonal-chain mesh from CCW corner vertices.

    Each edge is split into `n_per_edge` equal segments.  Rejects
    self-intersecting or clockwise input.
    """
    verts = np.asarray(vertices, dtype=float)
    if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
        raise ValueError("need at least 3 corner vertices of shape (n, 2)")
    if n_per_edge < 1:
        raise ValueError("n_per_edge must be >= 1")
    _check_simple_polygon(verts)
    if _signed_area(verts) <= 0.0:
        raise ValueError("polygon vertices must be counterclockwise")
    points = []
    n = len(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        for j in range(n_per_edge):
            t = j / n_per_edge
            points.append((1.0 - t) * a + t * b)
    points = np.array(points)
    m = len(points)
    elems = np.stack([np.arange(m), (np.arange(m) + 1) % m], axis=1)
    return Mesh(2, points, elems)


def build_square(n_per_edge=1, center=(0.0, 0.0), side=1.0):
    c = np.asarray(center, dtype=float)
    h = 0.5 * side
    corners = np.array([[-h, -h], [h, -h], [h, h], [-h, h]]) + c
    return build_polygon(corners, n_per_edge)


def build_lshape(n_per_edge=1):
    """L-shaped (non-convex) hexagonal boundary on [0,2]^2 minus [1,2]^2."""
    corners = np.array([
        [0.0, 0.0], [2.0, 0.0], [2.0, 1.0],
        [1.0, 1.0], [1.0, 2.0], [0.0, 2.0],
    ])
    return build_polygon(corners, n_per_edge)


def build_circle_polygon(n, radius=1.0, center=(0.0, 0.0)):
    """Regular n-gon inscribed in the circle of given radius."""
    if n < 3:
        raise ValueError("need n >= 3")
    theta = 2.0 * np.pi * np.arange(n) / n
    c = np.asarray(center, dtype=float)
    verts = c + radius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    elems = np.stack([np.arange(n), (np.arange(n) + 1) % n], axis=1)
    return Mesh(2, verts, elems)


def _icosahedron():
    phi_g = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi_g, 0], [1, phi_g, 0], [-1, -phi_g, 0], [1, -phi_g, 0],
        [0, -1, phi_g], [0, 1, phi_g], [0, -1, -phi_g], [0, 1, -phi_g],
        [phi_g, 0, -1], [phi_g, 0, 1], [-phi_g, 0, -1], [-phi_g, 0, 1],
    ], dtype=float)
    verts /= np.linalg.norm(verts[0])
    faces = np.array([
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ], dtype=np.int64)
    return verts, faces


def _orient_outward(verts, faces, interior_point):
    out = faces.copy()
    for i, (a, b, c) in enumerate(faces):
        n = np.cross(verts[b] - verts[a], verts[c] - verts[a])
        center = (verts[a] + verts[b] + verts[c]) / 3.0
        if np.dot(n, center - interior_point) < 0.0:
            out[i] = (a, c, b)
    return out


def _quadrisect(verts, faces, project_sphere):
    verts = list(map(np.asarray, verts))
    midpoint = {}

    def mid(i, j):
        key = (min(i, j), max(i, j))
        if key not in midpoint:
            p = 0.5 * (verts[i] + verts[j])
            if project_sphere:
                p = p / np.linalg.norm(p)
            midpoint[key] = len(verts)
            verts.append(p)
        return midpoint[key]

    new_faces = []
    for a, b, c in faces:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        new_faces.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return np.array(verts), np.array(new_faces, dtype=np.int64)


def build_icosphere(level):
    """Triangulated unit sphere: icosahedron quadrisected `level` times,
    vertices projected to |x| = 1, panels flat."""
    if level < 0:
        raise ValueError("level must be >= 0")
    verts, faces = _icosahedron()
    for _ in range(level):
        verts, faces = _quadrisect(verts, faces, project_sphere=True)
    faces = _orient_outward(verts, faces, np.zeros(3))
    return Mesh(3, verts, faces, on_sphere=True)


def refine(mesh):
    """Uniform refinement: segment bisection (d=2), triangle
    quadrisection (d=3); sphere meshes re-project new vertices."""
    if mesh.d == 2:
        verts = list(mesh.vertices)
        elems = []
        for a, b in mesh.elements:
            p = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
            if mesh.on_sphere:
                p = p / np.linalg.norm(p)
            m = len(verts)
            verts.append(p)
            elems.extend([(a, m), (m, b)])
        return Mesh(2, np.array(verts), np.array(elems, dtype=np.int64),
                    on_sphere=mesh.on_sphere)
    verts, faces = _quadrisect(mesh.vertices, mesh.elements, mesh.on_sphere)
    return Mesh(3, verts, faces, on_sphere=mesh.on_sphere)


def star_radius(mesh, x0):
    """min over elements and corners of (corner - x0) . n.

    Exact for flat panels since (x - x0) . n is affine per panel; may be
    <= 0, which reports that the mesh is not star-shaped about x0.
    """
    x0 = np.asarray(x0, dtype=float)
    corners = mesh.corners  # (ne, d, d)
    vals = np.einsum("eij,ej->ei", corners - x0[None, None, :], mesh.normals)
    vals = np.concatenate(
        [vals, np.einsum("ej,ej->e", mesh.centroids - x0, mesh.normals)[:, None]],
        axis=1)
    return float(vals.min())


def star_center(mesh, x0):
    return StarCenter(np.asarray(x0, dtype=float), star_radius(mesh, x0))


MESH_MAGIC = "BIE-MESH"


def write_mesh(mesh, path):
    with open(path, "w") as f:
        f.write(f"{MESH_MAGIC} {mesh.d} {mesh.n_vertices} {mesh.n_elements}\n")
        for v in mesh.vertices:
            f.write(" ".join(repr(float(c)) for c in v) + "\n")
        for e in mesh.elements:
            f.write(" ".join(str(int(i)) for i in e) + "\n")


def read_mesh(path):
    with open(path) as f:
        tokens = []
        for line in f:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != MESH_MAGIC:
        raise ValueError(f"not a {MESH_MAGIC} file: {path}")
    d, nv, ne = int(tokens[1]), int(tokens[2]), int(tokens[3])
    need = 4 + nv * d + ne * d
    if len(tokens) != need:
        raise ValueError(f"mesh file has {len(tokens)} tokens, expected {need}")
    vals = tokens[4:]
    verts = np.array(vals[:nv * d], dtype=float).reshape(nv, d)
    elems = np.array(vals[nv * d:], dtype=np.int64).reshape(ne, d)
    return Mesh(d, verts, elems)
