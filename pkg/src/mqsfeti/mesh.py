"""Structured Kuhn tetrahedral meshes of a box with a box-shaped conductor.

Every grid cube is split into six tetrahedra sharing the body diagonal from
the cube's min corner to its max corner, so neighbouring cubes always agree
on their shared face diagonals. Edges are oriented from the lower to the
higher global vertex index; that single convention is used by every
operator downstream.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import permutations

import numpy as np

from .errors import ConfigurationError, TopologyError

#: local vertex pairs of the six tetrahedron edges
LOCAL_EDGES = np.array([(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
#: local face k is opposite local vertex k
LOCAL_FACES = np.array([(1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)])

C, I = 0, 1
C_INTERIOR, I_INTERIOR, GAMMA, BOUNDARY = 0, 1, 2, 3
LABEL_NAMES = {C_INTERIOR: "C_interior", I_INTERIOR: "I_interior", GAMMA: "Gamma", BOUNDARY: "boundary"}


def _kuhn_corners():
    unit = np.eye(3, dtype=int)
    tets = []
    for perm in permutations(range(3)):
        c1 = unit[perm[0]]
        c2 = c1 + unit[perm[1]]
        corners = [np.zeros(3, dtype=int), c1, c2, np.ones(3, dtype=int)]
        if np.linalg.det(np.array(corners[1:]) - corners[0]) < 0:
            corners[2], corners[3] = corners[3], corners[2]
        tets.append(corners)
    return np.array(tets)  # (6, 4, 3)


KUHN_CORNERS = _kuhn_corners()


@dataclass(frozen=True)
class BoxGeometry:
    """Axis-aligned domain box with an axis-aligned conductor sub-box.

    ``resolution`` is the number of grid cells per unit length; all box
    extents must be resolved exactly by the grid.
    """

    domain_min: tuple
    domain_max: tuple
    conductor_min: tuple
    conductor_max: tuple
    resolution: int

    def __post_init__(self):
        for name in ("domain_min", "domain_max", "conductor_min", "conductor_max"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 3:
                raise ConfigurationError(f"{name} must have three components")
            object.__setattr__(self, name, value)

    @property
    def spacing(self):
        return 1.0 / self.resolution

    def _to_grid(self, value, name):
        steps = value * self.resolution
        index = int(round(steps))
        if abs(steps - index) > 1e-9 * max(1.0, abs(steps)):
            raise ConfigurationError(f"{name}={value!r} is not aligned to the grid of spacing {self.spacing}")
        return index

    @cached_property
    def grid(self):
        """Validated integer description ``(shape, conductor_lo, conductor_hi)``.

        Indices are relative to ``domain_min``.
        """
        if not isinstance(self.resolution, (int, np.integer)) or self.resolution < 1:
            raise ConfigurationError("resolution must be a positive integer")
        shape, lo, hi = [], [], []
        for axis in range(3):
            d0, d1 = self.domain_min[axis], self.domain_max[axis]
            c0, c1 = self.conductor_min[axis], self.conductor_max[axis]
            n = self._to_grid(d1 - d0, f"domain extent along axis {axis}")
            a = self._to_grid(c0 - d0, f"conductor_min[{axis}]")
            b = self._to_grid(c1 - d0, f"conductor_max[{axis}]")
            if n < 1:
                raise ConfigurationError(f"domain box is empty along axis {axis}")
            if not 0 <= a < b <= n:
                raise ConfigurationError(
                    f"conductor box must be nonempty and inside the domain along axis {axis}"
                )
            shape.append(n)
            lo.append(a)
            hi.append(b)
        touches = [(lo[a] == 0) + (hi[a] == shape[a]) for a in range(3)]
        spans = [a for a in range(3) if touches[a] == 2]
        if len(spans) == 3:
            raise ConfigurationError("insulator is empty: the conductor fills the whole domain")
        if len(spans) == 2:
            (free,) = set(range(3)) - set(spans)
            if touches[free] == 0:
                raise ConfigurationError("conductor slab splits the insulator into two components")
        if len(spans) == 1:
            others = [a for a in range(3) if a != spans[0]]
            if all(touches[a] == 0 for a in others):
                raise ConfigurationError(
                    "conductor bar tunnels through the domain: insulator is not simply connected"
                )
        return tuple(shape), tuple(lo), tuple(hi)


@dataclass(frozen=True, eq=False)
class Mesh:
    """Tetrahedral mesh with globally oriented edges and sorted faces.

    ``tet_edge_signs[t, k]`` is +1 when local edge ``LOCAL_EDGES[k]`` of tet
    ``t`` runs along the global edge orientation (low to high index).
    ``face_tets`` holds -1 in the second column for boundary faces.
    """

    vertices: np.ndarray
    tets: np.ndarray
    edges: np.ndarray
    faces: np.ndarray
    tet_edges: np.ndarray
    tet_edge_signs: np.ndarray
    tet_faces: np.ndarray
    face_tets: np.ndarray
    tet_cells: np.ndarray
    vertex_grid: np.ndarray
    spacing: float

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def n_faces(self):
        return len(self.faces)

    @property
    def n_tets(self):
        return len(self.tets)

    @property
    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces - self.n_tets

    @cached_property
    def signed_volumes(self):
        p = self.vertices[self.tets]
        return np.linalg.det(p[:, 1:] - p[:, :1]) / 6.0

    @cached_property
    def boundary_faces(self):
        return np.flatnonzero(self.face_tets[:, 1] < 0)


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)


def build_box_mesh(geometry: BoxGeometry) -> Mesh:
    """Kuhn-subdivide the grid of ``geometry`` into positively oriented tets."""
    (nx, ny, nz), _, _ = geometry.grid
    h = geometry.spacing

    gk, gj, gi = np.meshgrid(np.arange(nz + 1), np.arange(ny + 1), np.arange(nx + 1), indexing="ij")
    vertex_grid = np.column_stack([gi.ravel(), gj.ravel(), gk.ravel()])
    vertices = np.asarray(geometry.domain_min) + h * vertex_grid

    ck, cj, ci = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    cells = np.column_stack([ci.ravel(), cj.ravel(), ck.ravel()])

    corner = cells[:, None, None, :] + KUHN_CORNERS[None]  # (cells, 6, 4, 3)
    vid = corner[..., 0] + (nx + 1) * (corner[..., 1] + (ny + 1) * corner[..., 2])
    tets = vid.reshape(-1, 4)
    tet_cells = np.repeat(cells, 6, axis=0)

    pairs = np.sort(tets[:, LOCAL_EDGES], axis=2)  # (T, 6, 2)
    edges, inverse = np.unique(pairs.reshape(-1, 2), axis=0, return_inverse=True)
    tet_edges = inverse.reshape(-1, 6)
    tet_edge_signs = np.where(tets[:, LOCAL_EDGES[:, 0]] < tets[:, LOCAL_EDGES[:, 1]], 1, -1)

    tri = np.sort(tets[:, LOCAL_FACES], axis=2)
    faces, finv = np.unique(tri.reshape(-1, 3), axis=0, return_inverse=True)
    tet_faces = finv.reshape(-1, 4)

    face_tets = np.full((len(faces), 2), -1, dtype=np.int64)
    owners = np.repeat(np.arange(len(tets)), 4)
    flat = tet_faces.ravel()
    order = np.argsort(flat, kind="stable")
    counts = np.bincount(flat, minlength=len(faces))
    if counts.max() > 2:
        raise TopologyError("non-manifold face in generated mesh")
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    face_tets[:, 0] = owners[order[starts]]
    two = counts == 2
    face_tets[two, 1] = owners[order[starts[two] + 1]]

    _frozen(vertices, tets, edges, faces, tet_edges, tet_edge_signs, tet_faces, face_tets, tet_cells, vertex_grid)
    return Mesh(vertices, tets, edges, faces, tet_edges, tet_edge_signs, tet_faces, face_tets, tet_cells,
                vertex_grid, h)


@dataclass(frozen=True, eq=False)
class EntityLabels:
    """Subdomain membership of every mesh entity.

    Boolean masks ``*_in_C`` / ``*_in_I`` refer to the closures of the
    subdomains; ``*_gamma`` marks entities on the interface. The integer
    label arrays resolve overlaps with priority Gamma > boundary > interior.
    """

    tet_label: np.ndarray
    vertex_in_C: np.ndarray
    vertex_in_I: np.ndarray
    edge_in_C: np.ndarray
    edge_in_I: np.ndarray
    face_in_C: np.ndarray
    face_in_I: np.ndarray
    vertex_boundary: np.ndarray
    edge_boundary: np.ndarray
    face_boundary: np.ndarray

    @property
    def vertex_gamma(self):
        return self.vertex_in_C & self.vertex_in_I

    @property
    def edge_gamma(self):
        return self.edge_in_C & self.edge_in_I

    @property
    def face_gamma(self):
        return self.face_in_C & self.face_in_I

    def _label(self, in_c, boundary):
        out = np.where(in_c, C_INTERIOR, I_INTERIOR)
        out[boundary] = BOUNDARY
        return out

    @cached_property
    def vertex_label(self):
        out = self._label(self.vertex_in_C, self.vertex_boundary)
        out[self.vertex_gamma] = GAMMA
        return out

    @cached_property
    def edge_label(self):
        out = self._label(self.edge_in_C, self.edge_boundary)
        out[self.edge_gamma] = GAMMA
        return out

    @cached_property
    def face_label(self):
        out = self._label(self.face_in_C, self.face_boundary)
        out[self.face_gamma] = GAMMA
        return out

    vertices_C = property(lambda self: np.flatnonzero(self.vertex_in_C))
    vertices_I = property(lambda self: np.flatnonzero(self.vertex_in_I))
    vertices_gamma = property(lambda self: np.flatnonzero(self.vertex_gamma))
    edges_C = property(lambda self: np.flatnonzero(self.edge_in_C))
    edges_I = property(lambda self: np.flatnonzero(self.edge_in_I))
    edges_gamma = property(lambda self: np.flatnonzero(self.edge_gamma))
    faces_gamma = property(lambda self: np.flatnonzero(self.face_gamma))
    tets_C = property(lambda self: np.flatnonzero(self.tet_label == C))
    tets_I = property(lambda self: np.flatnonzero(self.tet_label == I))


def _mark(n, index):
    mask = np.zeros(n, dtype=bool)
    mask[np.asarray(index).ravel()] = True
    return mask


def surface_is_disc_or_sphere(mesh: Mesh, faces) -> bool:
    """Connected triangulated surface with Euler characteristic 1 or 2."""
    tri = mesh.faces[faces]
    if len(tri) == 0:
        return False
    verts = np.unique(tri)
    edges = np.unique(np.sort(tri[:, [[0, 1], [0, 2], [1, 2]]].reshape(-1, 2), axis=1), axis=0)
    chi = len(verts) - len(edges) + len(tri)
    parent = {v: v for v in verts.tolist()}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges.tolist():
        parent[find(a)] = find(b)
    components = len({find(v) for v in verts.tolist()})
    return components == 1 and chi in (1, 2)


def classify_entities(mesh: Mesh, geometry: BoxGeometry) -> EntityLabels:
    """Label tets by subdomain and derive closure / interface index sets."""
    _, lo, hi = geometry.grid
    cells = mesh.tet_cells
    inside = np.all((cells >= np.array(lo)) & (cells < np.array(hi)), axis=1)
    tet_label = np.where(inside, C, I)
    tc, ti = np.flatnonzero(inside), np.flatnonzero(~inside)

    bfaces = mesh.boundary_faces
    vb = _mark(mesh.n_vertices, mesh.faces[bfaces])
    bedges = np.unique(np.sort(mesh.faces[bfaces][:, [[0, 1], [0, 2], [1, 2]]].reshape(-1, 2), axis=1), axis=0)
    eb = np.zeros(mesh.n_edges, dtype=bool)
    if len(bedges):
        idx = {tuple(e): k for k, e in enumerate(mesh.edges.tolist())}
        eb[[idx[tuple(e)] for e in bedges.tolist()]] = True

    labels = EntityLabels(
        tet_label=tet_label,
        vertex_in_C=_mark(mesh.n_vertices, mesh.tets[tc]),
        vertex_in_I=_mark(mesh.n_vertices, mesh.tets[ti]),
        edge_in_C=_mark(mesh.n_edges, mesh.tet_edges[tc]),
        edge_in_I=_mark(mesh.n_edges, mesh.tet_edges[ti]),
        face_in_C=_mark(mesh.n_faces, mesh.tet_faces[tc]),
        face_in_I=_mark(mesh.n_faces, mesh.tet_faces[ti]),
        vertex_boundary=vb,
        edge_boundary=eb,
        face_boundary=_mark(mesh.n_faces, bfaces),
    )
    for arr in (tet_label, labels.vertex_in_C, labels.vertex_in_I, labels.edge_in_C, labels.edge_in_I,
                labels.face_in_C, labels.face_in_I, vb, eb, labels.face_boundary):
        arr.setflags(write=False)
    if not surface_is_disc_or_sphere(mesh, labels.faces_gamma):
        raise TopologyError("interface is not a connected, simply connected surface")
    return labels
