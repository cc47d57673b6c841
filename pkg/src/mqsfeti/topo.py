"""Interface-first tree-cotree splitting and the induced discrete spaces.

A spanning tree of the interface graph is built first and then continued
separately into the closed conductor and the closed insulator. The union is
a spanning tree of the whole mesh whose restriction to either subdomain is
again a spanning tree there, which is what makes the cotree spaces of the
two subdomains glue together through the interface cotree edges only.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import TopologyError
from .mesh import EntityLabels, Mesh


@dataclass(frozen=True, eq=False)
class TreeCotree:
    tree_gamma: np.ndarray
    tree_C_ext: np.ndarray
    tree_I_ext: np.ndarray
    is_tree: np.ndarray
    root: int

    @property
    def tree_edges(self):
        return np.sort(np.concatenate([self.tree_gamma, self.tree_C_ext, self.tree_I_ext]))

    @property
    def is_cotree(self):
        return ~self.is_tree


def _incidence_lists(edges, edge_ids):
    """vertex -> [(edge, neighbour)] in ascending edge order."""
    adj = {}
    for e in sorted(int(k) for k in edge_ids):
        a, b = (int(v) for v in edges[e])
        adj.setdefault(a, []).append((e, b))
        adj.setdefault(b, []).append((e, a))
    return adj


def _bfs(edges, edge_ids, allowed, seeds):
    """Breadth-first spanning forest grown from ``seeds`` over ``edge_ids``.

    Returns the tree edges (in discovery order) and the visited vertex set.
    """
    adj = _incidence_lists(edges, edge_ids)
    visited = set(seeds)
    queue = deque(sorted(seeds))
    tree = []
    while queue:
        v = queue.popleft()
        for e, w in adj.get(v, ()):
            if w not in visited and w in allowed:
                visited.add(w)
                tree.append(e)
                queue.append(w)
    return tree, visited


def build_interface_tree(mesh: Mesh, labels: EntityLabels, root=None) -> np.ndarray:
    """Spanning tree of the interface vertex-edge graph, rooted at ``root``.

    ``root`` defaults to the lowest-index interface vertex.
    """
    gamma_vertices = labels.vertices_gamma
    if len(gamma_vertices) == 0:
        raise TopologyError("interface is empty")
    if root is None:
        root = int(gamma_vertices[0])
    if not labels.vertex_gamma[root]:
        raise TopologyError(f"root vertex {root} is not on the interface")
    allowed = set(gamma_vertices.tolist())
    tree, visited = _bfs(mesh.edges, labels.edges_gamma, allowed, [root])
    if len(visited) != len(allowed):
        raise TopologyError("interface graph is disconnected")
    return np.array(sorted(tree), dtype=np.int64)


def extend_tree(mesh: Mesh, labels: EntityLabels, interface_tree, subdomain: str) -> np.ndarray:
    """Continue the interface tree into the closure of ``subdomain`` ('C' or 'I')."""
    if subdomain == "C":
        vmask, emask = labels.vertex_in_C, labels.edge_in_C
    elif subdomain == "I":
        vmask, emask = labels.vertex_in_I, labels.edge_in_I
    else:
        raise ValueError(f"unknown subdomain {subdomain!r}")
    allowed = set(np.flatnonzero(vmask).tolist())
    seeds = labels.vertices_gamma.tolist()
    tree, visited = _bfs(mesh.edges, np.flatnonzero(emask), allowed, seeds)
    if len(visited) != len(allowed):
        raise TopologyError(f"subdomain {subdomain} is not connected to the interface")
    return np.array(sorted(tree), dtype=np.int64)


def build_tree_cotree(mesh: Mesh, labels: EntityLabels, root=None) -> TreeCotree:
    tg = build_interface_tree(mesh, labels, root)
    if root is None:
        root = int(labels.vertices_gamma[0])
    tc = extend_tree(mesh, labels, tg, "C")
    ti = extend_tree(mesh, labels, tg, "I")
    is_tree = np.zeros(mesh.n_edges, dtype=bool)
    is_tree[np.concatenate([tg, tc, ti])] = True
    for a in (tg, tc, ti, is_tree):
        a.setflags(write=False)
    return TreeCotree(tg, tc, ti, is_tree, int(root))


def _index_map(n, members):
    index = np.full(n, -1, dtype=np.int64)
    index[members] = np.arange(len(members))
    index.setflags(write=False)
    members.setflags(write=False)
    return index


@dataclass(frozen=True, eq=False)
class DofPartition:
    """Compact index maps for the discrete spaces.

    ``*_edges`` / ``*_vertices`` list the global entities in DOF order and
    ``*_index`` maps a global entity to its DOF (or -1).
    """

    n_edges: int
    n_vertices: int
    root: int
    is_cotree: np.ndarray
    V_edges: np.ndarray
    V_index: np.ndarray
    VC_edges: np.ndarray
    VC_index: np.ndarray
    VI_edges: np.ndarray
    VI_index: np.ndarray
    VG_edges: np.ndarray
    VG_index: np.ndarray
    U_vertices: np.ndarray
    U_index: np.ndarray
    UC_vertices: np.ndarray
    UC_index: np.ndarray

    dim_V = property(lambda self: len(self.V_edges))
    dim_VC = property(lambda self: len(self.VC_edges))
    dim_VI = property(lambda self: len(self.VI_edges))
    dim_VG = property(lambda self: len(self.VG_edges))
    dim_U = property(lambda self: len(self.U_vertices))
    dim_UC = property(lambda self: len(self.UC_vertices))


def build_partition(mesh: Mesh, labels: EntityLabels, trees: TreeCotree) -> DofPartition:
    """Index maps of V, V_C, V_I, V_Gamma (cotree edges) and U, U_C (pinned vertices)."""
    cot = ~trees.is_tree
    E, NV = mesh.n_edges, mesh.n_vertices
    V = np.flatnonzero(cot)
    VC = np.flatnonzero(cot & labels.edge_in_C)
    VI = np.flatnonzero(cot & labels.edge_in_I)
    VG = np.flatnonzero(cot & labels.edge_gamma)
    keep = np.ones(NV, dtype=bool)
    keep[trees.root] = False
    U = np.flatnonzero(keep)
    UC = np.flatnonzero(keep & labels.vertex_in_C)
    cot = cot.copy()
    cot.setflags(write=False)
    return DofPartition(E, NV, trees.root, cot,
                        V, _index_map(E, V), VC, _index_map(E, VC), VI, _index_map(E, VI),
                        VG, _index_map(E, VG), U, _index_map(NV, U), UC, _index_map(NV, UC))


def full_incidence(mesh: Mesh) -> sp.csr_matrix:
    """Signed edge-vertex incidence over all vertices (E x V): -1 tail, +1 head."""
    E = mesh.n_edges
    rows = np.repeat(np.arange(E), 2)
    data = np.tile([-1.0, 1.0], E)
    return sp.csr_matrix((data, (rows, mesh.edges.ravel())), shape=(E, mesh.n_vertices))


@dataclass(frozen=True, eq=False)
class IncidenceGradient:
    """Discrete gradient from nodal values to edge coefficients.

    ``G`` acts on U (root column removed). ``G_C`` maps U_C into the edges of
    the closed conductor and ``G_I`` maps insulator-closure vertices (root
    removed if present) into insulator-closure edges.
    """

    G: sp.csr_matrix
    G_C: sp.csr_matrix
    G_I: sp.csr_matrix
    full: sp.csr_matrix


def build_gradient(mesh: Mesh, partition: DofPartition, labels: EntityLabels = None) -> IncidenceGradient:
    full = full_incidence(mesh)
    G = full[:, partition.U_vertices].tocsr()
    if labels is None:
        return IncidenceGradient(G, None, None, full)
    G_C = full[labels.edges_C][:, partition.UC_vertices].tocsr()
    vi = labels.vertices_I
    vi = vi[vi != partition.root]
    G_I = full[labels.edges_I][:, vi].tocsr()
    return IncidenceGradient(G, G_C, G_I, full)


def splitting_dimensions(mesh: Mesh, labels: EntityLabels, partition: DofPartition) -> dict:
    """Dimension and restriction identities of the compatible splitting.

    Each entry maps a name to ``(lhs, rhs)``; the splitting is compatible when
    every pair agrees.
    """
    nV, nE = mesh.n_vertices, mesh.n_edges
    out = {
        "global": (nE, (nV - 1) + partition.dim_V),
        "conductor": (int(labels.edge_in_C.sum()), (int(labels.vertex_in_C.sum()) - 1) + partition.dim_VC),
        "insulator": (int(labels.edge_in_I.sum()), (int(labels.vertex_in_I.sum()) - 1) + partition.dim_VI),
        "interface": (int(labels.edge_gamma.sum()), (int(labels.vertex_gamma.sum()) - 1) + partition.dim_VG),
    }
    return out


def restricted_cotree_sets(mesh: Mesh, labels: EntityLabels, trees: TreeCotree) -> dict:
    """Global cotree restricted to each closure vs. the subdomain's own cotree.

    The subdomain cotree is computed from the subdomain's own spanning tree
    (interface tree plus its extension), independently of the global mask.
    """
    out = {}
    for name, emask, ext in (("C", labels.edge_in_C, trees.tree_C_ext), ("I", labels.edge_in_I, trees.tree_I_ext)):
        local_tree = set(trees.tree_gamma.tolist()) | set(ext.tolist())
        own = set(np.flatnonzero(emask).tolist()) - local_tree
        restricted = set(np.flatnonzero(emask & ~trees.is_tree).tolist())
        out[name] = (restricted, own)
    gamma_tree = set(trees.tree_gamma.tolist())
    out["Gamma"] = (set(np.flatnonzero(labels.edge_gamma & ~trees.is_tree).tolist()),
                    set(labels.edges_gamma.tolist()) - gamma_tree)
    return out
