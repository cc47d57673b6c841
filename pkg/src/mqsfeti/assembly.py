"""Element matrices and global/torn operator blocks.

Lowest-order Nedelec (Whitney) edge functions ``w = l_a grad l_b - l_b grad l_a``
for the local edge a -> b and P1 hat functions ``l_v``. All integrands are
polynomials of degree <= 2 and are integrated in closed form.

Local element matrices use the local edge orientation of ``LOCAL_EDGES``;
the global assembly multiplies by ``Mesh.tet_edge_signs``.
"""

from dataclasses import dataclass, fields, replace

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError, ConfigurationError
from .mesh import C, LOCAL_EDGES, EntityLabels, Mesh
from .topo import DofPartition

EA, EB = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]

#: gradient embedding: grad(l_v) = sum_e D[e, v] w_e on one tet (local orientation)
LOCAL_GRADIENT = np.zeros((6, 4))
LOCAL_GRADIENT[np.arange(6), EA] = -1.0
LOCAL_GRADIENT[np.arange(6), EB] = 1.0


@dataclass(frozen=True)
class Materials:
    """Piecewise constant coefficients: permeability per subdomain, conductivity
    on the conductor (zero on the insulator) and the angular frequency."""

    mu_C: float = 1.0
    mu_I: float = 1.0
    sigma_C: float = 1.0
    omega: float = 0.0

    def __post_init__(self):
        if not (self.mu_C > 0 and self.mu_I > 0):
            raise ConfigurationError("permeability must be positive")
        if not self.sigma_C > 0:
            raise ConfigurationError("conductor conductivity must be positive")
        if not self.omega >= 0:
            raise ConfigurationError("angular frequency must be nonnegative")

    def coefficients(self, mesh: Mesh, labels: EntityLabels):
        """Per-tet ``(mu, sigma)``. Override for spatially varying data."""
        in_c = labels.tet_label == C
        mu = np.where(in_c, self.mu_C, self.mu_I)
        sigma = np.where(in_c, self.sigma_C, 0.0)
        return mu, sigma


def tet_geometry(points):
    """Volumes and barycentric gradients for tets ``points`` of shape (..., 4, 3)."""
    points = np.asarray(points, dtype=float)
    edges = points[..., 1:, :] - points[..., :1, :]
    vol = np.linalg.det(edges) / 6.0
    scale = np.max(np.abs(edges), axis=(-2, -1)) ** 3
    if np.any(vol <= 1e-14 * scale):
        raise AssemblyError("degenerate or negatively oriented tetrahedron")
    inv = np.linalg.inv(edges)  # columns: grads of l_1..l_3
    g123 = np.swapaxes(inv, -1, -2)
    g0 = -g123.sum(axis=-2, keepdims=True)
    return vol, np.concatenate([g0, g123], axis=-2)


def edge_curls(grads):
    """Constant curls of the six edge functions: 2 grad l_a x grad l_b."""
    return 2.0 * np.cross(grads[..., EA, :], grads[..., EB, :])


def edge_functions(bary, grads):
    """Edge functions at barycentric points ``bary`` (..., Q, 4) -> (..., Q, 6, 3)."""
    la = bary[..., :, EA, None]
    lb = bary[..., :, EB, None]
    ga = grads[..., None, EA, :]
    gb = grads[..., None, EB, :]
    return la * gb - lb * ga


def _sym(a):
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def batch_curl_curl(points, mu):
    vol, grads = tet_geometry(points)
    c = edge_curls(grads)
    return _sym(np.einsum("t,tic,tjc->tij", vol / np.asarray(mu, dtype=float), c, c))


def batch_mass(points, sigma):
    vol, grads = tet_geometry(points)
    g = np.einsum("tic,tjc->tij", grads, grads)
    lam = (np.eye(4) + 1.0) / 20.0  # int l_i l_j / vol
    a, b = EA, EB
    m = (lam[a[:, None], a[None, :]] * g[:, b[:, None], b[None, :]]
         - lam[a[:, None], b[None, :]] * g[:, b[:, None], a[None, :]]
         - lam[b[:, None], a[None, :]] * g[:, a[:, None], b[None, :]]
         + lam[b[:, None], b[None, :]] * g[:, a[:, None], a[None, :]])
    return _sym((np.asarray(sigma, dtype=float) * vol)[:, None, None] * m)


def batch_mixed(points, sigma):
    """(T, 4, 6): int sigma w_e . grad l_v."""
    vol, grads = tet_geometry(points)
    g = np.einsum("tic,tjc->tij", grads, grads)
    m = 0.25 * (g[:, :, EB] - g[:, :, EA])
    return (np.asarray(sigma, dtype=float) * vol)[:, None, None] * m


def batch_p1_stiffness(points, sigma):
    vol, grads = tet_geometry(points)
    return _sym(np.einsum("t,tic,tjc->tij", np.asarray(sigma, dtype=float) * vol, grads, grads))


def local_curl_curl(tet, mu):
    """6x6 curl-curl matrix of one tet (vertex coordinates ``tet``, shape (4, 3))."""
    return batch_curl_curl(np.asarray(tet)[None], [mu])[0]


def local_mass(tet, sigma):
    return batch_mass(np.asarray(tet)[None], [sigma])[0]


def local_mixed(tet, sigma):
    return batch_mixed(np.asarray(tet)[None], [sigma])[0]


def local_p1_stiffness(tet, sigma):
    return batch_p1_stiffness(np.asarray(tet)[None], [sigma])[0]


def _scatter(rows, cols, vals, shape):
    return sp.coo_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=shape).tocsr()


@dataclass(frozen=True, eq=False)
class FullSpaceOperators:
    """Operators over all edges / all vertices, without any gauge.

    ``S`` and ``C`` are vertex x edge and vertex x vertex respectively.
    """

    K: sp.csr_matrix
    K_C: sp.csr_matrix
    K_I: sp.csr_matrix
    M: sp.csr_matrix
    S: sp.csr_matrix
    C: sp.csr_matrix


def assemble_full(mesh: Mesh, labels: EntityLabels, materials: Materials) -> FullSpaceOperators:
    mu, sigma = materials.coefficients(mesh, labels)
    pts = mesh.vertices[mesh.tets]
    E, NV = mesh.n_edges, mesh.n_vertices
    s = mesh.tet_edge_signs.astype(float)
    te, tv = mesh.tet_edges, mesh.tets

    kloc = batch_curl_curl(pts, mu) * s[:, :, None] * s[:, None, :]
    erow = np.broadcast_to(te[:, :, None], kloc.shape)
    ecol = np.broadcast_to(te[:, None, :], kloc.shape)

    def edge_matrix(loc, tets):
        return _scatter(erow[tets], ecol[tets], loc[tets], (E, E))

    tc, ti = labels.tets_C, labels.tets_I
    K = edge_matrix(kloc, slice(None))
    K_C = edge_matrix(kloc, tc)
    K_I = edge_matrix(kloc, ti)

    mloc = batch_mass(pts[tc], sigma[tc]) * s[tc, :, None] * s[tc, None, :]
    M = _scatter(erow[tc], ecol[tc], mloc, (E, E))

    xloc = batch_mixed(pts[tc], sigma[tc]) * s[tc, None, :]
    S = _scatter(np.broadcast_to(tv[tc, :, None], xloc.shape), np.broadcast_to(te[tc, None, :], xloc.shape),
                 xloc, (NV, E))

    ploc = batch_p1_stiffness(pts[tc], sigma[tc])
    Cm = _scatter(np.broadcast_to(tv[tc, :, None], ploc.shape), np.broadcast_to(tv[tc, None, :], ploc.shape),
                  ploc, (NV, NV))
    return FullSpaceOperators(K, K_C, K_I, M, S, Cm)


@dataclass(frozen=True, eq=False)
class OperatorBlocks:
    """Gauged operator blocks of the monolithic and the torn systems.

    Matrices are real sparse; the frequency enters only when the block
    systems are formed. Unset fields stay ``None``.
    """

    omega: float = 0.0
    K: sp.csr_matrix = None
    M: sp.csr_matrix = None
    S: sp.csr_matrix = None
    C: sp.csr_matrix = None
    K_I: sp.csr_matrix = None
    K_C: sp.csr_matrix = None
    M_C: sp.csr_matrix = None
    S_C: sp.csr_matrix = None
    C_C: sp.csr_matrix = None
    B_C: sp.csr_matrix = None
    B_I: sp.csr_matrix = None
    J: np.ndarray = None
    J_C: np.ndarray = None
    J_I: np.ndarray = None
    j: np.ndarray = None

    def merge(self, other: "OperatorBlocks") -> "OperatorBlocks":
        update = {f.name: getattr(other, f.name) for f in fields(other)
                  if f.name != "omega" and getattr(other, f.name) is not None}
        return replace(self, **update)


def _sub(m, rows, cols):
    return m[rows][:, cols].tocsr()


def assemble_global(mesh, labels, partition: DofPartition, materials: Materials, full=None) -> OperatorBlocks:
    """K, M over cotree DOFs; S, C over pinned conductor vertices."""
    full = full or assemble_full(mesh, labels, materials)
    V, UC = partition.V_edges, partition.UC_vertices
    return OperatorBlocks(omega=materials.omega, K=_sub(full.K, V, V), M=_sub(full.M, V, V),
                          S=_sub(full.S, UC, V), C=_sub(full.C, UC, UC))


def jump_operators(partition: DofPartition):
    """Signed selection matrices (B_C, B_I) onto the interface cotree edges."""
    G = partition.VG_edges
    rows = np.arange(len(G))
    ci, ii = partition.VC_index[G], partition.VI_index[G]
    if np.any(ci < 0) or np.any(ii < 0):
        raise AssemblyError("interface cotree edge missing from a subdomain space: splitting is not compatible")
    B_C = sp.csr_matrix((np.ones(len(G)), (rows, ci)), shape=(len(G), partition.dim_VC))
    B_I = sp.csr_matrix((-np.ones(len(G)), (rows, ii)), shape=(len(G), partition.dim_VI))
    return B_C, B_I


def assemble_torn(mesh, labels, partition: DofPartition, materials: Materials, full=None) -> OperatorBlocks:
    """Subdomain operators on V_C / V_I and the jump operators."""
    full = full or assemble_full(mesh, labels, materials)
    VC, VI, UC = partition.VC_edges, partition.VI_edges, partition.UC_vertices
    B_C, B_I = jump_operators(partition)
    return OperatorBlocks(omega=materials.omega, K_I=_sub(full.K_I, VI, VI), K_C=_sub(full.K_C, VC, VC),
                          M_C=_sub(full.M, VC, VC), S_C=_sub(full.S, UC, VC), C_C=_sub(full.C, UC, UC),
                          B_C=B_C, B_I=B_I)
