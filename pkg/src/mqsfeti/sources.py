"""Current sources: analytic catalog, load vectors and solenoidality handling.

The load vector over *all* edges, ``J_full[e] = <J, w_e>``, is the primary
object. Everything else derives from it:

* ``J``   -- restriction to the cotree DOFs,
* ``J_C``, ``J_I`` -- a distribution of ``J`` onto the subdomain spaces,
* ``j``   -- the current tested with gradients of extended conductor hats,
  ``j = (grad E)^T J_full``; exact because gradients of P1 functions lie in
  the span of the edge functions.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import Materials, edge_functions, tet_geometry
from .errors import ConfigurationError, SourceError
from .mesh import LOCAL_FACES, BoxGeometry, EntityLabels, Mesh
from .quadrature import tet_rule, triangle_rule
from .topo import DofPartition, full_incidence


@dataclass(frozen=True)
class SourceSpec:
    """Impressed current description.

    ``volumetric(x)`` maps points (N, 3) to current densities (N, 3);
    ``surface(x, n, mu)`` maps boundary points, outward normals and the
    adjacent permeability to tangential surface currents. ``raw`` is an
    edge load vector used verbatim. ``support`` is ``"C-only"`` when the
    volumetric current vanishes outside the conductor.
    """

    kind: str = "zero"
    volumetric: Optional[Callable] = None
    surface: Optional[Callable] = None
    raw: Optional[np.ndarray] = None
    support: str = "anywhere"
    quad_order: int = 4
    project: bool = False


def _loop_field(center, axis, radius, width, magnitude):
    center = np.asarray(center, dtype=float)
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)

    def field(x):
        d = np.asarray(x, dtype=float) - center
        z = d @ axis
        radial = d - z[:, None] * axis
        rho = np.linalg.norm(radial, axis=1)
        s2 = ((rho - radius) ** 2 + z ** 2) / width ** 2
        bump = np.where(s2 < 1.0, (1.0 - s2) ** 2, 0.0)
        safe = np.where(rho > 0, rho, 1.0)
        ephi = np.cross(axis, radial) / safe[:, None]
        return magnitude * bump[:, None] * ephi

    return field


def loop_bounding_box(center, axis, radius, width):
    """Axis-aligned bounding box of the support torus of a loop current."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    half = radius * np.sqrt(np.clip(1.0 - axis ** 2, 0.0, None)) + width
    center = np.asarray(center, dtype=float)
    return center - half, center + half


def _check_loop(center, axis, radius, width):
    if not (radius > 0 and width > 0 and width < radius):
        raise ConfigurationError("loop needs 0 < width < radius")
    if np.linalg.norm(np.asarray(axis, dtype=float)) == 0:
        raise ConfigurationError("loop axis must be nonzero")


def conductor_loop(geometry: BoxGeometry, center, axis, radius, width, magnitude=1.0, quad_order=4) -> SourceSpec:
    """Divergence-free azimuthal loop current supported inside the conductor."""
    _check_loop(center, axis, radius, width)
    lo, hi = loop_bounding_box(center, axis, radius, width)
    if np.any(lo < np.asarray(geometry.conductor_min)) or np.any(hi > np.asarray(geometry.conductor_max)):
        raise ConfigurationError("conductor_loop support leaves the conductor box")
    return SourceSpec("conductor_loop", volumetric=_loop_field(center, axis, radius, width, magnitude),
                      support="C-only", quad_order=quad_order)


def insulator_coil(geometry: BoxGeometry, center, axis, radius, width, magnitude=1.0, quad_order=4,
                   project=True) -> SourceSpec:
    """Loop current in the insulator; its load vector needs projection."""
    _check_loop(center, axis, radius, width)
    lo, hi = loop_bounding_box(center, axis, radius, width)
    if np.any(lo < np.asarray(geometry.domain_min)) or np.any(hi > np.asarray(geometry.domain_max)):
        raise ConfigurationError("insulator_coil support leaves the domain")
    clo, chi = np.asarray(geometry.conductor_min), np.asarray(geometry.conductor_max)
    if np.all(lo < chi) and np.all(hi > clo):
        raise ConfigurationError("insulator_coil support overlaps the conductor box")
    return SourceSpec("insulator_coil", volumetric=_loop_field(center, axis, radius, width, magnitude),
                      support="anywhere", quad_order=quad_order, project=project)


def boundary_uniform_B(B0) -> SourceSpec:
    """Surface current (B0 / mu) x n whose exact field is the uniform B0."""
    B0 = np.asarray(B0, dtype=float)
    if B0.shape != (3,):
        raise ConfigurationError("B0 must be a 3-vector")

    def surface(x, n, mu):
        return np.cross(np.broadcast_to(B0, n.shape) / np.asarray(mu)[..., None], n)

    return SourceSpec("boundary_uniform_B", surface=surface, support="anywhere", quad_order=2)


def raw_source(values, project=False) -> SourceSpec:
    return SourceSpec("raw", raw=np.asarray(values), project=project)


def load_vector(mesh: Mesh, labels: EntityLabels, source: SourceSpec, materials: Materials = None) -> np.ndarray:
    """``<J, w_e>`` for every global edge (volumetric + boundary parts)."""
    E = mesh.n_edges
    if source.raw is not None:
        raw = np.asarray(source.raw)
        if raw.shape != (E,):
            raise ConfigurationError(f"raw source must have {E} edge entries, got shape {raw.shape}")
        return raw.copy()
    out = np.zeros(E, dtype=complex)
    sign = mesh.tet_edge_signs
    pts = mesh.vertices[mesh.tets]
    if source.volumetric is not None:
        bary, w = tet_rule(source.quad_order)
        vol, grads = tet_geometry(pts)
        xq = np.einsum("qi,tic->tqc", bary, pts)
        jq = source.volumetric(xq.reshape(-1, 3)).reshape(xq.shape)
        wq = edge_functions(bary[None], grads)  # (T, Q, 6, 3)
        loc = np.einsum("q,tqc,tqec->te", w, jq, wq) * vol[:, None] * sign
        out += np.bincount(mesh.tet_edges.ravel(), weights=loc.real.ravel(), minlength=E)
        out += 1j * np.bincount(mesh.tet_edges.ravel(), weights=loc.imag.ravel(), minlength=E)
    if source.surface is not None:
        materials = materials or Materials()
        mu, _ = materials.coefficients(mesh, labels)
        bf = mesh.boundary_faces
        tets = mesh.face_tets[bf, 0]
        # local index of the vertex opposite the boundary face
        opp = np.argmax(mesh.tet_faces[tets] == bf[:, None], axis=1)
        vol, grads = tet_geometry(pts[tets])
        fb, fw = triangle_rule(source.quad_order)
        bary = np.zeros((len(bf), len(fw), 4))
        local = LOCAL_FACES[opp]  # (B, 3)
        for k in range(3):
            bary[np.arange(len(bf))[:, None], :, local[:, k][:, None]] = fb[None, :, k]
        xq = np.einsum("bqi,bic->bqc", bary, pts[tets])
        normal = -grads[np.arange(len(bf)), opp]
        normal /= np.linalg.norm(normal, axis=1)[:, None]
        tri = mesh.vertices[mesh.faces[bf]]
        area = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
        nq = np.broadcast_to(normal[:, None, :], xq.shape)
        js = source.surface(xq.reshape(-1, 3), nq.reshape(-1, 3), np.repeat(mu[tets], len(fw))).reshape(xq.shape)
        wq = edge_functions(bary, grads)
        loc = np.einsum("q,bqc,bqec->be", fw, js, wq) * area[:, None] * sign[tets]
        idx = mesh.tet_edges[tets].ravel()
        out += np.bincount(idx, weights=loc.real.ravel(), minlength=E)
        out += 1j * np.bincount(idx, weights=loc.imag.ravel(), minlength=E)
    return out


def insulator_only_vertices(labels: EntityLabels) -> np.ndarray:
    """Vertices where test functions vanishing on the closed conductor live."""
    return np.flatnonzero(~labels.vertex_in_C)


def solenoidality_residual(mesh: Mesh, labels: EntityLabels, J_full) -> np.ndarray:
    """``<J, grad q_v>`` for every insulator-only vertex hat ``q_v``."""
    G0 = full_incidence(mesh)[:, insulator_only_vertices(labels)]
    return G0.T @ J_full


def project_solenoidal(mesh: Mesh, labels: EntityLabels, partition: DofPartition, raw_J) -> np.ndarray:
    """Remove the insulator-gradient part: ``raw - G0 (G0^T G0)^{-1} G0^T raw``."""
    raw_J = np.asarray(raw_J)
    G0 = full_incidence(mesh)[:, insulator_only_vertices(labels)].tocsc()
    if G0.shape[1] == 0:
        return raw_J.copy()
    L = (G0.T @ G0).tocsc()
    try:
        lu = spla.splu(sp.csc_matrix(L, dtype=complex))
    except RuntimeError as exc:
        raise SourceError("singular graph normal equations in solenoidal projection") from exc
    out = raw_J.astype(complex)
    # second sweep removes the roundoff left by the first one
    for _ in range(2):
        out = out - G0 @ lu.solve(np.asarray(G0.T @ out, dtype=complex))
    return out if np.iscomplexobj(raw_J) else out.real


def extension_operator(mesh: Mesh, labels: EntityLabels, partition: DofPartition, kind="zero") -> sp.csr_matrix:
    """Map U_C nodal values to all vertices (NV x dim U_C).

    ``"zero"`` extends by zero to insulator-only vertices; ``"harmonic"``
    solves the graph Laplace problem there with the interface values as
    Dirichlet data.
    """
    NV, nUC = mesh.n_vertices, partition.dim_UC
    base = sp.csr_matrix((np.ones(nUC), (partition.UC_vertices, np.arange(nUC))), shape=(NV, nUC))
    if kind == "zero":
        return base
    if kind != "harmonic":
        raise ValueError(f"unknown extension {kind!r}")
    F = full_incidence(mesh)
    L = (F.T @ F).tocsr()
    free = insulator_only_vertices(labels)
    if len(free) == 0:
        return base
    rhs = -(L[free][:, partition.UC_vertices]).toarray()
    vals = spla.splu(L[free][:, free].tocsc()).solve(rhs)
    ext = sp.lil_matrix((NV, nUC))
    ext[partition.UC_vertices, np.arange(nUC)] = 1.0
    ext[free] = vals
    return ext.tocsr()


def conductor_gradient_load(mesh, labels, partition, J_full, extension="zero") -> np.ndarray:
    """``j[q] = <J, grad(E q)>`` for every U_C basis function."""
    Eop = extension_operator(mesh, labels, partition, extension)
    D = full_incidence(mesh) @ Eop
    return D.T @ J_full


def distribute(partition: DofPartition, J_full, interface_share=1.0):
    """Split the cotree load into (J_C, J_I).

    Interface cotree edges give ``interface_share`` of their value to the
    conductor copy and the rest to the insulator copy.
    """
    J_full = np.asarray(J_full)
    gamma = np.zeros(partition.n_edges, dtype=bool)
    gamma[partition.VG_edges] = True
    J_C = J_full[partition.VC_edges] * np.where(gamma[partition.VC_edges], interface_share, 1.0)
    J_I = J_full[partition.VI_edges] * np.where(gamma[partition.VI_edges], 1.0 - interface_share, 1.0)
    return J_C, J_I


def assemble_source(mesh, labels, partition: DofPartition, source: SourceSpec, materials: Materials = None,
                    interface_share=1.0, extension="zero", tol=1e-10):
    """Return ``(J, J_C, J_I, j, J_full)``.

    Unless the source is projected, the load vector must satisfy the
    discrete solenoidality condition to ``tol`` relative to its size.
    """
    J_full = load_vector(mesh, labels, source, materials)
    if source.project:
        J_full = project_solenoidal(mesh, labels, partition, J_full)
    res = solenoidality_residual(mesh, labels, J_full)
    scale = max(np.max(np.abs(J_full), initial=0.0), np.finfo(float).tiny)
    if res.size and np.max(np.abs(res)) > tol * scale:
        worst = int(np.argmax(np.abs(res)))
        vertex = int(insulator_only_vertices(labels)[worst])
        raise SourceError(f"source is not discretely solenoidal outside the conductor: "
                          f"|<J, grad q>| = {abs(res[worst]):.3e} at vertex {vertex}")
    J = J_full[partition.V_edges]
    J_C, J_I = distribute(partition, J_full, interface_share)
    j = conductor_gradient_load(mesh, labels, partition, J_full, extension)
    return J, J_C, J_I, j, J_full

