"""Monolithic gauged A-phi system on the cotree space."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import OperatorBlocks, edge_functions, tet_geometry
from .errors import DomainError, SolverError
from .mesh import C, EntityLabels, Mesh
from .topo import DofPartition


def relative_residual(matrix, x, rhs) -> float:
    r = np.max(np.abs(rhs - matrix @ x), initial=0.0)
    b = np.max(np.abs(rhs), initial=0.0)
    return float(r / b) if b > 0 else float(r)


@dataclass(frozen=True, eq=False)
class MonoSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    n_A: int
    symmetrized: bool = False


def mono_system(blocks: OperatorBlocks, symmetrized=False) -> MonoSystem:
    """Block matrix ``[[K + i w M, S^T], [i w S, C]]``.

    With ``symmetrized`` the unknown ``phi = i w phi~`` is used instead,
    which gives a complex-symmetric matrix for ``w > 0``.
    """
    w = blocks.omega
    top = blocks.K + 1j * w * blocks.M
    if symmetrized:
        if w <= 0:
            raise ValueError("symmetrization needs omega > 0")
        mat = sp.bmat([[top, 1j * w * blocks.S.T], [1j * w * blocks.S, 1j * w * blocks.C]], format="csr")
    else:
        mat = sp.bmat([[top, blocks.S.T], [1j * w * blocks.S, blocks.C]], format="csr")
    rhs = np.concatenate([blocks.J, blocks.j]).astype(complex)
    return MonoSystem(mat, rhs, blocks.K.shape[0], symmetrized)


@dataclass(frozen=True, eq=False)
class MonoSolution:
    A: np.ndarray
    phi: np.ndarray
    residual: float
    info: dict = field(default_factory=dict)


def _factor(matrix, what):
    try:
        return spla.splu(sp.csc_matrix(matrix, dtype=complex))
    except RuntimeError as exc:
        raise SolverError(f"singular factorization of {what}: {exc}") from exc


def solve_monolithic(blocks: OperatorBlocks, tol=1e-8, symmetrized=False) -> MonoSolution:
    """Direct solve of the monolithic system.

    For ``omega == 0`` the system is block triangular and the scalar
    potential is solved first.
    """
    nA = blocks.K.shape[0]
    full = mono_system(blocks)
    if blocks.omega == 0:
        phi = _factor(blocks.C, "C").solve(np.asarray(blocks.j, dtype=complex))
        A = _factor(blocks.K, "K").solve(np.asarray(blocks.J - blocks.S.T @ phi, dtype=complex))
        method = "block-triangular"
    elif symmetrized:
        sym = mono_system(blocks, symmetrized=True)
        x = _factor(sym.matrix, "symmetrized system").solve(sym.rhs)
        A, phi = x[:nA], 1j * blocks.omega * x[nA:]
        method = "symmetrized-lu"
    else:
        x = _factor(full.matrix, "monolithic system").solve(full.rhs)
        A, phi = x[:nA], x[nA:]
        method = "lu"
    res = relative_residual(full.matrix, np.concatenate([A, phi]), full.rhs)
    if not np.isfinite(res) or res > tol:
        raise SolverError(f"monolithic residual {res:.3e} exceeds tolerance {tol:.1e}")
    return MonoSolution(A, phi, res, {"formulation": "mono", "method": method})


def expand_edges(partition: DofPartition, coeffs, edges=None) -> np.ndarray:
    """Scatter DOF coefficients onto all edges (tree edges are zero)."""
    edges = partition.V_edges if edges is None else edges
    out = np.zeros(partition.n_edges, dtype=complex)
    out[edges] = coeffs
    return out


def expand_vertices(partition: DofPartition, phi) -> np.ndarray:
    """U_C coefficients onto all vertices; the pinned vertex and insulator-only
    vertices carry zero."""
    out = np.zeros(partition.n_vertices, dtype=complex)
    out[partition.UC_vertices] = phi
    return out


def electric_field(mesh: Mesh, labels: EntityLabels, partition: DofPartition, solution: MonoSolution,
                   omega: float, tets=None) -> np.ndarray:
    """``E = -grad phi - i w A`` at the centroid of conductor tets.

    Exact in the mean over each tet since A is affine there.
    """
    tets = labels.tets_C if tets is None else np.asarray(tets)
    if np.any(labels.tet_label[tets] != C):
        raise DomainError("the electric field is only defined in the conductor")
    a = expand_edges(partition, solution.A)[mesh.tet_edges[tets]] * mesh.tet_edge_signs[tets]
    phi = expand_vertices(partition, solution.phi)[mesh.tets[tets]]
    _, grads = tet_geometry(mesh.vertices[mesh.tets[tets]])
    centroid = np.full((1, 4), 0.25)
    w = edge_functions(centroid[None], grads)[:, 0]  # (T, 6, 3)
    A_mid = np.einsum("te,tec->tc", a, w)
    grad_phi = np.einsum("tv,tvc->tc", phi, grads)
    return -grad_phi - 1j * omega * A_mid


def current_balance_residual(full_S, full_C, partition: DofPartition, labels: EntityLabels, solution: MonoSolution,
                             omega: float, j_unpinned, ref=0.0) -> float:
    """Relative residual of the scalar equation tested with every conductor hat,
    including the pinned one (so constants are tested too).

    ``ref`` is a floor for the scale, e.g. the size of the edge load, so that
    loads which cancel to roundoff are not divided by roundoff.
    """
    verts = labels.vertices_C
    A_full = expand_edges(partition, solution.A)
    phi_full = expand_vertices(partition, solution.phi)
    lhs = full_C[verts] @ phi_full + 1j * omega * (full_S[verts] @ A_full)
    r = np.max(np.abs(lhs - j_unpinned), initial=0.0)
    scale = max(np.max(np.abs(j_unpinned), initial=0.0), np.max(np.abs(lhs), initial=0.0), ref)
    return float(r / scale) if scale > 0 else float(r)
