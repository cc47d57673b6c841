"""Tearing and interconnecting formulation with interface multipliers.

Unknowns are ordered ``(A_I, A_C, phi, lam)``. Only the cotree (V) part of
the vector potential is duplicated on the interface and glued by ``lam``;
the gradient part never crosses the interface.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import OperatorBlocks
from .errors import GluingError, SolverError
from .monolithic import MonoSolution, _factor, relative_residual
from .topo import DofPartition


@dataclass(frozen=True, eq=False)
class TearingOperator:
    """``R: V -> V_C x V_I`` restricting a global cotree field to both sides.

    Rows are ordered ``[V_C; V_I]``.
    """

    R: sp.csr_matrix
    dim_VC: int
    dim_VI: int

    @property
    def R_C(self):
        return self.R[: self.dim_VC]

    @property
    def R_I(self):
        return self.R[self.dim_VC:]


def build_tearing(partition: DofPartition) -> TearingOperator:
    rows, cols = [], []
    for k, e in enumerate(partition.V_edges):
        c, i = partition.VC_index[e], partition.VI_index[e]
        if c >= 0:
            rows.append(c)
            cols.append(k)
        if i >= 0:
            rows.append(partition.dim_VC + i)
            cols.append(k)
    R = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)),
                      shape=(partition.dim_VC + partition.dim_VI, partition.dim_V))
    return TearingOperator(R, partition.dim_VC, partition.dim_VI)


def jump_matrix(blocks: OperatorBlocks) -> sp.csr_matrix:
    """``B = [B_C, B_I]`` acting on ``[A_C; A_I]``."""
    return sp.hstack([blocks.B_C, blocks.B_I], format="csr")


def conductor_block(blocks: OperatorBlocks) -> sp.csr_matrix:
    w = blocks.omega
    return sp.bmat([[blocks.K_C + 1j * w * blocks.M_C, blocks.S_C.T], [1j * w * blocks.S_C, blocks.C_C]],
                   format="csr")


@dataclass(frozen=True, eq=False)
class FetiSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    sizes: tuple  # (dim V_I, dim V_C, dim U_C, dim V_Gamma)


def feti_system(blocks: OperatorBlocks) -> FetiSystem:
    w = blocks.omega
    nI, nC = blocks.K_I.shape[0], blocks.K_C.shape[0]
    nU, nG = blocks.C_C.shape[0], blocks.B_C.shape[0]
    mat = sp.bmat([
        [blocks.K_I, None, None, blocks.B_I.T],
        [None, blocks.K_C + 1j * w * blocks.M_C, blocks.S_C.T, blocks.B_C.T],
        [None, 1j * w * blocks.S_C, blocks.C_C, None],
        [blocks.B_I, blocks.B_C, None, sp.csr_matrix((nG, nG))],
    ], format="csr")
    rhs = np.concatenate([blocks.J_I, blocks.J_C, blocks.j, np.zeros(nG)]).astype(complex)
    return FetiSystem(mat, rhs, (nI, nC, nU, nG))


@dataclass(frozen=True, eq=False)
class FetiSolution:
    A_I: np.ndarray
    A_C: np.ndarray
    phi: np.ndarray
    lam: np.ndarray
    residual: float
    jump_norm: float
    info: dict = field(default_factory=dict)


def _jump(blocks, A_C, A_I):
    return float(np.max(np.abs(blocks.B_C @ A_C + blocks.B_I @ A_I), initial=0.0))


def _finish(blocks, system, A_I, A_C, phi, lam, tol, info):
    x = np.concatenate([A_I, A_C, phi, lam])
    res = relative_residual(system.matrix, x, system.rhs)
    jump = _jump(blocks, A_C, A_I)
    scale = max(np.max(np.abs(A_C), initial=0.0), np.max(np.abs(A_I), initial=0.0))
    if not np.isfinite(res) or res > tol:
        raise SolverError(f"FETI residual {res:.3e} exceeds tolerance {tol:.1e}", info.get("history"))
    if jump > tol * scale:
        raise SolverError(f"interface jump {jump:.3e} exceeds tolerance", info.get("history"))
    return FetiSolution(A_I, A_C, phi, lam, res, jump, info)


def solve_feti_direct(blocks: OperatorBlocks, tol=1e-8) -> FetiSolution:
    """Sparse LU of the whole saddle-point matrix."""
    system = feti_system(blocks)
    x = _factor(system.matrix, "FETI saddle-point system").solve(system.rhs)
    nI, nC, nU, nG = system.sizes
    parts = np.split(x, np.cumsum([nI, nC, nU]))
    return _finish(blocks, system, *parts, tol, {"formulation": "feti_direct", "method": "lu"})


class _DualOperator:
    """Interface operator ``F = B_I K_I^-1 B_I^T + B_C (K_cond^-1)_AA B_C^T``."""

    def __init__(self, blocks: OperatorBlocks):
        self.blocks = blocks
        self.nC = blocks.K_C.shape[0]
        self.nU = blocks.C_C.shape[0]
        self.lu_I = _factor(blocks.K_I, "K_I")
        self.lu_C = _factor(conductor_block(blocks), "conductor block")

    def local_solves(self, lam, J_I, J_C, j):
        b = self.blocks
        A_I = self.lu_I.solve(np.asarray(J_I - b.B_I.T @ lam, dtype=complex))
        rhs = np.concatenate([J_C - b.B_C.T @ lam, j]).astype(complex)
        y = self.lu_C.solve(rhs)
        return A_I, y[: self.nC], y[self.nC:]

    def apply(self, lam):
        b = self.blocks
        zi = np.zeros(b.K_I.shape[0])
        zc = np.zeros(self.nC)
        zu = np.zeros(self.nU)
        A_I, A_C, _ = self.local_solves(lam, zi, zc, zu)
        # local solves with -B^T lam give -F lam
        return -(b.B_I @ A_I + b.B_C @ A_C)

    def rhs(self):
        b = self.blocks
        A_I, A_C, _ = self.local_solves(np.zeros(b.B_C.shape[0]), b.J_I, b.J_C, b.j)
        return b.B_I @ A_I + b.B_C @ A_C


def solve_feti_dual(blocks: OperatorBlocks, tol=1e-8, max_iter=None, krylov_tol=None) -> FetiSolution:
    """Eliminate the subdomain unknowns and solve for ``lam`` with unrestarted GMRES.

    ``max_iter`` bounds the total number of Krylov iterations (default: the
    interface dimension plus one). ``krylov_tol`` is the relative dual
    residual target (default ``tol * 1e-3``).
    """
    nG = blocks.B_C.shape[0]
    max_iter = nG + 1 if max_iter is None else int(max_iter)
    krylov_tol = tol * 1e-3 if krylov_tol is None else krylov_tol
    op = _DualOperator(blocks)
    d = op.rhs()
    history = []
    d_norm = np.linalg.norm(d)
    if d_norm == 0:
        lam = np.zeros(nG, dtype=complex)
        iterations = 0
    else:
        F = spla.LinearOperator((nG, nG), matvec=op.apply, dtype=complex)
        restart = max(1, min(max_iter, nG))
        outer = -(-max_iter // restart)
        lam, info = spla.gmres(F, d, rtol=krylov_tol, atol=0.0, restart=restart, maxiter=outer,
                               callback=history.append, callback_type="pr_norm")
        iterations = len(history)
        dual_res = np.linalg.norm(d - op.apply(lam)) / d_norm
        history.append(dual_res)
        if info != 0 or dual_res > krylov_tol * 10:
            raise SolverError(f"dual Krylov iteration did not converge in {max_iter} iterations "
                              f"(relative dual residual {dual_res:.3e})", history)
    A_I, A_C, phi = op.local_solves(lam, blocks.J_I, blocks.J_C, blocks.j)
    system = feti_system(blocks)
    info = {"formulation": "feti_dual", "method": "gmres", "iterations": iterations, "history": history}
    return _finish(blocks, system, A_I, A_C, phi, lam, tol, info)


def glue(solution: FetiSolution, partition: DofPartition, blocks: OperatorBlocks = None, tol=1e-8) -> MonoSolution:
    """Global cotree coefficients from the torn pair.

    Interface values come from the conductor side after checking that the
    insulator side agrees within ``tol`` (relative to the torn fields).
    """
    A_C, A_I = np.asarray(solution.A_C), np.asarray(solution.A_I)
    G = partition.VG_edges
    jump = np.max(np.abs(A_C[partition.VC_index[G]] - A_I[partition.VI_index[G]]), initial=0.0)
    scale = max(np.max(np.abs(A_C), initial=0.0), np.max(np.abs(A_I), initial=0.0))
    if jump > tol * scale or (scale == 0 and jump > 0):
        raise GluingError(f"interface jump {jump:.3e} violates the continuity constraint")
    V = partition.V_edges
    ci, ii = partition.VC_index[V], partition.VI_index[V]
    A = np.where(ci >= 0, A_C[np.maximum(ci, 0)], A_I[np.maximum(ii, 0)])
    info = dict(solution.info, glued=True)
    return MonoSolution(A, np.asarray(solution.phi), solution.residual, info)
