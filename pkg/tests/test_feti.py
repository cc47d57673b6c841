import numpy as np
import pytest

from mqsfeti import (Materials, assemble, boundary_uniform_B, build_tearing, conductor_loop, glue,
                     reconstruct_B, solve_feti_direct, solve_feti_dual, solve_monolithic)
from mqsfeti.errors import GluingError, SolverError
from mqsfeti.feti import FetiSolution, feti_system

from conftest import OMEGA_50HZ

LOOP = dict(center=(0.25, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)


def test_tearing_operator_structure(disc2):
    p = disc2.partition
    T = build_tearing(p)
    assert T.R.shape == (p.dim_VC + p.dim_VI, p.dim_V)
    counts = np.asarray(T.R.sum(axis=0)).ravel()
    # interface cotree edges are duplicated, all others copied once
    assert (counts == 2).sum() == p.dim_VG
    assert set(counts.tolist()) == {1, 2}
    assert set(np.asarray(T.R.sum(axis=1)).ravel().tolist()) == {1}


def test_glue_inverts_tearing(disc2):
    p = disc2.partition
    T = build_tearing(p)
    A = np.random.default_rng(0).standard_normal(p.dim_V) + 0j
    torn = FetiSolution(T.R_I @ A, T.R_C @ A, np.zeros(p.dim_UC), np.zeros(p.dim_VG), 0.0, 0.0)
    np.testing.assert_array_equal(glue(torn, p).A, A)

    A_C = (T.R_C @ A).copy()
    A_C[p.VC_index[p.VG_edges[0]]] += 1.0
    bad = FetiSolution(T.R_I @ A, A_C, np.zeros(p.dim_UC), np.zeros(p.dim_VG), 0.0, 0.0)
    with pytest.raises(GluingError):
        glue(bad, p)


@pytest.mark.parametrize("solver", [solve_feti_direct, solve_feti_dual])
def test_zero_sources(disc2, solver):
    sol = solver(assemble(disc2, Materials(omega=OMEGA_50HZ)).blocks)
    for v in (sol.A_I, sol.A_C, sol.phi, sol.lam):
        assert not np.any(v)


def test_patch_test_torn(disc2):
    B0 = np.array([0.0, 0.0, 1.0])
    asm = assemble(disc2, Materials(), boundary_uniform_B(B0))
    sol = solve_feti_direct(asm.blocks)
    B = reconstruct_B(disc2.mesh, disc2.labels, disc2.partition, scope="torn", A_C=sol.A_C, A_I=sol.A_I)
    assert np.abs(B.values - B0).max() <= 1e-10
    mono = solve_monolithic(asm.blocks)
    glued = glue(sol, disc2.partition, asm.blocks)
    assert np.abs(glued.A - mono.A).max() <= 1e-10 * np.abs(mono.A).max()
    # B^T lam closes the torn equations: residual of the first two block rows without it equals B^T lam
    b = asm.blocks
    r_I = b.J_I - b.K_I @ sol.A_I
    np.testing.assert_allclose(r_I, b.B_I.T @ sol.lam, atol=1e-12)


def test_interface_distribution_only_changes_multiplier(disc2):
    mat = Materials(omega=OMEGA_50HZ)
    src = conductor_loop(disc2.geometry, **LOOP)
    full = solve_feti_direct(assemble(disc2, mat, src, interface_share=1.0).blocks)
    half = solve_feti_direct(assemble(disc2, mat, src, interface_share=0.5).blocks)
    for a, b in ((full.A_I, half.A_I), (full.A_C, half.A_C), (full.phi, half.phi)):
        assert np.abs(a - b).max() <= 1e-10 * max(np.abs(a).max(), 1e-300)


def test_dual_matches_direct(disc2):
    blocks = assemble(disc2, Materials(omega=OMEGA_50HZ), conductor_loop(disc2.geometry, **LOOP)).blocks
    direct = solve_feti_direct(blocks)
    dual = solve_feti_dual(blocks)
    assert np.abs(dual.lam - direct.lam).max() <= 1e-8 * np.abs(direct.lam).max()
    assert dual.info["iterations"] <= disc2.partition.dim_VG + 1
    assert len(dual.info["history"]) == dual.info["iterations"] + 1


def test_dual_non_convergence_carries_history(disc2):
    blocks = assemble(disc2, Materials(omega=OMEGA_50HZ), conductor_loop(disc2.geometry, **LOOP)).blocks
    with pytest.raises(SolverError) as err:
        solve_feti_dual(blocks, max_iter=1)
    assert len(err.value.history) >= 1
    assert err.value.history[-1] > 1e-3


def test_saddle_point_shape(disc2):
    system = feti_system(assemble(disc2, Materials()).blocks)
    p = disc2.partition
    n = p.dim_VI + p.dim_VC + p.dim_UC + p.dim_VG
    assert system.matrix.shape == (n, n)
    assert system.sizes == (p.dim_VI, p.dim_VC, p.dim_UC, p.dim_VG)
