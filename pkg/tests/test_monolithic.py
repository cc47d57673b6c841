import numpy as np
import pytest

from mqsfeti import Materials, assemble, boundary_uniform_B, conductor_loop, insulator_coil, reconstruct_B
from mqsfeti.errors import DomainError
from mqsfeti.monolithic import (current_balance_residual, electric_field, expand_edges, mono_system,
                                solve_monolithic)
from mqsfeti.verify import conductor_gradient_load_unpinned

from conftest import OMEGA_50HZ

LOOP = dict(center=(0.25, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
COIL = dict(center=(0.75, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)


@pytest.mark.parametrize("omega", [0.0, OMEGA_50HZ])
def test_zero_source_gives_zero_solution(disc2, omega):
    sol = solve_monolithic(assemble(disc2, Materials(omega=omega)).blocks)
    assert not np.any(sol.A) and not np.any(sol.phi)


def test_patch_test_reproduces_uniform_field(disc2):
    B0 = np.array([0.0, 0.0, 1.0])
    asm = assemble(disc2, Materials(), boundary_uniform_B(B0))
    sol = solve_monolithic(asm.blocks)
    B = reconstruct_B(disc2.mesh, disc2.labels, disc2.partition, sol.A)
    assert np.abs(B.values - B0).max() <= 1e-10
    assert np.abs(sol.phi).max() <= 1e-12


def test_patch_test_with_unequal_permeability_is_not_exact(disc2):
    # with mu_C != mu_I the surface current (B0/mu) x n no longer describes a
    # field with uniform B, so the patch test is only meaningful for equal mu
    asm = assemble(disc2, Materials(mu_C=2.0), boundary_uniform_B((0, 0, 1)))
    B = reconstruct_B(disc2.mesh, disc2.labels, disc2.partition, solve_monolithic(asm.blocks).A)
    assert np.abs(B.values - (0, 0, 1)).max() > 1e-3


@pytest.mark.parametrize("omega", [0.0, OMEGA_50HZ])
@pytest.mark.parametrize("kind", ["loop", "coil"])
def test_scalar_equation_holds_for_constants(disc2, omega, kind):
    g = disc2.geometry
    src = conductor_loop(g, **LOOP) if kind == "loop" else insulator_coil(g, **COIL)
    mat = Materials(omega=omega)
    asm = assemble(disc2, mat, src)
    sol = solve_monolithic(asm.blocks, tol=1e-10)
    j_all = conductor_gradient_load_unpinned(disc2.mesh, disc2.labels, asm.J_full)
    res = current_balance_residual(asm.full.S, asm.full.C, disc2.partition, disc2.labels, sol, omega, j_all,
                                   np.abs(asm.J_full).max())
    assert res <= 1e-10


def test_symmetrized_solve_agrees(disc2):
    asm = assemble(disc2, Materials(omega=OMEGA_50HZ), conductor_loop(disc2.geometry, **LOOP))
    plain = solve_monolithic(asm.blocks)
    sym = solve_monolithic(asm.blocks, symmetrized=True)
    assert np.abs(sym.A - plain.A).max() <= 1e-10 * np.abs(plain.A).max()
    assert np.abs(sym.phi - plain.phi).max() <= 1e-10 * np.abs(plain.phi).max()
    m = mono_system(asm.blocks, symmetrized=True).matrix
    assert abs(m - m.T).max() == 0
    with pytest.raises(ValueError):
        mono_system(assemble(disc2, Materials()).blocks, symmetrized=True)


def test_system_is_nonsingular_on_smallest_mesh(disc_small):
    for omega in (0.0, OMEGA_50HZ):
        m = mono_system(assemble(disc_small, Materials(omega=omega)).blocks).matrix.toarray()
        assert np.linalg.matrix_rank(m) == m.shape[0]


def test_electric_field(disc2):
    omega = OMEGA_50HZ
    asm = assemble(disc2, Materials(omega=omega), conductor_loop(disc2.geometry, **LOOP))
    sol = solve_monolithic(asm.blocks)
    E = electric_field(disc2.mesh, disc2.labels, disc2.partition, sol, omega)
    assert E.shape == (len(disc2.labels.tets_C), 3)
    assert np.abs(E).max() > 0
    with pytest.raises(DomainError):
        electric_field(disc2.mesh, disc2.labels, disc2.partition, sol, omega, tets=disc2.labels.tets_I[:1])

    # at omega = 0 the field is -grad phi; check on one tet by hand
    static = solve_monolithic(assemble(disc2, Materials(), conductor_loop(disc2.geometry, **LOOP)).blocks)
    t = disc2.labels.tets_C[3]
    E0 = electric_field(disc2.mesh, disc2.labels, disc2.partition, static, 0.0, tets=[t])[0]
    phi = np.zeros(disc2.mesh.n_vertices, dtype=complex)
    phi[disc2.partition.UC_vertices] = static.phi
    x = disc2.mesh.vertices[disc2.mesh.tets[t]]
    # solve grad from the three edge differences
    grad = np.linalg.solve(x[1:] - x[0], phi[disc2.mesh.tets[t]][1:] - phi[disc2.mesh.tets[t]][0])
    np.testing.assert_allclose(E0, -grad, atol=1e-14)


def test_expand_edges_puts_zero_on_tree(disc2):
    a = np.arange(1, disc2.partition.dim_V + 1)
    full = expand_edges(disc2.partition, a)
    assert not np.any(full[disc2.trees.is_tree])
    np.testing.assert_array_equal(full[disc2.partition.V_edges], a)
