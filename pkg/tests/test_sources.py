import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mqsfeti import Materials, assemble, boundary_uniform_B, conductor_loop, insulator_coil, raw_source
from mqsfeti.errors import ConfigurationError, SourceError
from mqsfeti.feti import build_tearing
from mqsfeti.sources import (assemble_source, conductor_gradient_load, distribute, extension_operator,
                             load_vector, project_solenoidal, solenoidality_residual)

from conftest import half_box

LOOP = dict(center=(0.25, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
COIL = dict(center=(0.75, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)


def test_zero_source(disc2):
    J, J_C, J_I, j, J_full = assemble_source(disc2.mesh, disc2.labels, disc2.partition, raw_source(
        np.zeros(disc2.mesh.n_edges)))
    for v in (J, J_C, J_I, j, J_full):
        assert not np.any(v)


def test_conductor_loop_is_solenoidal_without_projection(disc4):
    src = conductor_loop(disc4.geometry, **LOOP)
    J_full = load_vector(disc4.mesh, disc4.labels, src)
    assert np.abs(J_full).max() > 1e-3
    res = solenoidality_residual(disc4.mesh, disc4.labels, J_full)
    assert np.abs(res).max() <= 1e-14 * np.abs(J_full).max()
    # the load is linear in the magnitude
    twice = load_vector(disc4.mesh, disc4.labels, conductor_loop(disc4.geometry, **LOOP, magnitude=2.0))
    np.testing.assert_allclose(twice, 2 * J_full)


def test_insulator_coil_requires_projection(disc4):
    src = insulator_coil(disc4.geometry, **COIL, project=False)
    with pytest.raises(SourceError, match="vertex"):
        assemble_source(disc4.mesh, disc4.labels, disc4.partition, src)
    J, *_ = assemble_source(disc4.mesh, disc4.labels, disc4.partition, insulator_coil(disc4.geometry, **COIL))
    assert np.abs(J).max() > 0


@pytest.mark.parametrize("builder, params", [
    (conductor_loop, dict(LOOP, center=(0.6, 0.5, 0.5))),
    (insulator_coil, dict(COIL, center=(0.3, 0.5, 0.5))),
    (conductor_loop, dict(LOOP, width=0.4)),
    (conductor_loop, dict(LOOP, axis=(0, 0, 0))),
])
def test_bad_loop_parameters(builder, params):
    with pytest.raises(ConfigurationError):
        builder(half_box(4), **params)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_projection_property(disc2, data):
    E = disc2.mesh.n_edges
    raw = data.draw(arrays(np.float64, E, elements=st.floats(-1, 1, allow_nan=False)))
    out = project_solenoidal(disc2.mesh, disc2.labels, disc2.partition, raw)
    scale = max(1.0, np.abs(raw).max())
    assert np.abs(solenoidality_residual(disc2.mesh, disc2.labels, out)).max() <= 1e-12 * scale
    again = project_solenoidal(disc2.mesh, disc2.labels, disc2.partition, out)
    np.testing.assert_allclose(again, out, atol=1e-12 * scale)
    # edges of the closed conductor that are not touched by insulator gradients are unchanged
    touched = np.zeros(E, dtype=bool)
    free = ~disc2.labels.vertex_in_C
    touched[free[disc2.mesh.edges].any(axis=1)] = True
    np.testing.assert_allclose(out[~touched], raw[~touched])


@pytest.mark.parametrize("make", [lambda g: conductor_loop(g, **LOOP), lambda g: insulator_coil(g, **COIL),
                                  lambda g: boundary_uniform_B((0, 0, 1))])
def test_extension_independence(disc4, make):
    src = make(disc4.geometry)
    _, _, _, _, J_full = assemble_source(disc4.mesh, disc4.labels, disc4.partition, src)
    jz = conductor_gradient_load(disc4.mesh, disc4.labels, disc4.partition, J_full, "zero")
    jh = conductor_gradient_load(disc4.mesh, disc4.labels, disc4.partition, J_full, "harmonic")
    ref = max(np.abs(jz).max(), np.abs(J_full).max())
    assert np.abs(jh - jz).max() <= 1e-12 * ref


def test_harmonic_extension_keeps_conductor_values(disc2):
    Ez = extension_operator(disc2.mesh, disc2.labels, disc2.partition, "zero").toarray()
    Eh = extension_operator(disc2.mesh, disc2.labels, disc2.partition, "harmonic").toarray()
    inside = disc2.labels.vertex_in_C
    np.testing.assert_allclose(Eh[inside], Ez[inside])
    assert np.abs(Eh[~inside]).max() > 0
    with pytest.raises(ValueError):
        extension_operator(disc2.mesh, disc2.labels, disc2.partition, "cubic")


@pytest.mark.parametrize("share", [0.0, 0.3, 0.5, 1.0])
def test_distribution_sums_to_global_load(disc2, share):
    rng = np.random.default_rng(1)
    J_full = rng.standard_normal(disc2.mesh.n_edges)
    J_C, J_I = distribute(disc2.partition, J_full, share)
    R = build_tearing(disc2.partition).R
    np.testing.assert_allclose(R.T @ np.concatenate([J_C, J_I]), J_full[disc2.partition.V_edges], atol=1e-15)


def test_boundary_source_has_no_conductor_load(disc2):
    # a curl-free H tested with gradients vanishes, so the scalar equation sees no source
    asm = assemble(disc2, Materials(), boundary_uniform_B((0, 0, 1)))
    assert np.abs(asm.J_full).max() > 0.1
    assert np.abs(asm.blocks.j).max() <= 1e-14


def test_raw_source_shape_is_checked(disc2):
    with pytest.raises(ConfigurationError):
        load_vector(disc2.mesh, disc2.labels, raw_source(np.zeros(3)))
