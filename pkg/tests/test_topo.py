import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import connected_components

from mqsfeti import BoxGeometry, discretize
from mqsfeti.errors import TopologyError
from mqsfeti.topo import (build_gradient, build_interface_tree, full_incidence, restricted_cotree_sets,
                          splitting_dimensions)


def is_spanning_tree(edges, tree, vertices):
    """Independent oracle: |T| = |V| - 1 and the tree graph connects V."""
    vertices = np.asarray(vertices)
    if len(tree) != len(vertices) - 1:
        return False
    local = {v: k for k, v in enumerate(vertices.tolist())}
    e = edges[tree]
    if not all(a in local and b in local for a, b in e.tolist()):
        return False
    rows = [local[a] for a in e[:, 0]]
    cols = [local[b] for b in e[:, 1]]
    g = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(vertices),) * 2)
    return connected_components(g, directed=False)[0] == 1


def test_dimensions_half_box_n2(disc2):
    p = disc2.partition
    assert (p.dim_V, p.dim_VC, p.dim_VI, p.dim_VG, p.dim_UC) == (72, 40, 40, 8, 17)
    assert len(disc2.trees.tree_C_ext) == 9
    assert len(disc2.trees.tree_I_ext) == 9


def test_dimensions_half_box_n4(disc4):
    p = disc4.partition
    assert (p.dim_V, p.dim_VC, p.dim_VI, p.dim_VG, p.dim_UC) == (480, 256, 256, 32, 74)


def test_trees_span_each_region(disc2):
    mesh, labels, trees = disc2.mesh, disc2.labels, disc2.trees
    assert is_spanning_tree(mesh.edges, trees.tree_gamma, labels.vertices_gamma)
    c_tree = np.concatenate([trees.tree_gamma, trees.tree_C_ext])
    i_tree = np.concatenate([trees.tree_gamma, trees.tree_I_ext])
    assert is_spanning_tree(mesh.edges, c_tree, labels.vertices_C)
    assert is_spanning_tree(mesh.edges, i_tree, labels.vertices_I)
    assert is_spanning_tree(mesh.edges, np.flatnonzero(trees.is_tree), np.arange(mesh.n_vertices))


def test_interface_tree_is_deterministic(disc2):
    a = build_interface_tree(disc2.mesh, disc2.labels)
    b = build_interface_tree(disc2.mesh, disc2.labels)
    np.testing.assert_array_equal(a, b)


def test_root_must_lie_on_interface(disc2):
    off = int(np.flatnonzero(~disc2.labels.vertex_gamma)[0])
    with pytest.raises(TopologyError):
        build_interface_tree(disc2.mesh, disc2.labels, root=off)


def test_root_choice_keeps_dimensions(disc2):
    other = int(disc2.labels.vertices_gamma[-1])
    alt = discretize(disc2.geometry, root=other)
    assert alt.partition.root == other
    assert alt.partition.dim_V == disc2.partition.dim_V
    assert alt.partition.dim_VG == disc2.partition.dim_VG


def test_splitting_and_restrictions(disc2):
    for name, (lhs, rhs) in splitting_dimensions(disc2.mesh, disc2.labels, disc2.partition).items():
        assert lhs == rhs, name
    for name, (restricted, own) in restricted_cotree_sets(disc2.mesh, disc2.labels, disc2.trees).items():
        assert restricted == own, name


def test_incidence(disc_small):
    mesh = disc_small.mesh
    F = full_incidence(mesh)
    assert F.shape == (mesh.n_edges, mesh.n_vertices)
    np.testing.assert_array_equal(F @ np.ones(mesh.n_vertices), 0)
    assert np.linalg.matrix_rank(F.toarray()) == mesh.n_vertices - 1
    G = build_gradient(mesh, disc_small.partition).G
    assert np.linalg.matrix_rank(G.toarray()) == mesh.n_vertices - 1


def test_gradient_restricted_to_tree_is_invertible(disc2):
    # a spanning tree carries exactly the information of a potential up to a constant
    G = build_gradient(disc2.mesh, disc2.partition).G.toarray()
    tree = np.flatnonzero(disc2.trees.is_tree)
    assert abs(np.linalg.det(G[tree])) == pytest.approx(1.0)


@st.composite
def geometries(draw):
    n = draw(st.sampled_from([2, 4]))
    axis = draw(st.integers(0, 2))
    lo = [0.0, 0.0, 0.0]
    hi = [1.0, 1.0, 1.0]
    cut = draw(st.integers(1, n - 1)) / n
    if draw(st.booleans()):
        hi[axis] = cut
    else:
        lo[axis] = cut
    if draw(st.booleans()):
        other = (axis + 1) % 3
        hi[other] = draw(st.integers(1, n - 1)) / n
    return BoxGeometry((0, 0, 0), (1, 1, 1), tuple(lo), tuple(hi), n)


@settings(max_examples=25, deadline=None)
@given(geometries())
def test_splitting_identities_hold_on_random_geometries(geom):
    disc = discretize(geom)
    for name, (lhs, rhs) in splitting_dimensions(disc.mesh, disc.labels, disc.partition).items():
        assert lhs == rhs, name
    for name, (restricted, own) in restricted_cotree_sets(disc.mesh, disc.labels, disc.trees).items():
        assert restricted == own, name
