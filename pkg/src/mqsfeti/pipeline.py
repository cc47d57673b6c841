"""Convenience wiring of mesh -> topology -> assembly."""

from dataclasses import dataclass, replace

import numpy as np

from .assembly import FullSpaceOperators, Materials, OperatorBlocks, assemble_full, assemble_global, assemble_torn
from .mesh import BoxGeometry, EntityLabels, Mesh, build_box_mesh, classify_entities
from .sources import SourceSpec, assemble_source
from .topo import DofPartition, TreeCotree, build_partition, build_tree_cotree


@dataclass(frozen=True, eq=False)
class Discretization:
    geometry: BoxGeometry
    mesh: Mesh
    labels: EntityLabels
    trees: TreeCotree
    partition: DofPartition


def discretize(geometry: BoxGeometry, root=None) -> Discretization:
    mesh = build_box_mesh(geometry)
    labels = classify_entities(mesh, geometry)
    trees = build_tree_cotree(mesh, labels, root)
    return Discretization(geometry, mesh, labels, trees, build_partition(mesh, labels, trees))


@dataclass(frozen=True, eq=False)
class Assembled:
    blocks: OperatorBlocks
    full: FullSpaceOperators
    J_full: np.ndarray


def assemble(disc: Discretization, materials: Materials, source: SourceSpec = None, interface_share=1.0,
             extension="zero") -> Assembled:
    """All operator blocks and source vectors for one configuration."""
    source = source or SourceSpec()
    m, lab, part = disc.mesh, disc.labels, disc.partition
    full = assemble_full(m, lab, materials)
    blocks = assemble_global(m, lab, part, materials, full).merge(assemble_torn(m, lab, part, materials, full))
    J, J_C, J_I, j, J_full = assemble_source(m, lab, part, source, materials, interface_share, extension)
    blocks = replace(blocks, J=J, J_C=J_C, J_I=J_I, j=j)
    return Assembled(blocks, full, J_full)
