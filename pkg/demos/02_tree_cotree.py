"""
Interface-first tree and the cotree unknowns
============================================

The gauge removes one edge unknown per vertex. The spanning tree is grown
on the interface first and then into each subdomain, so that the global
cotree restricted to either subdomain is exactly that subdomain's cotree.
"""

import numpy as np

from mqsfeti import BoxGeometry, discretize
from mqsfeti.topo import build_gradient, restricted_cotree_sets, splitting_dimensions

disc = discretize(BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 2))
trees, part = disc.trees, disc.partition

print("tree edges on the interface:", len(trees.tree_gamma))
print("tree extension into conductor / insulator:", len(trees.tree_C_ext), len(trees.tree_I_ext))
print("root vertex:", trees.root, disc.mesh.vertices[trees.root])

print("dim V, V_C, V_I, V_Gamma, U_C =", part.dim_V, part.dim_VC, part.dim_VI, part.dim_VG, part.dim_UC)

# #edges = (#vertices - 1) + #cotree edges, on every piece of the mesh
for name, (edges, rhs) in splitting_dimensions(disc.mesh, disc.labels, part).items():
    print(f"{name:>10}: {edges} edges = {rhs}")

for name, (restricted, own) in restricted_cotree_sets(disc.mesh, disc.labels, trees).items():
    print(f"cotree restricted to {name} equals its own cotree:", restricted == own)

# The tree rows of the incidence matrix form an invertible square block:
# any gradient is fixed by its values on the tree.
G = build_gradient(disc.mesh, part).G.toarray()
tree = np.flatnonzero(trees.is_tree)
print("det of gradient on tree edges:", round(abs(np.linalg.det(G[tree]))))
