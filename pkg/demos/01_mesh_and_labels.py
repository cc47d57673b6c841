"""
Kuhn meshes of a box with a conductor sub-box
=============================================

Build the desk-scale mesh used throughout the demos and look at how
vertices, edges and faces are split between conductor, insulator and the
interface between them.
"""

import numpy as np

from mqsfeti import BoxGeometry, build_box_mesh, classify_entities
from mqsfeti.errors import ConfigurationError
from mqsfeti.mesh import LABEL_NAMES

# unit cube, left half conducting, 4 cells per unit length
geom = BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 4)
mesh = build_box_mesh(geom)
print("V E F T =", mesh.n_vertices, mesh.n_edges, mesh.n_faces, mesh.n_tets)
print("Euler characteristic V-E+F-T =", mesh.euler_characteristic)
print("every tet has volume h^3/6:", np.allclose(mesh.signed_volumes, geom.spacing ** 3 / 6))

labels = classify_entities(mesh, geom)
for code, name in LABEL_NAMES.items():
    print(f"{name:>11}: {np.sum(labels.vertex_label == code):3d} vertices, "
          f"{np.sum(labels.edge_label == code):3d} edges")

# the interface is the plane x = 0.5
gamma_x = mesh.vertices[labels.vertices_gamma, 0]
print("interface vertices all at x=0.5:", np.allclose(gamma_x, 0.5))

# Not every conductor box is allowed: the insulator has to stay connected and
# simply connected, otherwise the gauge does not work. A slab cutting the box
# in two and a bar tunnelling through it are both rejected.
for cmin, cmax in (((0.25, 0, 0), (0.75, 1, 1)), ((0.25, 0.25, 0), (0.75, 0.75, 1))):
    try:
        BoxGeometry((0, 0, 0), (1, 1, 1), cmin, cmax, 4).grid
    except ConfigurationError as exc:
        print("rejected:", exc)

# a conductor floating inside the insulator is fine; its interface is closed
cavity = BoxGeometry((0, 0, 0), (1, 1, 1), (0.25, 0.25, 0.25), (0.75, 0.75, 0.75), 4)
cl = classify_entities(build_box_mesh(cavity), cavity)
print("cavity conductor interface faces:", len(cl.faces_gamma))
