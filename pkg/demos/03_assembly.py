"""
Edge element operators
======================

Assemble curl-curl, conductivity mass, the mixed A-phi coupling and the
P1 conductance matrix, then look at the properties the formulation relies on.
"""

import numpy as np

from mqsfeti import BoxGeometry, Materials, assemble, discretize
from mqsfeti.assembly import LOCAL_GRADIENT, local_curl_curl, local_mass, local_mixed
from mqsfeti.topo import build_gradient

tet = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
K = local_curl_curl(tet, mu=1.0)
M = local_mass(tet, sigma=1.0)
# gradients of the hat functions are edge fields with zero curl
print("K * grad = 0:", np.allclose(K @ LOCAL_GRADIENT, 0))
# and the coupling matrix is the mass matrix applied to those gradients
print("S = (M D)^T:", np.allclose(local_mixed(tet, 1.0), (M @ LOCAL_GRADIENT).T))

disc = discretize(BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 4))
asm = assemble(disc, Materials(omega=2 * np.pi * 50))
full, blocks = asm.full, asm.blocks

# On the full edge space the curl-curl matrix has a big kernel: every gradient.
G = build_gradient(disc.mesh, disc.partition).G
print("max |K_full G| / max |K_full|:", abs(full.K @ G).max() / abs(full.K).max())

# On the cotree space the kernel is gone.
Kd = blocks.K.toarray()
ev = np.linalg.eigvalsh(Kd)
print("cotree K: smallest / largest eigenvalue = %.2e" % (ev[0] / ev[-1]))

print("global blocks:", blocks.K.shape, blocks.S.shape, blocks.C.shape)
print("torn blocks:  K_C", blocks.K_C.shape, "K_I", blocks.K_I.shape, "B_C", blocks.B_C.shape)
