"""
Tearing along the interface
===========================

Duplicate only the cotree unknowns on the interface, glue them with
multipliers, and solve either the whole saddle-point system or the
reduced interface problem with GMRES.
"""

import numpy as np

from mqsfeti import (BoxGeometry, Materials, assemble, build_tearing, discretize, glue, insulator_coil,
                     reconstruct_B, solve_feti_direct, solve_feti_dual, solve_monolithic)
from mqsfeti.verify import check_normal_continuity, corrupt_interface

disc = discretize(BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 4))
part = disc.partition
src = insulator_coil(disc.geometry, center=(0.75, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
blocks = assemble(disc, Materials(omega=2 * np.pi * 50), src).blocks

T = build_tearing(part)
BR = (blocks.B_C @ T.R_C + blocks.B_I @ T.R_I)
print("R is %dx%d, B R has %d nonzeros" % (*T.R.shape, BR.count_nonzero()))

direct = solve_feti_direct(blocks)
dual = solve_feti_dual(blocks)
mono = solve_monolithic(blocks)
glued = glue(direct, part, blocks)
print("glued vs monolithic A: %.1e" % (abs(glued.A - mono.A).max() / abs(mono.A).max()))
print("dual vs direct multiplier: %.1e" % (abs(dual.lam - direct.lam).max() / abs(direct.lam).max()))
print("GMRES iterations: %d (interface dimension %d)" % (dual.info["iterations"], part.dim_VG))

# B from the two halves matches across the interface even though the
# gradient parts of A on either side are unrelated.
B = reconstruct_B(disc.mesh, disc.labels, part, scope="torn", A_C=direct.A_C, A_I=direct.A_I)
print("normal jump across interface: %.1e" % check_normal_continuity(B, disc.mesh, disc.labels, "gamma")[0])
bad = corrupt_interface(part, direct.A_C, 1.0)
Bbad = reconstruct_B(disc.mesh, disc.labels, part, scope="torn", A_C=bad, A_I=direct.A_I)
print("after corrupting one interface DOF: %.1e" % check_normal_continuity(Bbad, disc.mesh, disc.labels, "gamma")[0])
