"""
Monolithic A-phi solve
======================

Solve the gauged system in one piece, check the uniform field patch test
and evaluate B and E.
"""

import numpy as np

from mqsfeti import (BoxGeometry, Materials, assemble, boundary_uniform_B, conductor_loop, discretize,
                     electric_field, reconstruct_B, solve_monolithic)
from mqsfeti.verify import check_normal_continuity

disc = discretize(BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 4))

# patch test: a surface current (B0 / mu) x n on the outer boundary
B0 = np.array([0.0, 0.0, 1.0])
asm = assemble(disc, Materials(), boundary_uniform_B(B0))
sol = solve_monolithic(asm.blocks)
B = reconstruct_B(disc.mesh, disc.labels, disc.partition, sol.A)
print("patch test: max |B - B0| = %.1e, max |phi| = %.1e" % (abs(B.values - B0).max(), abs(sol.phi).max()))

# a 50 Hz loop current in the conductor
omega = 2 * np.pi * 50
src = conductor_loop(disc.geometry, center=(0.25, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
asm = assemble(disc, Materials(omega=omega), src)
sol = solve_monolithic(asm.blocks)
print("residual %.1e via %s" % (sol.residual, sol.info["method"]))

# the symmetric variant with phi = i w phi~ gives the same answer
sym = solve_monolithic(asm.blocks, symmetrized=True)
print("symmetrized vs plain: %.1e" % (abs(sym.A - sol.A).max() / abs(sol.A).max()))

B = reconstruct_B(disc.mesh, disc.labels, disc.partition, sol.A)
jump, _ = check_normal_continuity(B, disc.mesh)
print("|B| max %.3e, worst normal jump %.1e" % (abs(B.values).max(), jump))

E = electric_field(disc.mesh, disc.labels, disc.partition, sol, omega)
print("E on %d conductor tets, max |E| = %.3e" % (len(E), abs(E).max()))
