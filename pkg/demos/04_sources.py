"""
Sources and the solenoidality condition
=======================================

A current tested with gradients of functions vanishing on the conductor
must give zero. A loop current inside the conductor satisfies this by
itself, a coil in the insulator only after projection.
"""

import numpy as np

from mqsfeti import BoxGeometry, conductor_loop, discretize, insulator_coil
from mqsfeti.errors import SourceError
from mqsfeti.feti import build_tearing
from mqsfeti.sources import assemble_source, conductor_gradient_load, solenoidality_residual

disc = discretize(BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 4))
mesh, labels, part = disc.mesh, disc.labels, disc.partition

loop = conductor_loop(disc.geometry, center=(0.25, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
J, J_C, J_I, j, J_full = assemble_source(mesh, labels, part, loop)
print("loop: |J| = %.3e, solenoidality residual %.1e" % (
    abs(J_full).max(), abs(solenoidality_residual(mesh, labels, J_full)).max()))

coil = dict(center=(0.75, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
try:
    assemble_source(mesh, labels, part, insulator_coil(disc.geometry, **coil, project=False))
except SourceError as exc:
    print("unprojected coil:", exc)

J, J_C, J_I, j, J_full = assemble_source(mesh, labels, part, insulator_coil(disc.geometry, **coil))
print("projected coil residual: %.1e" % abs(solenoidality_residual(mesh, labels, J_full)).max())

# The conductor load does not depend on how conductor hats are extended into
# the insulator, because of the solenoidality condition.
jz = conductor_gradient_load(mesh, labels, part, J_full, "zero")
jh = conductor_gradient_load(mesh, labels, part, J_full, "harmonic")
print("zero vs harmonic extension: %.1e" % abs(jz - jh).max())

# On interface edges the load can be split between the two copies at will;
# only R^T [J_C; J_I], the load seen by a glued field, has to match.
R = build_tearing(part).R
J, *_ = assemble_source(mesh, labels, part, loop)
for share in (1.0, 0.5):
    _, J_C, J_I, _, _ = assemble_source(mesh, labels, part, loop, interface_share=share)
    print(f"share {share}: |R^T [J_C; J_I] - J| = {abs(R.T @ np.concatenate([J_C, J_I]) - J).max():.1e}")
