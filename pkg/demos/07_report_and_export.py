"""
Full check report, CLI run and VTK export
=========================================

``verify_case`` runs every structural check for one configuration; the
command line driver does the same from a JSON file and writes a report plus
VTK files that ParaView can open.
"""

import json
import os
import tempfile

from mqsfeti import BoxGeometry, Materials, conductor_loop, discretize, verify_case
from mqsfeti.cli import main

disc = discretize(BoxGeometry((0, 0, 0), (1, 1, 1), (0, 0, 0), (0.5, 1, 1), 2))
src = conductor_loop(disc.geometry, center=(0.25, 0.5, 0.5), axis=(1, 0, 0), radius=0.3, width=0.15)
report, results = verify_case(disc, Materials(omega=314.159), src)
for c in report.checks:
    print(f"{'ok ' if c.passed else 'BAD'} {c.name:<36} {c.value:10.2e}  ({c.claim})")

here = os.path.dirname(os.path.abspath(__file__))
with tempfile.TemporaryDirectory() as out:
    code = main(["solve", "--config", os.path.join(here, "patch_test.json"),
                 "--report", os.path.join(out, "report.json"), "--export", out])
    print("exit code", code)
    with open(os.path.join(out, "report.json")) as fh:
        doc = json.load(fh)
    print("patch_test:", next(c for c in doc["checks"] if c["name"] == "patch_test"))
    print(sorted(os.listdir(out)))
