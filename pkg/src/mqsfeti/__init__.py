"""Time-harmonic eddy-current A-phi formulation on Kuhn tetrahedral meshes,
with a tree-cotree gauge and a tearing-and-interconnecting (FETI) solver
that duplicates only the cotree part of A on the conductor interface."""

from .assembly import Materials
from .config import RunConfig, load_config, parse_config
from .errors import (AssemblyError, ConfigurationError, DomainError, GluingError, MQSError, SolverError,
                     SourceError, TopologyError)
from .feti import build_tearing, glue, solve_feti_direct, solve_feti_dual
from .mesh import BoxGeometry, build_box_mesh, classify_entities
from .monolithic import electric_field, solve_monolithic
from .pipeline import assemble, discretize
from .sources import boundary_uniform_B, conductor_loop, insulator_coil, raw_source
from .verify import Report, reconstruct_B, verify_case
from .vtk import export_fields, write_vtk

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "BoxGeometry", "ConfigurationError", "DomainError", "GluingError", "MQSError", "Materials",
    "Report", "RunConfig", "SolverError", "SourceError", "TopologyError", "assemble", "boundary_uniform_B",
    "build_box_mesh", "build_tearing", "classify_entities", "conductor_loop", "discretize", "electric_field",
    "export_fields", "glue", "insulator_coil", "load_config", "parse_config", "raw_source", "reconstruct_B",
    "solve_feti_direct", "solve_feti_dual", "solve_monolithic", "verify_case", "write_vtk",
]
