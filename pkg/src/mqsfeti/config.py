"""JSON run configuration.

Schema (all keys optional except ``geometry``)::

    {
      "geometry":  {"domain_min": [x, y, z], "domain_max": [...],
                    "conductor_min": [...], "conductor_max": [...],
                    "resolution": n},
      "materials": {"mu_C": 1.0, "mu_I": 1.0, "sigma_C": 1.0, "omega": 0.0},
      "source":    {"kind": "none" | "conductor_loop" | "insulator_coil"
                            | "boundary_uniform_B" | "raw",
                    "center": [...], "axis": [...], "radius": r, "width": w,
                    "magnitude": 1.0,                 # loop kinds
                    "B0": [bx, by, bz],               # boundary_uniform_B
                    "path": "coefficients.npy",       # raw, one entry per edge
                    "project_solenoidal": false},
      "formulations": ["mono", "feti_direct", "feti_dual"],
      "tol": 1e-8,
      "max_iter": null,
      "checks": null,                 # or a list of check names to report
      "interface_share": 1.0,
      "output": {"report": "report.json", "export": "fields/"}
    }

Relative paths inside the file are resolved against the file's directory.
"""

import json
import os
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .assembly import Materials
from .errors import ConfigurationError
from .mesh import BoxGeometry
from .sources import SourceSpec, boundary_uniform_B, conductor_loop, insulator_coil, raw_source

FORMULATIONS = ("mono", "feti_direct", "feti_dual")
SOURCE_KINDS = ("none", "conductor_loop", "insulator_coil", "boundary_uniform_B", "raw")
_LOOP_KEYS = ("center", "axis", "radius", "width")
_SOURCE_KEYS = {
    "none": set(),
    "conductor_loop": set(_LOOP_KEYS) | {"magnitude", "quad_order"},
    "insulator_coil": set(_LOOP_KEYS) | {"magnitude", "quad_order"},
    "boundary_uniform_B": {"B0"},
    "raw": {"path"},
}


@dataclass
class RunConfig:
    geometry: BoxGeometry
    materials: Materials = field(default_factory=Materials)
    source: dict = field(default_factory=lambda: {"kind": "none"})
    formulations: tuple = FORMULATIONS
    tol: float = 1e-8
    max_iter: Optional[int] = None
    checks: Optional[tuple] = None
    interface_share: float = 1.0
    report: Optional[str] = None
    export: Optional[str] = None
    base_dir: str = "."

    def __post_init__(self):
        if not self.formulations:
            raise ConfigurationError("at least one formulation is required")
        unknown = set(self.formulations) - set(FORMULATIONS)
        if unknown:
            raise ConfigurationError(f"unknown formulations {sorted(unknown)}")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise ConfigurationError("tol must be positive")
        if self.max_iter is not None and int(self.max_iter) < 1:
            raise ConfigurationError("max_iter must be a positive integer")
        if not 0.0 <= self.interface_share <= 1.0:
            raise ConfigurationError("interface_share must lie in [0, 1]")
        kind = self.source.get("kind", "none")
        if kind not in SOURCE_KINDS:
            raise ConfigurationError(f"unknown source kind {kind!r}")
        extra = set(self.source) - _SOURCE_KEYS[kind] - {"kind", "project_solenoidal"}
        if extra:
            raise ConfigurationError(f"parameters {sorted(extra)} do not apply to source kind {kind!r}")
        if kind in ("conductor_loop", "insulator_coil"):
            missing = [k for k in _LOOP_KEYS if k not in self.source]
            if missing:
                raise ConfigurationError(f"source kind {kind!r} needs {missing}")
        if kind == "boundary_uniform_B" and "B0" not in self.source:
            raise ConfigurationError("source kind 'boundary_uniform_B' needs B0")
        if kind == "raw" and "path" not in self.source:
            raise ConfigurationError("source kind 'raw' needs a coefficient file path")

    @property
    def B0(self):
        return self.source.get("B0") if self.source.get("kind") == "boundary_uniform_B" else None

    def echo(self) -> dict:
        """Plain-JSON view of the configuration for the report."""
        return {
            "geometry": asdict(self.geometry),
            "materials": asdict(self.materials),
            "source": self.source,
            "formulations": list(self.formulations),
            "tol": self.tol,
            "max_iter": self.max_iter,
            "checks": None if self.checks is None else list(self.checks),
            "interface_share": self.interface_share,
        }

    def build_source(self, n_edges=None) -> SourceSpec:
        """Instantiate the source; ``n_edges`` validates raw coefficient files."""
        src = dict(self.source)
        kind = src.pop("kind", "none")
        project = bool(src.pop("project_solenoidal", kind == "insulator_coil"))
        if kind == "none":
            return SourceSpec()
        if kind == "conductor_loop":
            spec = conductor_loop(self.geometry, **src)
            return _with_projection(spec, project)
        if kind == "insulator_coil":
            return insulator_coil(self.geometry, **src, project=project)
        if kind == "boundary_uniform_B":
            return _with_projection(boundary_uniform_B(src["B0"]), project)
        path = os.path.join(self.base_dir, src["path"])
        values = load_coefficients(path)
        if n_edges is not None and values.shape != (n_edges,):
            raise ConfigurationError(f"raw source {path} has {values.size} entries, mesh has {n_edges} edges")
        return raw_source(values, project)


def _with_projection(spec, project):
    if not project:
        return spec
    from dataclasses import replace

    return replace(spec, project=True)


def load_coefficients(path) -> np.ndarray:
    """Edge coefficients from ``.npy`` (real or complex) or whitespace text."""
    try:
        if str(path).endswith(".npy"):
            values = np.load(path)
        else:
            values = np.loadtxt(path, dtype=complex if _looks_complex(path) else float)
    except (OSError, ValueError) as exc:
        raise ConfigurationError(f"cannot read source coefficients from {path}: {exc}") from exc
    return np.ravel(values)


def _looks_complex(path):
    with open(path) as fh:
        return "j" in fh.read()


def _vec(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ConfigurationError(f"{name} must be a list of three numbers")
    return tuple(arr.tolist())


def parse_config(data: dict, base_dir=".") -> RunConfig:
    """Validate a decoded JSON document and build a :class:`RunConfig`."""
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object")
    allowed = {"geometry", "materials", "source", "formulations", "tol", "max_iter", "checks",
               "interface_share", "output"}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown configuration keys {sorted(unknown)}")
    g = data.get("geometry")
    if not isinstance(g, dict):
        raise ConfigurationError("geometry section is required")
    try:
        resolution = g["resolution"]
        if not isinstance(resolution, int) or isinstance(resolution, bool):
            raise ConfigurationError("geometry.resolution must be an integer")
        geometry = BoxGeometry(*(_vec(g[k], f"geometry.{k}") for k in
                                 ("domain_min", "domain_max", "conductor_min", "conductor_max")), resolution)
    except KeyError as exc:
        raise ConfigurationError(f"geometry is missing {exc.args[0]!r}") from exc
    geometry.grid  # validate now so geometry errors surface as config errors

    m = data.get("materials", {})
    try:
        materials = Materials(**{k: float(v) for k, v in m.items()})
    except TypeError as exc:
        raise ConfigurationError(f"bad materials section: {exc}") from exc

    source = dict(data.get("source") or {"kind": "none"})
    for key in ("center", "axis", "B0"):
        if key in source:
            source[key] = list(_vec(source[key], f"source.{key}"))

    out = data.get("output") or {}
    checks = data.get("checks")
    try:
        return RunConfig(
            geometry=geometry,
            materials=materials,
            source=source,
            formulations=tuple(data.get("formulations", FORMULATIONS)),
            tol=float(data.get("tol", 1e-8)),
            max_iter=data.get("max_iter"),
            checks=None if checks is None else tuple(checks),
            interface_share=float(data.get("interface_share", 1.0)),
            report=out.get("report"),
            export=out.get("export"),
            base_dir=base_dir,
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(str(exc)) from exc


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path} is not valid JSON: {exc}") from exc
    return parse_config(data, os.path.dirname(os.path.abspath(path)))
