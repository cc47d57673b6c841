"""Legacy ASCII VTK export of per-tet fields."""

import os

import numpy as np

from .mesh import C, Mesh

VTK_TETRA = 10


def _fmt(x) -> str:
    # repr of a Python float is the shortest round-tripping form, so output
    # is reproducible byte for byte; -0.0 is folded into 0.0
    x = float(x) + 0.0
    return repr(x)


def _vector_block(name, values):
    lines = [f"VECTORS {name} double"]
    lines += [" ".join(_fmt(c) for c in row) for row in values]
    return lines


def write_vtk(path, mesh: Mesh, B, E=None, tet_label=None, title="mqsfeti fields"):
    """Write a VTK 3.0 unstructured grid with cell data.

    Parameters
    ----------
    B : (T, 3) complex array
        Flux density per tet.
    E : (n_C, 3) complex array, optional
        Electric field on the conductor tets in ascending tet order. Other
        cells get zero vectors.
    tet_label : (T,) int array
        Subdomain per tet (0 conductor, 1 insulator).
    """
    B = np.asarray(B, dtype=complex)
    T = mesh.n_tets
    if tet_label is None:
        raise ValueError("tet_label is required")
    tet_label = np.asarray(tet_label)
    E_all = np.zeros((T, 3), dtype=complex)
    if E is not None:
        cond = np.flatnonzero(tet_label == C)
        E_all[cond] = np.asarray(E, dtype=complex)

    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET UNSTRUCTURED_GRID"]
    lines.append(f"POINTS {mesh.n_vertices} double")
    lines += [" ".join(_fmt(c) for c in p) for p in mesh.vertices]
    lines.append(f"CELLS {T} {5 * T}")
    lines += ["4 " + " ".join(str(int(v)) for v in tet) for tet in mesh.tets]
    lines.append(f"CELL_TYPES {T}")
    lines += [str(VTK_TETRA)] * T
    lines.append(f"CELL_DATA {T}")
    lines += _vector_block("B_re", B.real)
    lines += _vector_block("B_im", B.imag)
    lines += _vector_block("E_re", E_all.real)
    lines += _vector_block("E_im", E_all.imag)
    lines += ["SCALARS subdomain int 1", "LOOKUP_TABLE default"]
    lines += [str(int(v)) for v in tet_label]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_vtk_cell_vectors(path) -> dict:
    """Parse the cell-data blocks written by :func:`write_vtk`.

    Returns a dict name -> array; vectors are (T, 3), the subdomain (T,).
    """
    with open(path) as fh:
        tokens = fh.read().split("\n")
    out, k = {}, 0
    n_cells = None
    while k < len(tokens):
        line = tokens[k].strip()
        if line.startswith("CELL_DATA"):
            n_cells = int(line.split()[1])
        elif line.startswith("VECTORS") and n_cells is not None:
            name = line.split()[1]
            rows = tokens[k + 1:k + 1 + n_cells]
            out[name] = np.array([[float(v) for v in r.split()] for r in rows])
            k += n_cells
        elif line.startswith("SCALARS") and n_cells is not None:
            name = line.split()[1]
            rows = tokens[k + 2:k + 2 + n_cells]
            out[name] = np.array([int(r) for r in rows])
            k += n_cells + 1
        k += 1
    return out


def export_fields(directory, mesh: Mesh, results: dict, tet_label):
    """One file per available formulation, e.g. ``fields_mono.vtk``.

    Returns the written paths.
    """
    os.makedirs(directory, exist_ok=True)
    written = []
    for tag, bkey, ekey in (("mono", "B_mono", "E_mono"), ("feti", "B_feti", "E_feti")):
        if bkey not in results:
            continue
        path = os.path.join(directory, f"fields_{tag}.vtk")
        write_vtk(path, mesh, results[bkey].values, results.get(ekey), tet_label, f"mqsfeti {tag} fields")
        written.append(path)
    return written
