import json
import os
import subprocess
import sys

import numpy as np
import pytest

from mqsfeti.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, main, resolve_threads, run
from mqsfeti.config import load_config, parse_config
from mqsfeti.errors import ConfigurationError
from mqsfeti.vtk import read_vtk_cell_vectors

GEOMETRY = {"domain_min": [0, 0, 0], "domain_max": [1, 1, 1], "conductor_min": [0, 0, 0],
            "conductor_max": [0.5, 1, 1], "resolution": 2}
LOOP = {"kind": "conductor_loop", "center": [0.25, 0.5, 0.5], "axis": [1, 0, 0], "radius": 0.3, "width": 0.15}


def write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_zero_source_run(tmp_path):
    cfg = write(tmp_path, {"geometry": GEOMETRY})
    report = tmp_path / "report.json"
    assert main(["solve", "--config", cfg, "--report", str(report)]) == EXIT_OK
    doc = json.loads(report.read_text())
    assert set(doc) >= {"config_echo", "checks", "timings"}
    assert doc["checks"] and all(c["pass"] for c in doc["checks"])
    assert set(doc["checks"][0]) == {"name", "value", "tol", "pass", "paper_ref"}


def test_patch_test_run_and_export(tmp_path):
    cfg = write(tmp_path, {"geometry": GEOMETRY, "source": {"kind": "boundary_uniform_B", "B0": [0, 0, 1]}})
    report = tmp_path / "r.json"
    out = tmp_path / "fields"
    assert main(["solve", "--config", cfg, "--report", str(report), "--export", str(out)]) == EXIT_OK
    checks = {c["name"]: c for c in json.loads(report.read_text())["checks"]}
    assert checks["patch_test"]["value"] <= 1e-10
    for name in ("fields_mono.vtk", "fields_feti.vtk"):
        data = read_vtk_cell_vectors(out / name)
        np.testing.assert_allclose(data["B_re"], np.tile([0, 0, 1.0], (len(data["B_re"]), 1)), atol=1e-10)
        assert not np.any(data["B_im"])
        # E is zero outside the conductor and, for a static uniform field, zero inside too
        assert np.abs(data["E_re"]).max() <= 1e-10
        assert set(data["subdomain"].tolist()) == {0, 1}
    text = (out / "fields_mono.vtk").read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert "CELL_TYPES 48" in text and "VECTORS E_im double" in text


def test_export_is_byte_identical(tmp_path):
    cfg = write(tmp_path, {"geometry": GEOMETRY, "source": LOOP, "materials": {"omega": 314.159}})
    main(["solve", "--config", cfg, "--export", str(tmp_path / "a")])
    main(["solve", "--config", cfg, "--export", str(tmp_path / "b")])
    for name in ("fields_mono.vtk", "fields_feti.vtk"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    data = read_vtk_cell_vectors(tmp_path / "a" / "fields_mono.vtk")
    insulator = data["subdomain"] == 1
    assert not np.any(data["E_re"][insulator]) and np.abs(data["E_im"][~insulator]).max() > 0


def test_dual_non_convergence_exit_code(tmp_path):
    cfg = write(tmp_path, {"geometry": GEOMETRY, "source": LOOP, "formulations": ["feti_dual"], "max_iter": 1,
                           "materials": {"omega": 314.159}})
    report = tmp_path / "r.json"
    assert main(["solve", "--config", cfg, "--report", str(report)]) == EXIT_SOLVER
    doc = json.loads(report.read_text())
    assert doc["status"] == "error" and "did not converge" in doc["error"]
    assert doc["residual_history"]


def test_failed_check_exit_code(tmp_path):
    # unequal permeability breaks the uniform-field patch test but nothing else
    cfg = write(tmp_path, {"geometry": GEOMETRY, "materials": {"mu_C": 2.0},
                           "source": {"kind": "boundary_uniform_B", "B0": [0, 0, 1]}})
    report = tmp_path / "r.json"
    assert main(["solve", "--config", cfg, "--report", str(report)]) == EXIT_CHECK
    doc = json.loads(report.read_text())
    failed = [c["name"] for c in doc["checks"] if not c["pass"]]
    assert failed == ["patch_test"]


@pytest.mark.parametrize("doc", [
    {},
    {"geometry": dict(GEOMETRY, resolution=3)},
    {"geometry": dict(GEOMETRY, conductor_max=[1, 1, 1])},
    {"geometry": GEOMETRY, "formulations": []},
    {"geometry": GEOMETRY, "formulations": ["cg"]},
    {"geometry": GEOMETRY, "tol": 0},
    {"geometry": GEOMETRY, "source": {"kind": "boundary_uniform_B"}},
    {"geometry": GEOMETRY, "source": {"kind": "conductor_loop", "B0": [0, 0, 1]}},
    {"geometry": GEOMETRY, "source": {"kind": "laser"}},
    {"geometry": GEOMETRY, "source": dict(LOOP, center=[0.75, 0.5, 0.5])},
    {"geometry": GEOMETRY, "materials": {"sigma_C": 0}},
    {"geometry": GEOMETRY, "colour": "blue"},
])
def test_config_errors(tmp_path, doc):
    cfg = write(tmp_path, doc)
    assert main(["solve", "--config", cfg]) == EXIT_CONFIG


def test_missing_and_malformed_config(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--config", str(bad)]) == EXIT_CONFIG


def test_non_solenoidal_raw_source_is_rejected(tmp_path):
    cfg = parse_config({"geometry": GEOMETRY, "source": {"kind": "raw", "path": "j.txt"}}, str(tmp_path))
    n_edges = 98
    np.savetxt(tmp_path / "j.txt", np.ones(n_edges))
    code, doc = run(cfg)
    assert code == EXIT_CONFIG and "solenoidal" in doc["error"]

    projected = parse_config({"geometry": GEOMETRY, "source": {"kind": "raw", "path": "j.txt",
                                                                "project_solenoidal": True}}, str(tmp_path))
    assert run(projected)[0] == EXIT_OK
    np.savetxt(tmp_path / "j.txt", np.ones(5))
    assert run(cfg)[0] == EXIT_CONFIG


def test_unwritable_export(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = write(tmp_path, {"geometry": GEOMETRY})
    assert main(["solve", "--config", cfg, "--export", str(blocker / "sub")]) == EXIT_CONFIG


def test_output_paths_from_config(tmp_path):
    cfg = write(tmp_path, {"geometry": GEOMETRY, "output": {"report": "out/report.json", "export": "out/vtk"}})
    assert main(["solve", "--config", cfg]) == EXIT_OK
    assert (tmp_path / "out" / "report.json").exists()
    assert (tmp_path / "out" / "vtk" / "fields_feti.vtk").exists()


def test_threads(monkeypatch):
    monkeypatch.delenv("MQSFETI_THREADS", raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv("MQSFETI_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    monkeypatch.setenv("MQSFETI_THREADS", "many")
    with pytest.raises(ConfigurationError):
        resolve_threads()


def test_config_echo_roundtrip(tmp_path):
    cfg = load_config(write(tmp_path, {"geometry": GEOMETRY, "source": LOOP, "tol": 1e-9}))
    echo = cfg.echo()
    assert echo["tol"] == 1e-9 and echo["source"]["kind"] == "conductor_loop"
    json.dumps(echo)


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, {"geometry": GEOMETRY, "formulations": ["mono"]})
    proc = subprocess.run([sys.executable, "-m", "mqsfeti", "solve", "--config", cfg, "--threads", "2"],
                          capture_output=True, text=True, env=dict(os.environ))
    assert proc.returncode == 0, proc.stderr
    assert "PASS mono_residual" in proc.stdout
