"""Command line driver: ``mqsfeti solve --config run.json``.

Exit codes: 0 all checks passed, 1 a check failed (the report is still
written), 2 configuration or I/O error, 3 topology or solver error.

Report schema::

    {"config_echo": {...},
     "checks": [{"name", "value", "tol", "pass", "paper_ref"}, ...],
     "timings": {"discretize": s, "verify": s, "export": s, "total": s},
     "threads": n,
     "status": "pass" | "fail" | "error",
     "error": null | message}

``paper_ref`` holds the one-line statement of the property a check tests.
"""

import argparse
import json
import os
import sys
import time

from .config import RunConfig, load_config
from .errors import ConfigurationError, MQSError, SourceError
from .pipeline import discretize
from .verify import verify_case
from .vtk import export_fields

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
THREADS_ENV = "MQSFETI_THREADS"


def resolve_threads(flag=None) -> int:
    """Thread count from the flag, else the environment, else 1."""
    value = flag if flag is not None else os.environ.get(THREADS_ENV, 1)
    try:
        n = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"thread count must be an integer, got {value!r}") from exc
    if n < 1:
        raise ConfigurationError("thread count must be positive")
    return n


def _report_checks(report):
    return [{"name": c.name, "value": c.value, "tol": c.tol, "pass": c.passed, "paper_ref": c.claim}
            for c in report.checks]


def run(config: RunConfig, report_path=None, export_dir=None, threads=1):
    """Execute one configuration.

    Returns ``(exit_code, report_dict)``. The report is written to
    ``report_path`` (or the config's output path) whenever the pipeline got
    far enough to produce one.
    """
    report_path = report_path or _resolve(config, config.report)
    export_dir = export_dir or _resolve(config, config.export)
    doc = {"config_echo": config.echo(), "checks": [], "timings": {}, "threads": threads,
           "status": "error", "error": None}
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        disc = discretize(config.geometry)
        doc["timings"]["discretize"] = time.perf_counter() - t0
        source = config.build_source(disc.mesh.n_edges)
        t1 = time.perf_counter()
        report, results = verify_case(disc, config.materials, source, config.formulations, config.tol,
                                      config.max_iter, config.checks, B0=config.B0)
        doc["timings"]["verify"] = time.perf_counter() - t1
        doc["checks"] = _report_checks(report)
        code = EXIT_OK if report.passed else EXIT_CHECK
        doc["status"] = "pass" if report.passed else "fail"
        if export_dir:
            t2 = time.perf_counter()
            try:
                doc["exports"] = export_fields(export_dir, disc.mesh, results, disc.labels.tet_label)
            except OSError as exc:
                raise ConfigurationError(f"cannot write fields to {export_dir}: {exc}") from exc
            doc["timings"]["export"] = time.perf_counter() - t2
    except (ConfigurationError, SourceError) as exc:
        doc["error"] = str(exc)
        code = EXIT_CONFIG
    except MQSError as exc:
        doc["error"] = f"{type(exc).__name__}: {exc}"
        history = getattr(exc, "history", None)
        if history:
            doc["residual_history"] = [float(h) for h in history]
        code = EXIT_SOLVER
    doc["timings"]["total"] = time.perf_counter() - t0
    if code in (EXIT_CONFIG, EXIT_SOLVER):
        doc["status"] = "error"
    if report_path:
        try:
            write_report(report_path, doc)
        except OSError as exc:
            doc["error"] = f"cannot write report to {report_path}: {exc}"
            code = EXIT_CONFIG
    return code, doc


def _resolve(config, path):
    if path is None:
        return None
    return path if os.path.isabs(path) else os.path.join(config.base_dir, path)


def write_report(path, doc):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    import numpy as np

    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")


def build_parser():
    parser = argparse.ArgumentParser(prog="mqsfeti", description="Eddy-current A-phi solver with FETI checks")
    sub = parser.add_subparsers(dest="command", required=True)
    solve = sub.add_parser("solve", help="run one configuration and write a report")
    solve.add_argument("--config", required=True, help="JSON run configuration")
    solve.add_argument("--report", help="report path (overrides output.report)")
    solve.add_argument("--export", help="directory for VTK field files (overrides output.export)")
    solve.add_argument("--threads", type=int, help=f"thread count (default: ${THREADS_ENV} or 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = resolve_threads(args.threads)
        config = load_config(args.config)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, doc = run(config, args.report, args.export, threads)
    for c in doc["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'} {c['name']}: {c['value']:.3e} (tol {c['tol']:.1e})")
    if doc["error"]:
        print(f"error: {doc['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
