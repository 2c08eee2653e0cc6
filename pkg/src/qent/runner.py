"""Result persistence: report/summary JSON, sweep CSV, figures.

All floating-point output is printed with 12 significant digits and JSON
keys are sorted, so identical configs on identical versions reproduce
byte-identical files up to the timing fields.  Files are written
atomically (temp file + rename).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile

from . import __version__
from .config import ExperimentConfig, SweepSpec
from .experiment import ExperimentResult, run_point, sweep_records
from .qmref import ResidualRecord

CSV_COLUMNS = (
    "overlap_abs",
    "delta_S1",
    "delta_S2",
    "delta_S3",
    "norm_dev",
    "vac_S1",
    "vac_S2",
    "sub_S1",
    "sub_S2",
    "qm_S1",
    "qm_S2",
    "error",
)


def _round_floats(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return float(f"{obj:.12g}") + 0.0  # drops negative zero
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qent-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: str, payload: dict) -> None:
    text = json.dumps(_round_floats(payload), indent=2, sort_keys=True) + "\n"
    _atomic_write(path, text)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value + 0.0:.12g}"  # + 0.0 drops negative zero
    return str(value)


def report_payload(result: ExperimentResult) -> dict:
    return {
        "config": result.config.data,
        "entropy": result.report.to_dict(),
        "qm": {
            "dimension": result.config.qm_state().dimension,
            "entropy_nats": {
                str(int(n)) if float(n).is_integer() else str(n): v
                for n, v in result.residual.qm_entropy.items()
            },
        },
        "residuals": result.residual.to_dict(),
        "normalization": {
            "raw_norm": result.raw_norm,
            "overall_constant": 1.0 / result.raw_norm,
        },
        "provenance": {
            "package": "qent",
            "version": __version__,
            "timing_seconds": result.timing,
        },
    }


def run_experiment(config: ExperimentConfig, out_dir: str | None = None) -> dict:
    """Run one experiment and persist its artifacts; returns written paths."""
    out = out_dir or config.data["output"]["directory"]
    os.makedirs(out, exist_ok=True)
    formats = config.data["output"]["formats"]
    result = run_point(config)
    written = {}
    if "json" in formats:
        path = os.path.join(out, "report.json")
        write_json(path, report_payload(result))
        written["report"] = path
        if result.replica_check is not None:
            path = os.path.join(out, "replica_check.json")
            write_json(path, result.replica_check)
            written["replica_check"] = path
    if "png" in formats:
        from .plots import spectrum_figure

        path = os.path.join(out, "entanglement_spectrum.png")
        spectrum_figure(result.report, path)
        written["figure"] = path
    return written


def sweep_csv_text(parameter: str, rows: list[tuple[object, ResidualRecord]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow((parameter,) + CSV_COLUMNS)
    for value, rec in rows:
        writer.writerow(
            [
                _fmt(value),
                _fmt(rec.overlap_abs),
                _fmt(rec.deltas.get(1.0)),
                _fmt(rec.deltas.get(2.0)),
                _fmt(rec.deltas.get(3.0)),
                _fmt(rec.norm_deviation),
                _fmt(rec.vacuum_entropy.get(1.0)),
                _fmt(rec.vacuum_entropy.get(2.0)),
                _fmt(rec.subtracted_entropy.get(1.0)),
                _fmt(rec.subtracted_entropy.get(2.0)),
                _fmt(rec.qm_entropy.get(1.0)),
                _fmt(rec.qm_entropy.get(2.0)),
                rec.error or "",
            ]
        )
    return buf.getvalue()


def sweep_summary(spec: SweepSpec, rows: list[tuple[object, ResidualRecord]]) -> dict:
    good = [rec for _, rec in rows if rec.error is None]
    summary = {
        "parameter": spec.parameter,
        "values": list(spec.values),
        "points_total": len(rows),
        "points_failed": sum(1 for _, rec in rows if rec.error is not None),
        "residuals": {},
    }
    orders = sorted({n for rec in good for n in rec.deltas})
    for n in orders:
        series = [rec.deltas[n] for rec in good if n in rec.deltas]
        if not series:
            continue
        key = f"delta_S{int(n) if float(n).is_integer() else n}"
        summary["residuals"][key] = {
            "first": series[0],
            "last": series[-1],
            "min": min(series),
            "max": max(series),
            "decreasing": bool(series[0] > series[-1]),
            "strictly_decreasing": bool(
                all(a > b for a, b in zip(series, series[1:]))
            ),
            "all_positive": bool(all(v > 0 for v in series)),
        }
    return summary


def run_sweep(spec: SweepSpec, out_dir: str | None = None, jobs: int = 1) -> dict:
    """Run a sweep and persist CSV, summary and figure; returns paths."""
    out = out_dir or spec.base.data["output"]["directory"]
    os.makedirs(out, exist_ok=True)
    formats = spec.base.data["output"]["formats"]
    rows = sweep_records(spec, jobs=jobs)
    written = {}
    if "csv" in formats:
        path = os.path.join(out, "sweep.csv")
        _atomic_write(path, sweep_csv_text(spec.parameter, rows))
        written["csv"] = path
    if "json" in formats:
        path = os.path.join(out, "summary.json")
        write_json(path, sweep_summary(spec, rows))
        written["summary"] = path
    if "png" in formats:
        from .plots import sweep_figure

        path = os.path.join(out, "sweep.png")
        sweep_figure(spec.parameter, list(spec.values), [rec for _, rec in rows], path)
        written["figure"] = path
    if all(rec.error is not None for _, rec in rows):
        from .errors import NumericalError

        raise NumericalError("every sweep point failed; see the errors column")
    return written
