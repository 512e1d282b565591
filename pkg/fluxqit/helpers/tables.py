"""Plain-text result files: comma-separated tables and the JSON summary."""

import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from fluxqit.models.reports import SweepRow, TracePoint, TransferReport

TABLE_SCHEMA = 1

REPORT_COLUMNS = ("input", "fidelity", "leakage", "cavity_residual", "total_time", "mode")


def comment_line(params_json: str) -> str:
    return f"# schema={TABLE_SCHEMA} params={params_json}"


def write_table(
    path: Path,
    params_json: str,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
) -> Path:
    """Write a comment line, a header row and the data rows.

    Floats are written with ``repr`` so reruns produce identical bytes.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as f:
        f.write(comment_line(params_json) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(cell) if isinstance(cell, float) else cell for cell in row])
    return path


def report_row(report: TransferReport) -> list[Any]:
    return [
        report.input_label,
        report.fidelity,
        report.leakage,
        report.cavity_residual,
        report.total_time,
        report.mode.value,
    ]


def write_reports(path: Path, params_json: str, reports: Sequence[TransferReport]) -> Path:
    return write_table(path, params_json, REPORT_COLUMNS, (report_row(r) for r in reports))


def write_sweep(path: Path, params_json: str, rows: Sequence[SweepRow]) -> Path:
    axes = list(rows[0].point) if rows else []
    header = [*axes, *REPORT_COLUMNS]
    body = ([row.point[axis] for axis in axes] + report_row(row.report) for row in rows)
    return write_table(path, params_json, header, body)


def trace_header(n_qubits: int, n_photon_levels: int) -> list[str]:
    header = ["input", "time", "segment", "label", "kind"]
    for qubit in range(n_qubits):
        header += [f"q{qubit + 1}_p{level}" for level in range(4)]
    header += [f"cavity_p{n}" for n in range(n_photon_levels)]
    return header


def write_trace(path: Path, params_json: str, label: str, trace: Sequence[TracePoint]) -> Path:
    """Population time series of one input, one row per sample."""
    if not trace:
        raise ValueError("empty trace")
    first = trace[0]
    header = trace_header(len(first.qubit_populations), len(first.photon_populations))

    def rows() -> Iterable[list[Any]]:
        for point in trace:
            row: list[Any] = [
                label,
                point.time,
                point.segment,
                point.label.value if point.label else "",
                point.kind.value,
            ]
            for populations in point.qubit_populations:
                row += [float(p) for p in populations]
            row += [float(p) for p in point.photon_populations]
            yield row

    return write_table(path, params_json, header, rows())


def write_summary(path: Path, payload: dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
