"""Canonical serialization for experiment reports and curves.

Output formatting is deliberately rigid (repr floats, sorted JSON keys,
comma CSV with '.' decimals) so that repeated runs with the same
configuration and seed produce byte-identical files.  Wall-clock timings
are kept on the in-memory report only and never serialized.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .simulation import MCReport


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def write_records_csv(report: MCReport, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(report.fields)
        for rec in report.records:
            writer.writerow([_cell(rec[k]) for k in report.fields])


def write_summary_json(report: MCReport, path) -> None:
    payload = {
        "experiment": report.name,
        "seed": report.seed,
        "config": report.config,
        "summary": report.summary,
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_curve_csv(path, header, rows) -> None:
    """Generic curve writer: header tuple plus row iterable."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
