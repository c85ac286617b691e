"""Report serialization: JSON and CSV, written atomically.

All writes go through a temp file in the target directory followed by a
rename, so a failed run never leaves partial reports behind. Float values
round-trip exactly (shortest-repr encoding), which makes repeated runs of
a deterministic scenario byte-identical.
"""

from __future__ import annotations

import json
import os
import tempfile

from .errors import ParseError
from .tracking import SERIES_COLUMNS, TrackingReport


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def report_to_dict(report: TrackingReport) -> dict:
    series = {name: report.series[name] for name in SERIES_COLUMNS}
    series["q"] = report.series["q"]
    return {
        "scenario": report.scenario,
        "optimize_manipulability": report.optimize_manipulability,
        "aggregates": report.aggregates,
        "series": series,
        "warnings": report.warnings,
    }


def report_from_dict(data: dict) -> TrackingReport:
    try:
        return TrackingReport(
            scenario=data["scenario"],
            optimize_manipulability=bool(data["optimize_manipulability"]),
            series=data["series"],
            aggregates=data["aggregates"],
            warnings=data.get("warnings", []),
        )
    except KeyError as exc:
        raise ParseError(f"report missing key {exc}") from exc


def report_json_text(report: TrackingReport) -> str:
    return json.dumps(report_to_dict(report), indent=1) + "\n"


def report_csv_text(report: TrackingReport) -> str:
    lines = [",".join(SERIES_COLUMNS)]
    columns = [report.series[name] for name in SERIES_COLUMNS]
    for row in zip(*columns):
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def write_report(report: TrackingReport, out_dir: str, basename: str) -> dict:
    """Write <basename>.json and <basename>.csv; returns the paths."""
    json_path = os.path.join(out_dir, f"{basename}.json")
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    atomic_write_text(json_path, report_json_text(report))
    atomic_write_text(csv_path, report_csv_text(report))
    return {"json": json_path, "csv": csv_path}


def load_report(path: str) -> TrackingReport:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed report file: {exc}") from exc
    return report_from_dict(data)


def write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=1) + "\n")
