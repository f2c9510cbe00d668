"""Deterministic report serialization.

Every run writes two artifacts: a JSON-lines file holding one record per
report object at full fidelity, and a flat CSV of plot-ready rows.  Both are
deterministic byte streams for a given configuration and seed: keys are
sorted, floats use their shortest round-trip form, and nothing environmental
(timestamps, hostnames, worker counts) is embedded.
"""

from __future__ import annotations

import csv
import io
import json

CSV_COLUMNS = ("map", "metric", "N", "delta", "center",
               "fraction", "half_width", "samples", "seed")


def make_record(command: str, config: dict, kind: str, report: dict) -> dict:
    return {"command": command, "config": config, "kind": kind,
            "report": report}


def render_jsonl(records: list[dict]) -> str:
    lines = [json.dumps(r, sort_keys=True, separators=(",", ":"))
             for r in records]
    return "".join(line + "\n" for line in lines)


def csv_row(**fields) -> dict:
    unknown = set(fields) - set(CSV_COLUMNS)
    if unknown:
        raise ValueError(f"not CSV columns: {sorted(unknown)}")
    return {col: fields.get(col, "") for col in CSV_COLUMNS}


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
