"""Verification reports: row ordering, summary counts, JSON and CSV output."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

REPORT_SCHEMA_VERSION = 1
CSV_COLUMNS = (
    "check", "family", "params", "n", "cutoff", "lhs", "rhs", "margin",
    "tolerance", "pass", "trace_deficit", "quad_err",
)
TIMING_FIELDS = ("wall_time",)


def _json_number(x):
    # JSON has no NaN or infinity; encode them as null / strings
    if isinstance(x, float):
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


def row_key(row: dict) -> tuple:
    return (row["check"], row["family"], row["params"], row["n"], row.get("note", ""))


@dataclass
class VerificationReport:
    rows: list
    config_hash: str
    seed: int
    summary: dict = field(init=False)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=row_key)
        counts = {"pass": 0, "fail": 0, "skip": 0}
        for row in self.rows:
            counts[row["pass"]] += 1
        self.summary = {**counts, "total": len(self.rows)}

    @property
    def exit_code(self) -> int:
        """0 when every row passes, 1 on a failed margin, 2 on any diagnostic skip."""
        if self.summary["skip"]:
            return 2
        if self.summary["fail"]:
            return 1
        return 0

    def to_dict(self, timing: bool = True) -> dict:
        rows = []
        for row in self.rows:
            item = {k: _json_number(v) for k, v in row.items()}
            if not timing:
                for key in TIMING_FIELDS:
                    item.pop(key, None)
            rows.append(item)
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "summary": self.summary,
            "rows": rows,
        }

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir, stem: str = "report") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        json_path, csv_path = out / f"{stem}.json", out / f"{stem}.csv"
        json_path.write_text(self.to_json())
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in self.rows:
                writer.writerow([_csv_value(row[c]) for c in CSV_COLUMNS])
        return json_path, csv_path


def _csv_value(x):
    if isinstance(x, float):
        return repr(x)
    return x


def strip_timing(report: dict) -> dict:
    """Copy of a loaded JSON report without the wall-clock fields."""
    out = dict(report)
    out["rows"] = [{k: v for k, v in r.items() if k not in TIMING_FIELDS} for r in report["rows"]]
    return out
