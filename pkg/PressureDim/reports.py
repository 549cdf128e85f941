"""
Reports and artifacts

- DimensionReport: a located root with its bracket and provenance
- CSV artifacts through pandas with a fixed float format, so identical runs
  give byte-identical files
- report.json next to the CSV files
- Pretty printers for the command line
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
REPORT_JSON_FILE = "report.json"


@dataclass
class DimensionReport:
    """A dimension value with the bracket that certifies it."""
    kind: str  # "affinity" | "barnsley" | "similarity" | "lyapunov"
    value: float
    bracket: Tuple[float, float]
    ambient_dimension: int
    n: Optional[int] = None
    certified_upper: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]

    @property
    def clamped(self) -> float:
        return min(float(self.ambient_dimension), self.value)

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to dictionary for JSON serialization."""
        return {
            "kind": self.kind,
            "value": self.value,
            "bracket": list(self.bracket),
            "ambient_dimension": self.ambient_dimension,
            "n": self.n,
            "certified_upper": self.certified_upper,
            "details": self.details,
            "notes": self.notes,
        }

    def to_compact_dict(self) -> Dict[str, Any]:
        """Only the headline numbers: value, bracket, clamp and any notes."""
        compact = {
            "kind": self.kind,
            "value": self.value,
            "bracket": list(self.bracket),
            "clamped": self.clamped,
        }
        if self.n is not None:
            compact["n"] = self.n
        if self.notes:
            compact["notes"] = self.notes
        return compact


# ----------------------------
# Artifacts
# ----------------------------

def write_csv(frame: pd.DataFrame, directory: Path, name: str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


def save_report_json(report: Dict[str, Any], directory: Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / REPORT_JSON_FILE
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(report), f, indent=2, sort_keys=True)
        f.write("\n")
    return path


# ----------------------------
# Pretty printers
# ----------------------------

def format_number(value: Optional[float], digits: int = 10) -> str:
    if value is None:
        return "n/a"
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.{digits}f}"


def print_header(title: str) -> None:
    print("=" * 80)
    print(title)
    print("=" * 80)


def print_dimension_report(report: DimensionReport) -> None:
    """Pretty print a dimension report."""
    print_header(f"{report.kind.upper()} DIMENSION")
    lo, hi = report.bracket
    print(f"  value            = {format_number(report.value)}")
    print(f"  bracket          = [{format_number(lo)}, {format_number(hi)}]")
    print(f"  width            = {report.width:.3e}")
    print(f"  min(d, value)    = {format_number(report.clamped)}   (d = {report.ambient_dimension})")
    if report.n is not None:
        print(f"  level n          = {report.n}")
    if report.certified_upper is not None:
        print(f"  certified upper  = {format_number(report.certified_upper)}")

    if report.details:
        print("-" * 80)
        for key, value in report.details.items():
            if isinstance(value, (list, tuple)) and len(str(value)) > 60:
                value = str(value)[:57] + "..."
            print(f"  {key:30} = {value}")

    for note in report.notes:
        print(f"\n  NOTE: {note}")
    print("=" * 80)


def print_table(title: str, frame: pd.DataFrame, limit: int = 20) -> None:
    print("-" * 80)
    print(f"{title} ({len(frame)} rows):")
    print("-" * 80)
    print(frame.head(limit).to_string(index=False, float_format=lambda v: f"{v:.10g}"))
    if len(frame) > limit:
        print(f"\n  ... ({len(frame) - limit} more rows)")
