#!/usr/bin/env python3
"""
Run Report Module for the Pfaffian Entropy Toolkit

Machine-readable output of the command-line pipeline: a versioned JSON
document with a fixed field order, floats written with 17 significant
digits and non-finite numbers as null, so identical inputs give
byte-identical files; and the CSV grid of reconstructed S and T.
"""

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from entropy_reconstructor import PathSpec
from pfaffian_forms import StatePoint
from tolerances import Tolerances

SCHEMA_VERSION = 1
TOOL_NAME = "pfaffian-entropy"
TOOL_VERSION = "1.0.0"

PASS, WARN, FAIL, REFUSED, SKIPPED = "pass", "warn", "fail", "refused", "skipped"


@dataclass(frozen=True)
class Verdict:
    name: str
    status: str
    detail: str = ""
    data: Any = None

    @property
    def passed(self) -> bool:
        return self.status in (PASS, WARN, SKIPPED)


@dataclass(frozen=True)
class GridRow:
    point: Tuple[float, ...]
    entropy: Optional[float]
    temperature: Optional[float]
    error: Optional[float]
    analytic_delta: Optional[float]
    status: str = "ok"

    @property
    def failed(self) -> bool:
        return self.status != "ok"


@dataclass
class RunReport:
    """
    Everything one command produced

    `verdicts` keep their insertion order; `results` carries the
    command-specific payload (Hessian, third-law report, leaf, ...).
    """

    command: str
    model: str
    model_digest: str
    tolerances: Tolerances
    verdicts: List[Verdict] = field(default_factory=list)
    results: Dict[str, Any] = field(default_factory=dict)
    grid: List[GridRow] = field(default_factory=list)
    coordinates: Tuple[str, ...] = ()
    exit_code: int = 0

    def add(self, verdict: Verdict) -> Verdict:
        self.verdicts.append(verdict)
        return verdict

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    @property
    def failure_fraction(self) -> float:
        if not self.grid:
            return 0.0
        return sum(row.failed for row in self.grid) / len(self.grid)

    def to_dict(self) -> Dict[str, Any]:
        document = {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
            "command": self.command,
            "model": {"name": self.model, "sha256": self.model_digest},
            "tolerances": jsonable(self.tolerances),
            "verdicts": {v.name: {"status": v.status, "detail": v.detail, "data": jsonable(v.data)}
                         for v in self.verdicts},
            "results": jsonable(self.results),
            "exit_code": self.exit_code,
        }
        if self.grid:
            document["grid"] = {
                "coordinates": list(self.coordinates),
                "rows": [jsonable(row) for row in self.grid],
                "failed": sum(row.failed for row in self.grid),
            }
        return document

    def to_json(self) -> str:
        return render_json(self.to_dict())


def jsonable(value: Any) -> Any:
    """
    Convert report objects into plain JSON-compatible structures

    Dataclasses keep their field order; tuples become lists; numpy scalars
    and arrays become floats and lists; StatePoint and PathSpec become
    coordinate lists.
    """
    if value is None or isinstance(value, (bool, str, int)):
        return value
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, StatePoint):
        return jsonable(value.values)
    if isinstance(value, PathSpec):
        return [jsonable(p.values) for p in value.waypoints]
    if isinstance(value, Path):
        return str(value)
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


def format_float(value: float) -> str:
    if not math.isfinite(value):
        return "null"
    text = format(value, ".17g")
    if text == "-0":
        text = "0"
    return text


def render_json(value: Any, indent: int = 2) -> str:
    """Deterministic JSON text: insertion key order, 17-digit floats"""
    return _render(jsonable(value), indent, 0) + "\n"


def _render(value, indent, depth):
    pad = " " * (indent * (depth + 1))
    closing = " " * (indent * depth)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(key, ensure_ascii=False)}: {_render(item, indent, depth + 1)}"
                 for key, item in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + closing + "}"
    if not value:
        return "[]"
    if all(v is None or isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return "[" + ", ".join(_render(v, indent, depth + 1) for v in value) + "]"
    items = [pad + _render(item, indent, depth + 1) for item in value]
    return "[\n" + ",\n".join(items) + "\n" + closing + "]"


def _cell(value: Optional[float]) -> str:
    return "" if value is None or not math.isfinite(value) else format_float(value)


def write_grid_csv(rows: Sequence[GridRow], coordinates: Sequence[str], path) -> Path:
    """
    Write the reconstruction grid as CSV

    Columns: coordinates..., S, T, err_estimate, analytic_delta, status.
    Blank cells mark values that are unavailable (no analytic entropy, or a
    failed point whose status column names the error).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(coordinates) + ["S", "T", "err_estimate", "analytic_delta", "status"])
        for row in rows:
            writer.writerow([format_float(v) for v in row.point]
                            + [_cell(row.entropy), _cell(row.temperature), _cell(row.error),
                               _cell(row.analytic_delta), row.status])
    return path


def write_json(report: RunReport, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.to_json(), encoding="utf-8")
    return path
