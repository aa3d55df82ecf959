"""JSON report envelope and CSV writers used by the command line."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import asdict, is_dataclass

import numpy as np

SIG_DIGITS = 12

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["command", "config", "result", "diagnostics"],
    "additionalProperties": False,
    "properties": {
        "command": {"type": "string"},
        "config": {"type": "object"},
        "result": {"type": "object"},
        "witness": {"type": ["object", "null"]},
        "diagnostics": {"type": "object"},
    },
}


def _round(x: float):
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    r = float(f"{x:.{SIG_DIGITS}g}")
    return 0.0 if r == 0 else r


def normalize(obj):
    """Convert to plain JSON types, rounding floats to 12 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _round(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if is_dataclass(obj) and not isinstance(obj, type):
        return normalize(asdict(obj))
    if hasattr(obj, "_asdict"):
        return normalize(obj._asdict())
    if isinstance(obj, dict):
        return {str(normalize(k)): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def make_report(command: str, config: dict, result: dict, diagnostics: dict | None = None,
                witness: dict | None = None) -> dict:
    report = {"command": command, "config": config, "result": result}
    if witness is not None:
        report["witness"] = witness
    report["diagnostics"] = diagnostics or {}
    return normalize(report)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def validate(report: dict) -> None:
    """Minimal structural check mirroring REPORT_SCHEMA."""
    required = REPORT_SCHEMA["required"]
    allowed = set(REPORT_SCHEMA["properties"])
    missing = [k for k in required if k not in report]
    extra = [k for k in report if k not in allowed]
    if missing or extra:
        raise ValueError(f"bad report: missing {missing}, unexpected {extra}")
    if not isinstance(report["command"], str):
        raise ValueError("command must be a string")
    for key in ("config", "result", "diagnostics"):
        if not isinstance(report[key], dict):
            raise ValueError(f"{key} must be an object")


def fmt(x) -> str:
    return f"{float(x):.{SIG_DIGITS}g}"


def write_csv(rows, header, handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(c) if isinstance(c, (float, np.floating)) else c for c in row])


def csv_text(rows, header) -> str:
    buf = io.StringIO()
    write_csv(rows, header, buf)
    return buf.getvalue()
