"""CSV and JSON writers plus the run manifest that accompanies every output."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

CSV_FLOAT_FORMAT = ".17g"


def format_value(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return format(float(v), CSV_FLOAT_FORMAT)


def write_csv(path, header, rows):
    """Comma-delimited, header row, LF line endings, 17 significant digits."""
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Header and float rows of a CSV written by ``write_csv``."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [[float(x) for x in line.rstrip("\n").split(",")] for line in fh if line.strip()]
    return header, rows


def to_jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enum members
        return obj.value
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    return obj


def write_json(path, payload):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(to_jsonable(payload), fh, indent=2, allow_nan=False)
        fh.write("\n")
    return path


def manifest_path(output):
    return Path(str(output) + ".manifest.json")


@dataclass
class RunManifest:
    command: str
    argv: list
    params: dict
    duration_s: float = 0.0
    max_norm_drift: float | None = None
    outputs: list = field(default_factory=list)
    tool_version: str = __version__

    def write(self, path):
        return write_json(path, asdict(self))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls(**data)
