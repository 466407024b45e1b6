"""Deterministic CSV/JSON output with the run configuration embedded."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

CONFIG_PREFIX = "# config: "


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce a run: command, parameters, grid, outputs, seed."""

    command: str
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0

    def to_dict(self) -> dict:
        return jsonable(asdict(self))

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        return cls(d["command"], dict(d.get("params", {})), dict(d.get("grid", {})),
                   dict(d.get("outputs", {})), int(d.get("seed", 0)))


def jsonable(x):
    """Convert numpy scalars/arrays, enums and non-finite floats to JSON-safe values."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, Enum):
        return x.value
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    return x


def dumps(payload: dict, config: RunConfig | None = None) -> str:
    body = dict(payload)
    if config is not None:
        body["config"] = config.to_dict()
    return json.dumps(jsonable(body), indent=2, sort_keys=True) + "\n"


def write_json(path, payload: dict, config: RunConfig | None = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(dumps(payload, config))
    return p


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows, config: RunConfig | None = None) -> Path:
    """CSV with a leading ``# config: {...}`` comment line."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="") as fh:
        if config is not None:
            fh.write(CONFIG_PREFIX + json.dumps(config.to_dict(), sort_keys=True) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return p


def read_csv(path):
    """Return ``(config dict or None, header, rows of strings)``."""
    lines = Path(path).read_text().splitlines()
    config = None
    if lines and lines[0].startswith(CONFIG_PREFIX):
        config = json.loads(lines[0][len(CONFIG_PREFIX):])
        lines = lines[1:]
    reader = list(csv.reader(lines))
    return config, reader[0], reader[1:]
