"""Point-set files, JSON reports and run manifests."""
from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import os
from pathlib import Path

import numpy as np

from .geometry import UNIT_TOL, GeometryError

THREADS_ENV = "LOGENERGY_THREADS"


class PointSetFormatError(GeometryError):
    pass


def parse_points(text: str) -> np.ndarray:
    """Parse ``x y z`` lines; ``#`` starts a comment.  Points are renormalized."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 3:
            raise PointSetFormatError(f"line {lineno}: expected 3 fields, got {len(fields)}")
        try:
            p = [float(f) for f in fields]
        except ValueError as exc:
            raise PointSetFormatError(f"line {lineno}: {exc}") from None
        norm = float(np.linalg.norm(p))
        if not abs(norm - 1.0) <= UNIT_TOL:
            raise PointSetFormatError(f"line {lineno}: norm {norm!r} is not within {UNIT_TOL} of 1")
        rows.append(np.asarray(p) / norm)
    if not rows:
        raise PointSetFormatError("no points found")
    return np.array(rows)


def read_points(path) -> np.ndarray:
    return parse_points(Path(path).read_text())


def format_points(points, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines += [" ".join(f"{v:.17g}" for v in p) for p in np.asarray(points, dtype=float)]
    return "\n".join(lines) + "\n"


def write_points(path, points, comments=()) -> None:
    Path(path).write_text(format_points(points, comments))


def _plain(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _plain(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def thread_count() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        return max(1, int(value))
    return os.cpu_count() or 1


def manifest(command: str, parameters: dict, seed=None, timestamp: bool = True) -> dict:
    from . import __version__

    out = {
        "command": command,
        "parameters": _plain(parameters),
        "seed": seed,
        "tool_version": __version__,
    }
    if timestamp:
        out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return out
