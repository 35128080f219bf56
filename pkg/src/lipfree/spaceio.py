"""Space files: JSON (canonical) and bare CSV matrices."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ParseError
from .metric import Config, FiniteMetricSpace, validate_space


def _num(x: float) -> str:
    return format(float(x), ".17g")


def dumps_space(M: FiniteMetricSpace) -> str:
    """Serialise with 17 significant digits so loading reproduces every bit."""
    rows = ",\n    ".join("[" + ", ".join(_num(v) for v in row) + "]" for row in M.dist)
    parts = [
        f'  "name": {json.dumps(M.name)}',
        f'  "base_point": {M.base}',
        f'  "distance_matrix": [\n    {rows}\n  ]',
    ]
    if M.labels is not None or M.coords is not None:
        pts = []
        for i in range(M.n):
            entry = [f'"label": {json.dumps(M.label(i))}']
            if M.coords is not None:
                entry.append('"coords": [' + ", ".join(_num(c) for c in M.coords[i]) + "]")
            pts.append("{" + ", ".join(entry) + "}")
        parts.append('  "points": [\n    ' + ",\n    ".join(pts) + "\n  ]")
    return "{\n" + ",\n".join(parts) + "\n}\n"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_space(M: FiniteMetricSpace, path: str | os.PathLike) -> None:
    atomic_write(path, dumps_space(M))


def loads_space(text: str, cfg: Config | None = None, fmt: str = "json") -> FiniteMetricSpace:
    if fmt == "csv":
        return _loads_csv(text, cfg)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno, exc.pos) from None
    if not isinstance(doc, dict) or "distance_matrix" not in doc:
        raise ParseError("expected an object with a 'distance_matrix' field")
    matrix = doc["distance_matrix"]
    if (not isinstance(matrix, list) or not matrix
            or not all(isinstance(r, list) for r in matrix)):
        raise ParseError("'distance_matrix' must be a non-empty array of arrays")
    if len({len(r) for r in matrix}) != 1:
        raise ParseError("'distance_matrix' rows have different lengths")
    try:
        D = np.array(matrix, dtype=float)
    except (TypeError, ValueError):
        raise ParseError("'distance_matrix' has non-numeric entries") from None
    base = doc.get("base_point", 0)
    labels = coords = None
    points = doc.get("points")
    if points is not None:
        if not isinstance(points, list) or len(points) != D.shape[0]:
            raise ParseError("'points' must list one entry per row of the matrix")
        labels = [str(p.get("label", i)) for i, p in enumerate(points)]
        if all("coords" in p for p in points):
            coords = [p["coords"] for p in points]
    return validate_space(D, base, cfg, labels=labels, coords=coords,
                          name=str(doc.get("name", "")))


def _loads_csv(text: str, cfg: Config | None) -> FiniteMetricSpace:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            raise ParseError("non-numeric CSV entry", lineno, None) from None
    if not rows:
        raise ParseError("empty CSV matrix")
    if len({len(r) for r in rows}) != 1:
        raise ParseError("CSV rows have different lengths")
    return validate_space(rows, 0, cfg)


def load_space(path: str | os.PathLike, cfg: Config | None = None) -> FiniteMetricSpace:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    fmt = "csv" if path.suffix.lower() == ".csv" else "json"
    M = loads_space(text, cfg, fmt)
    if not M.name:
        M = type(M)(M.dist, M.base, M.labels, M.coords, path.stem, M.cfg)
    return M


def round_sig(value, digits: int = 12):
    """Recursively round floats to ``digits`` significant digits for reports.

    Non-finite floats become the strings ``"inf"``, ``"-inf"``, ``"nan"``.
    """
    if isinstance(value, dict):
        return {k: round_sig(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return [round_sig(v, digits) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(format(v, f".{digits}g"))
    return value


def dumps_report(doc: dict) -> str:
    return json.dumps(round_sig(doc), indent=2, sort_keys=True) + "\n"
