"""Point-file parsing and writing.

Format: UTF-8 text.  Lines starting with `#` (after optional whitespace)
and blank lines are ignored.  Every data line carries four decimal
coordinates separated by whitespace, optionally followed by a final
`label=<token>` field.  Coordinates are written with repr, i.e. the
shortest decimal string that round-trips, so write/read is bit exact.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np


class PointFileError(ValueError):
    """Parse failure; message carries the offending path and line number."""

    def __init__(self, path, line_no: int, msg: str):
        super().__init__(f"{path}:{line_no}: {msg}")
        self.path = path
        self.line = line_no


def read_points(path) -> tuple:
    """Parse a point file; returns (points (n,4) array, labels or None)."""
    pts: list = []
    labels: list = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            s = raw.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            lab: Optional[str] = None
            if parts[-1].startswith("label="):
                lab = parts[-1][len("label="):]
                if not lab:
                    raise PointFileError(path, line_no, "empty label token")
                parts = parts[:-1]
            if len(parts) != 4:
                raise PointFileError(
                    path, line_no,
                    f"expected 4 coordinates, found {len(parts)}")
            try:
                row = [float(p) for p in parts]
            except ValueError:
                raise PointFileError(
                    path, line_no, f"malformed number in {s!r}") from None
            if not all(math.isfinite(x) for x in row):
                raise PointFileError(path, line_no, "non-finite coordinate")
            pts.append(row)
            labels.append(lab)
    if not pts:
        raise PointFileError(path, 0, "file contains no points")
    have = sum(l is not None for l in labels)
    if have and have != len(labels):
        bad = labels.index(None)  # first unlabeled data line
        raise PointFileError(
            path, 0, f"point {bad + 1} is unlabeled but others carry labels")
    return np.array(pts), (labels if have else None)


def write_points(path, points, labels=None, comment: Optional[str] = None):
    pts = np.asarray(points, dtype=float).reshape(-1, 4)
    if labels is not None and len(labels) != len(pts):
        raise ValueError("label count does not match point count")
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        for i, p in enumerate(pts):
            line = " ".join(repr(float(x)) for x in p)
            if labels is not None:
                line += f" label={labels[i]}"
            fh.write(line + "\n")
