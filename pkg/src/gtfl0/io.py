"""CSV and JSON readers/writers for signals, labels, reports and curves."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import DataNotFound


def read_matrix_csv(path, header: bool = False) -> np.ndarray:
    """Numeric CSV as a 2-D float array (one row per node/sample)."""
    path = Path(path)
    if not path.exists():
        raise DataNotFound(str(path))
    data = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    return data


def read_labels_csv(path, header: bool = False) -> np.ndarray:
    """One integer class per row; ``-1`` marks an unlabelled sample."""
    return read_matrix_csv(path, header).ravel().astype(np.int64)


def write_matrix_csv(path, a) -> None:
    np.savetxt(path, np.atleast_2d(np.asarray(a, dtype=float).T).T, delimiter=",", fmt="%.17g")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def write_curve_csv(path, rows, columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
