"""
Point and supply files.

Points: UTF-8 text, one point per line, coordinates separated by commas or
whitespace, lines starting with '#' ignored. Supplies: one integer per line
with the same comment rule.
"""

import logging
import re
from pathlib import Path
from typing import List, Union

import numpy as np

from ..core.exceptions import InputError
from ..geometry.points import PointSet, SupplyDemand

logger = logging.getLogger(__name__)

_SEPARATOR = re.compile(r"[,\s]+")


def _data_lines(path: Union[str, Path]):
    path = Path(path)
    if not path.exists():
        raise InputError(f"File not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        for number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            yield number, line


def load_points(path: Union[str, Path]) -> PointSet:
    """
    Parse a point file.

    Raises:
        InputError: on unparsable values (with line number), ragged rows,
            non-finite values or an empty file
    """
    rows: List[List[float]] = []
    width = None
    for number, line in _data_lines(path):
        fields = [f for f in _SEPARATOR.split(line) if f]
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise InputError(f"{path}:{number}: cannot parse '{line}'")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise InputError(f"{path}:{number}: expected {width} coordinates, got {len(row)}")
        if not all(np.isfinite(row)):
            raise InputError(f"{path}:{number}: non-finite coordinate")
        rows.append(row)
    if not rows:
        raise InputError(f"{path}: no points")
    logger.debug(f"Loaded {len(rows)} points in d={width} from {path}")
    return PointSet(np.array(rows, dtype=float))


def load_supply(path: Union[str, Path]) -> SupplyDemand:
    """Parse a supply file; the values must be integers summing to zero."""
    values: List[int] = []
    for number, line in _data_lines(path):
        try:
            values.append(int(line))
        except ValueError:
            raise InputError(f"{path}:{number}: supply must be an integer, got '{line}'")
    if not values:
        raise InputError(f"{path}: no supply values")
    return SupplyDemand(np.array(values, dtype=np.int64))


def save_points(points, path: Union[str, Path], comment: str = "") -> Path:
    """Write points in the loader's format."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    with open(path, 'w', encoding='utf-8') as f:
        if comment:
            f.write(f"# {comment}\n")
        for row in arr:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
    return path
