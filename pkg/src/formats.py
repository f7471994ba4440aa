"""On-disk formats: point-set CSV, error index files, flag CSV and JSON."""

import csv
import logging
import re

import numpy as np

from .enums import DistributionKind
from .errors import FormatError
from .sampling import DistributionSpec, PointSet
from .utils import dumps_json

logger = logging.getLogger("Formats")

POINTSET_HEADER = "# sepkit pointset v1, n={n}, kind={kind}, seed={seed}"
POINTSET_HEADER_REGEX = re.compile(
    r"^# sepkit pointset v1, n=(\d+), kind=([\w-]+), seed=(\w+)\s*$"
)
FLAGS_HEADER = ["index", "flagged", "fired_units", "max_score"]

# kinds whose law is fully given by the dimension
_PARAMETER_FREE = {DistributionKind.BALL, DistributionKind.SPHERE}


def format_float(value):
    return format(float(value), ".17g")


def write_pointset(path, ps: PointSet):
    seed = "none" if ps.seed is None else ps.seed
    with open(path, mode="w", newline="") as file:
        file.write(POINTSET_HEADER.format(n=ps.dimension, kind=ps.kind.value, seed=seed))
        file.write("\n")
        writer = csv.writer(file, lineterminator="\n")
        for row in ps.points:
            writer.writerow([format_float(v) for v in row])
    logger.debug(f"Wrote {ps.count} points to `{path}`")


def read_pointset(path) -> PointSet:
    """Point set from CSV; a file without the sepkit header reads as external."""
    header = None
    rows = []
    with open(path, newline="") as file:
        for lineno, line in enumerate(file, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            if stripped.startswith("#"):
                if lineno == 1:
                    header = POINTSET_HEADER_REGEX.match(stripped)
                continue
            try:
                rows.append([float(v) for v in next(csv.reader([stripped]))])
            except ValueError as e:
                raise FormatError(path, f"line {lineno}: {e}")

    if not rows:
        raise FormatError(path, "no points")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise FormatError(path, f"rows have differing lengths {sorted(widths)}")
    points = np.array(rows, dtype=float)

    if header is None:
        return PointSet(points)
    n, kind, seed = int(header[1]), header[2], header[3]
    if points.shape[1] != n:
        raise FormatError(path, f"header says n={n}, rows have {points.shape[1]} values")
    seed = None if seed == "none" else int(seed)
    try:
        kind = DistributionKind(kind)
    except ValueError:
        raise FormatError(path, f"unknown kind `{kind}`")
    if kind in _PARAMETER_FREE:
        return PointSet(points, DistributionSpec(kind, n), seed)
    return PointSet(points, seed=seed, declared_kind=kind)


def read_error_indices(path):
    """0-based indices, one per line; blank lines and `#` comments are skipped."""
    indices = []
    with open(path) as file:
        for lineno, line in enumerate(file, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            try:
                indices.append(int(stripped))
            except ValueError:
                raise FormatError(path, f"line {lineno}: `{stripped}` is not an integer index")
    return np.array(indices, dtype=int)


def write_flags_csv(path, rows, with_stage=False):
    """``rows`` are (index, flagged, fired_units, max_score[, stage]) tuples."""
    with open(path, mode="w", newline="") as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(FLAGS_HEADER + (["stage"] if with_stage else []))
        for row in rows:
            index, flagged, fired, max_score = row[:4]
            line = [index, int(bool(flagged)), ";".join(str(f) for f in fired), format_float(max_score)]
            if with_stage:
                line.append("" if row[4] is None else row[4])
            writer.writerow(line)


def write_json(path, obj):
    with open(path, "w") as file:
        file.write(dumps_json(obj))
