"""Serialization: distance matrices, spaces, point clouds, and solutions.

Matrices travel either as CSV with a header row of labels or as a compact
binary format: magic bytes "MMSP", little-endian u64 point count, then the
row-major float64 entries.  Spaces are JSON {labels, weights, dist_ref} with
dist_ref naming the matrix file, resolved relative to the JSON's directory.
All floats are written with repr, which round-trips exactly and keeps output
byte-stable.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import InvalidArgumentError
from .space import CenterSet, FiniteMetricMeasureSpace, KMeansSolution

MAGIC = b"MMSP"


def write_matrix_bin(path, matrix: np.ndarray) -> None:
    m = np.ascontiguousarray(np.asarray(matrix, dtype="<f8"))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", m.shape[0]))
        fh.write(m.tobytes())


def read_matrix_bin(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise InvalidArgumentError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        (n,) = struct.unpack("<Q", fh.read(8))
        data = fh.read(8 * n * n)
        if len(data) != 8 * n * n:
            raise InvalidArgumentError(f"{path}: truncated matrix payload")
        return np.frombuffer(data, dtype="<f8").reshape(n, n).astype(np.float64)


def write_matrix_csv(path, labels, matrix: np.ndarray) -> None:
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError("matrix must be square")
    if len(labels) != m.shape[0]:
        raise InvalidArgumentError("label count must match matrix size")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([str(lab) for lab in labels])
        for row in m:
            writer.writerow([repr(float(v)) for v in row])


def read_matrix_csv(path):
    """Returns (labels, matrix)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidArgumentError(f"{path}: empty matrix file")
    labels = rows[0]
    n = len(labels)
    if len(rows) != n + 1:
        raise InvalidArgumentError(f"{path}: expected {n} data rows, found {len(rows) - 1}")
    try:
        m = np.asarray([[float(v) for v in row] for row in rows[1:]], dtype=np.float64)
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: non-numeric matrix entry ({exc})")
    if m.shape != (n, n):
        raise InvalidArgumentError(f"{path}: ragged matrix rows")
    return labels, m


def read_matrix(path):
    """Dispatch on extension: .bin -> binary (index labels), else CSV."""
    path = Path(path)
    if path.suffix == ".bin":
        m = read_matrix_bin(path)
        return [str(i) for i in range(m.shape[0])], m
    return read_matrix_csv(path)


def write_space(path, space: FiniteMetricMeasureSpace, dist_ref: str | None = None) -> None:
    """Write a space as JSON next to its matrix file.

    dist_ref defaults to '<json stem>.dist.bin'; the matrix is written there.
    """
    path = Path(path)
    if dist_ref is None:
        dist_ref = path.stem + ".dist.bin"
    target = path.parent / dist_ref
    if target.suffix == ".bin":
        write_matrix_bin(target, space.dist)
    else:
        write_matrix_csv(target, space.labels, space.dist)
    doc = {
        "labels": [str(lab) for lab in space.labels],
        "weights": [float(w) for w in space.weights],
        "dist_ref": dist_ref,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_space(path) -> FiniteMetricMeasureSpace:
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: not valid JSON ({exc})")
    for key in ("labels", "weights", "dist_ref"):
        if key not in doc:
            raise InvalidArgumentError(f"{path}: missing key {key!r}")
    ref = path.parent / doc["dist_ref"]
    if not ref.exists():
        raise InvalidArgumentError(f"{path}: dist_ref {doc['dist_ref']!r} not found")
    _, matrix = read_matrix(ref)
    return FiniteMetricMeasureSpace(doc["labels"], matrix, np.asarray(doc["weights"]))


def write_cloud_csv(path, cloud: PointCloud) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in cloud.points:
            writer.writerow([repr(float(v)) for v in row])


def read_cloud_csv(path, intrinsic_dim: int = 0) -> PointCloud:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise InvalidArgumentError(f"{path}: empty cloud file")
    try:
        pts = np.asarray([[float(v) for v in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise InvalidArgumentError(f"{path}: non-numeric entry ({exc})")
    return PointCloud(pts, intrinsic_dim)


def solution_to_dict(solution: KMeansSolution, labels=None) -> dict:
    doc = {
        "objective": solution.objective,
        "method": solution.method,
        "tie_tolerance": solution.tie_tolerance,
        "minimizers": [list(m.indices) for m in solution.minimizers],
    }
    if labels is not None:
        doc["minimizer_labels"] = [
            [str(labels[i]) for i in m.indices] for m in solution.minimizers
        ]
    return doc


def dump_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")
