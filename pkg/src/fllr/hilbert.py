"""Coordinate representation of a separable Hilbert space.

A curve is a 1-D float array holding its coefficients in a fixed orthonormal
basis, truncated to ``d`` coordinates. Samples stack curves row-wise.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch

DEFAULT_DIM = 50


def as_curve(x) -> np.ndarray:
    """Validate and convert ``x`` to a finite 1-D float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"a curve must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("curve coefficients must be finite")
    return arr


def _check_same_dim(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch(a.shape[-1], b.shape[-1])


def inner(a, b) -> float:
    a, b = as_curve(a), as_curve(b)
    _check_same_dim(a, b)
    return float(a @ b)


def norm(a) -> float:
    a = as_curve(a)
    return float(np.sqrt(a @ a))


def axpy(alpha: float, a, b) -> np.ndarray:
    """Return ``alpha * a + b``."""
    a, b = as_curve(a), as_curve(b)
    _check_same_dim(a, b)
    return alpha * a + b


@dataclass(frozen=True)
class FunctionalSample:
    """Observations ``(y_i, X_i)``; ``inputs`` has shape ``(n, d)``."""

    inputs: np.ndarray
    outputs: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.inputs, dtype=float)
        y = np.asarray(self.outputs, dtype=float).ravel()
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise ValueError(f"inputs must be a 2-D array, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise DimensionMismatch(X.shape[0], y.shape[0])
        if X.shape[0] < 1:
            raise ValueError("a sample needs at least one observation")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValueError("sample contains non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", y)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.inputs.shape[1]

    def centered_at(self, x0) -> np.ndarray:
        """Return the matrix of ``Z_i = X_i - x0``."""
        x0 = as_curve(x0)
        _check_same_dim(self.inputs, x0)
        return self.inputs - x0

    def drop(self, i: int) -> "FunctionalSample":
        keep = np.arange(self.n) != i
        return FunctionalSample(self.inputs[keep], self.outputs[keep])


def distances(sample: FunctionalSample, x0) -> np.ndarray:
    """Norms ``||X_i - x0||`` for every observation."""
    Z = sample.centered_at(x0)
    return np.sqrt(np.einsum("ij,ij->i", Z, Z))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_dataset_csv(path, header: bool | None = None) -> FunctionalSample:
    """Read a dataset with columns ``c_1, ..., c_d, y``.

    Lines starting with ``#`` are skipped. With ``header=None`` the first
    remaining row is treated as a header when it is not numeric.
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if header is None:
        header = not all(_is_number(v) for v in rows[0])
    if header:
        rows = rows[1:]
    data = np.array([[float(v) for v in row] for row in rows], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2:
        raise ValueError(f"{path}: expected at least one coefficient column and y")
    return FunctionalSample(data[:, :-1], data[:, -1])


def write_dataset_csv(path, sample: FunctionalSample, header: bool = True,
                      comment: str | None = None) -> None:
    """Write ``sample`` as ``c_1..c_d,y`` rows; ``path`` may be an open text file."""
    if hasattr(path, "write"):
        _write_rows(path, sample, header, comment)
        return
    with open(Path(path), "w", newline="") as fh:
        _write_rows(fh, sample, header, comment)


def _write_rows(fh, sample, header, comment):
    if comment:
        for line in comment.splitlines():
            fh.write(f"# {line}\n")
    w = csv.writer(fh, lineterminator="\n")
    if header:
        w.writerow([f"c_{k + 1}" for k in range(sample.d)] + ["y"])
    for x, y in zip(sample.inputs, sample.outputs):
        w.writerow([repr(float(v)) for v in x] + [repr(float(y))])


def read_curve_csv(path) -> np.ndarray:
    """Read a single curve stored as one row or one column of floats."""
    values = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if not all(_is_number(v) for v in row):
                continue
            values.extend(float(v) for v in row)
    return as_curve(values)
