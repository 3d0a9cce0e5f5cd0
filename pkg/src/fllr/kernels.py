"""One-sided kernels supported on [0, 1].

Two kernels are built in: the naive kernel ``K(s) = 1`` on ``[0, 1]`` and
``linear_downweight``, ``K(s) = (4 - 2s) / 3``, which integrates to one and
keeps ``K(1) = 2/3 > 0``. Custom kernels are sampled tables with linear
interpolation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

NAIVE = "naive"
LINEAR_DOWNWEIGHT = "linear_downweight"
CUSTOM_TABLE = "custom_table"

_GRID = np.linspace(0.0, 1.0, 20001)


@dataclass(frozen=True)
class KernelSpec:
    family: str
    table_s: tuple = field(default=(), repr=False)
    table_k: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.family not in (NAIVE, LINEAR_DOWNWEIGHT, CUSTOM_TABLE):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == CUSTOM_TABLE:
            s = np.asarray(self.table_s, dtype=float)
            k = np.asarray(self.table_k, dtype=float)
            if s.ndim != 1 or s.shape != k.shape or s.size < 2:
                raise ValueError("kernel table needs two equal-length columns")
            if not np.all(np.diff(s) > 0):
                raise ValueError("kernel table abscissae must be strictly increasing")
            if s[0] != 0.0 or s[-1] != 1.0:
                raise ValueError("kernel table must span exactly [0, 1]")
            if np.any(k < 0) or not np.all(np.isfinite(k)):
                raise ValueError("kernel values must be finite and nonnegative")
        total = self.integral()
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"kernel must integrate to 1 on [0, 1], got {total:.8g}")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise DomainError("kernel argument must be nonnegative")
        inside = s <= 1.0
        if self.family == NAIVE:
            out = np.where(inside, 1.0, 0.0)
        elif self.family == LINEAR_DOWNWEIGHT:
            out = np.where(inside, (4.0 - 2.0 * s) / 3.0, 0.0)
        else:
            vals = np.interp(np.minimum(s, 1.0), self.table_s, self.table_k)
            out = np.where(inside, vals, 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def value_at_one(self) -> float:
        return self(1.0)

    @property
    def sup(self) -> float:
        """Supremum of the kernel on its support."""
        if self.family == NAIVE:
            return 1.0
        if self.family == LINEAR_DOWNWEIGHT:
            return 4.0 / 3.0
        return float(np.max(self.table_k))

    def integral(self) -> float:
        if self.family == NAIVE:
            return 1.0
        if self.family == LINEAR_DOWNWEIGHT:
            return 1.0
        # exact for a piecewise linear interpolant
        return float(np.trapezoid(self.table_k, self.table_s))


def naive() -> KernelSpec:
    return KernelSpec(NAIVE)


def linear_downweight() -> KernelSpec:
    return KernelSpec(LINEAR_DOWNWEIGHT)


def from_table(s, k, normalize: bool = False) -> KernelSpec:
    s = np.asarray(s, dtype=float)
    k = np.asarray(k, dtype=float)
    if normalize:
        k = k / np.trapezoid(k, s)
    return KernelSpec(CUSTOM_TABLE, tuple(s.tolist()), tuple(k.tolist()))


def read_kernel_table(path, normalize: bool = False) -> KernelSpec:
    """Load a two-column ``s, K(s)`` CSV (header and ``#`` lines skipped)."""
    s, k = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                a, b = float(row[0]), float(row[1])
            except ValueError:
                continue
            s.append(a)
            k.append(b)
    return from_table(s, k, normalize=normalize)


def by_name(name: str) -> KernelSpec:
    if name == NAIVE:
        return naive()
    if name == LINEAR_DOWNWEIGHT:
        return linear_downweight()
    raise ValueError(f"unknown built-in kernel {name!r}")


def eval_kernel(k: KernelSpec, s):
    return k(s)


@dataclass(frozen=True)
class A1Report:
    bounded: bool
    positive_at_one: bool
    derivative_integrable: bool
    derivative_nonnull: bool
    derivative_l1: float
    exception: str | None

    @property
    def passed(self) -> bool:
        if self.exception == NAIVE:
            return True
        return self.bounded and self.positive_at_one and self.derivative_integrable


def check_a1(k: KernelSpec) -> A1Report:
    """Diagnose the kernel conditions used by the rate analysis.

    The derivative's L1 norm is the total variation of ``K`` on ``[0, 1]``,
    accumulated on a fine grid merged with any table knots. Whether the
    derivative is non-null is recorded, not enforced.
    """
    grid = _GRID
    if k.family == CUSTOM_TABLE:
        grid = np.union1d(grid, np.asarray(k.table_s))
    vals = k(grid)
    tv = float(np.sum(np.abs(np.diff(vals))))
    return A1Report(
        bounded=bool(np.all(np.isfinite(vals))),
        positive_at_one=k.value_at_one > 0,
        derivative_integrable=np.isfinite(tv),
        derivative_nonnull=tv > 0,
        derivative_l1=tv,
        exception=NAIVE if k.family == NAIVE else None,
    )
