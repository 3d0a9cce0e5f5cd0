"""Small ball probabilities ``F(h) = P(||X - x0|| <= h)``.

Covers the empirical estimate, the two parametric families

    polynomial_exponential:  C1 h^alpha exp(-C2 / h^beta)
    log_squared:             C1 (log 1/h)^(-1/2) exp(-C2 (log h)^2)

their auxiliary functions ``rho`` for the limit
``F(s + x rho(s)) / F(s) -> exp(x)`` as ``s -> 0``, and the plug-in
``v(h) = E[K(||Z||/h) ||Z|| rho(||Z||)]``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, EmptyNeighborhood, FitError
from .hilbert import FunctionalSample, distances
from .kernels import KernelSpec
from .local_operator import kernel_weights

POLY_EXP = "polynomial_exponential"
LOG_SQUARED = "log_squared"

QUANTILE_GRID = np.linspace(0.05, 0.5, 10)
BETA_GRID = np.exp(np.linspace(np.log(0.05), np.log(20.0), 801))


@dataclass(frozen=True)
class SbpFamily:
    kind: str
    C1: float
    C2: float
    alpha_exp: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in (POLY_EXP, LOG_SQUARED):
            raise ValueError(f"unknown small ball family {self.kind!r}")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")
        # C2 = 0 is kept for pure power laws fitted with C2 frozen
        if self.C2 < 0:
            raise ValueError("C2 must be nonnegative")
        if self.kind == POLY_EXP and not self.beta > 0:
            raise ValueError("beta must be positive")

    def log_F(self, h):
        h = np.asarray(h, dtype=float)
        if np.any(h <= 0):
            raise DomainError("small ball radius must be positive")
        if self.kind == POLY_EXP:
            out = np.log(self.C1) + self.alpha_exp * np.log(h) - self.C2 * h ** (-self.beta)
        else:
            if np.any(h >= 1):
                raise DomainError("log_squared family is defined for 0 < h < 1")
            lh = np.log(h)
            out = np.log(self.C1) - 0.5 * np.log(-lh) - self.C2 * lh ** 2
        return float(out) if out.ndim == 0 else out

    def __call__(self, h):
        return np.exp(self.log_F(h))

    def natural_rho_constant(self) -> float:
        """Constant making ``rho`` the exact first-order auxiliary function."""
        if self.C2 == 0:
            return 1.0
        if self.kind == POLY_EXP:
            return 1.0 / (self.beta * self.C2)
        return 1.0 / (2.0 * self.C2)


def family_F(f: SbpFamily, h):
    return f(h)


def rho(f: SbpFamily, s, C: float | None = None):
    """Auxiliary function: ``C s^(1+beta)`` or ``C s / |log s|`` on ``(0, 1)``."""
    s = np.asarray(s, dtype=float)
    if np.any((s <= 0) | (s >= 1)):
        raise DomainError("rho is defined on the open interval (0, 1)")
    if C is None:
        C = f.natural_rho_constant()
    out = C * s ** (1.0 + f.beta) if f.kind == POLY_EXP else C * s / np.abs(np.log(s))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class EmpiricalF:
    sorted_norms: np.ndarray
    n: int

    @classmethod
    def from_norms(cls, norms) -> "EmpiricalF":
        norms = np.sort(np.asarray(norms, dtype=float).ravel())
        if norms.size == 0:
            raise ValueError("need at least one norm")
        if np.any(norms < 0) or not np.all(np.isfinite(norms)):
            raise ValueError("norms must be finite and nonnegative")
        norms.setflags(write=False)
        return cls(norms, norms.size)

    @classmethod
    def from_sample(cls, sample: FunctionalSample, x0) -> "EmpiricalF":
        return cls.from_norms(distances(sample, x0))

    def __call__(self, h):
        h = np.asarray(h, dtype=float)
        if np.any(h < 0):
            raise DomainError("radius must be nonnegative")
        out = np.searchsorted(self.sorted_norms, h, side="right") / self.n
        return float(out) if out.ndim == 0 else out

    def quantile(self, p):
        return np.quantile(self.sorted_norms, p)


def empirical_F(e: EmpiricalF, h):
    return e(h)


def write_norms_csv(path, e: EmpiricalF) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("norm\n")
        for v in e.sorted_norms:
            fh.write(f"{float(v)!r}\n")


def read_norms_csv(path) -> EmpiricalF:
    vals = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals.append(float(row[0]))
            except ValueError:
                continue
    return EmpiricalF.from_norms(vals)


def check_gamma_limit(F: Callable, rho_fn: Callable, s_grid, x_grid,
                      log_scale: bool = False) -> dict:
    """Tabulate ``F(s + x rho(s)) / F(s)`` against ``exp(x)``.

    With ``log_scale=True`` the callable returns ``log F``, which avoids
    underflow for functions such as ``exp(-1/s)`` at small ``s``.
    """
    rows = []
    for s in np.asarray(s_grid, dtype=float):
        r = float(rho_fn(s))
        for x in np.asarray(x_grid, dtype=float):
            if log_scale:
                ratio = float(np.exp(F(s + x * r) - F(s)))
            else:
                ratio = float(F(s + x * r) / F(s))
            target = float(np.exp(x))
            rows.append({"s": float(s), "x": float(x), "ratio": ratio,
                         "target": target, "rel_dev": abs(ratio - target) / target})
    s_min = min(r["s"] for r in rows)
    worst = max(r["rel_dev"] for r in rows if r["s"] == s_min)
    return {"rows": rows, "s_min": s_min, "max_rel_dev": worst}


@dataclass(frozen=True)
class FamilyFit:
    family: SbpFamily
    residual_norm: float
    grid_h: np.ndarray


def fit_family(e: EmpiricalF, kind: str, freeze: dict | None = None,
               probs=QUANTILE_GRID) -> FamilyFit:
    """Least-squares fit of ``log F_hat`` on an empirical quantile grid.

    ``freeze`` pins parameters by name (``C2``, ``alpha_exp`` or ``beta``).
    For the polynomial-exponential family the exponent ``beta`` is profiled
    over a fixed log-spaced grid; the remaining parameters enter linearly.
    """
    freeze = dict(freeze or {})
    if e.n < 50:
        raise FitError(f"need at least 50 norms to fit a family, got {e.n}")
    h = e.quantile(probs)
    if np.any(np.diff(h) <= 0) or h[0] <= 0:
        raise FitError("quantile grid has ties; too few distinct norms")
    y = np.log(e(h))
    if kind == LOG_SQUARED:
        if h[-1] >= 1:
            raise FitError("log_squared family needs all grid radii below 1")
        lh = np.log(h)
        target = y + 0.5 * np.log(-lh)
        if "C2" in freeze:
            C2 = float(freeze["C2"])
            logC1 = float(np.mean(target + C2 * lh ** 2))
        else:
            A = np.column_stack([np.ones_like(lh), -lh ** 2])
            (logC1, C2), *_ = np.linalg.lstsq(A, target, rcond=None)
        res = target - (logC1 - C2 * lh ** 2)
        if C2 < 0:
            raise FitError(f"fitted C2={C2:.3g} is negative")
        return FamilyFit(SbpFamily(LOG_SQUARED, float(np.exp(logC1)), float(C2)),
                         float(np.linalg.norm(res)), h)
    if kind != POLY_EXP:
        raise ValueError(f"unknown small ball family {kind!r}")

    betas = [float(freeze["beta"])] if "beta" in freeze else BETA_GRID
    best = None
    for beta in betas:
        cols, names = [np.ones_like(h)], ["logC1"]
        offset = np.zeros_like(h)
        if "alpha_exp" in freeze:
            offset += freeze["alpha_exp"] * np.log(h)
        else:
            cols.append(np.log(h))
            names.append("alpha_exp")
        if "C2" in freeze:
            offset -= freeze["C2"] * h ** (-beta)
        else:
            cols.append(-h ** (-beta))
            names.append("C2")
        A = np.column_stack(cols)
        coef, *_ = np.linalg.lstsq(A, y - offset, rcond=None)
        params = dict(zip(names, coef))
        params.setdefault("alpha_exp", freeze.get("alpha_exp"))
        params.setdefault("C2", freeze.get("C2"))
        if params["C2"] < 0:
            continue
        res = float(np.linalg.norm(y - offset - A @ coef))
        if best is None or res < best[0]:
            best = (res, beta, params)
        if "C2" in freeze and freeze["C2"] == 0:
            break  # beta does not enter the model
    if best is None:
        raise FitError("no admissible polynomial-exponential fit (C2 < 0 everywhere)")
    res, beta, p = best
    fam = SbpFamily(POLY_EXP, float(np.exp(p["logC1"])), float(p["C2"]),
                    float(p["alpha_exp"]), float(beta))
    return FamilyFit(fam, res, h)


def estimate_v(sample: FunctionalSample, x0, k: KernelSpec, h: float,
               rho_fn: Callable) -> float:
    """Plug-in ``v_hat(h) = (1/n) sum_i K_i ||Z_i|| rho(||Z_i||)``."""
    K = kernel_weights(sample, x0, k, h)
    dist = distances(sample, x0)
    act = (K > 0) & (dist > 0)
    terms = np.zeros_like(dist)
    terms[act] = K[act] * dist[act] * np.asarray(rho_fn(dist[act]), dtype=float)
    return float(np.mean(terms))


def sample_from_family(f: SbpFamily, n: int, rng, h_max: float = 1.0) -> np.ndarray:
    """Draw norms whose CDF on ``(0, h_max]`` is ``F(h) / F(h_max)``.

    Inverse-CDF sampling by vectorized bisection in ``log F``.
    """
    u = rng.uniform(size=n)
    target = np.log(u) + f.log_F(h_max)
    lo = np.full(n, 1e-12)
    hi = np.full(n, float(h_max))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        below = f.log_F(mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)
