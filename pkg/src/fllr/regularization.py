"""Regularized inverses of the local covariance operator.

Three schemes are supported, all acting diagonally in the eigenbasis
``(mu_j, u_j)`` of the factorization:

* ``truncation``: ``sum_{j <= N} mu_j^{-1} u_j (x) u_j``
* ``penalization``: ``(Gamma + alpha I)^{-1}``; the orthogonal complement of
  the retained span is multiplied by ``1 / alpha``
* ``tikhonov``: ``(Gamma^2 + alpha I)^{-1} Gamma``; the complement maps to 0
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOperator, DegenerateTruncation
from .hilbert import as_curve
from .local_operator import LocalFactorization

TRUNCATION = "truncation"
PENALIZATION = "penalization"
TIKHONOV = "tikhonov"
KINDS = (TRUNCATION, PENALIZATION, TIKHONOV)


@dataclass(frozen=True)
class RegScheme:
    kind: str
    N: int | None = None
    alpha: float | None = None
    # alpha = 0 is reserved for oracle comparisons in tests
    allow_zero_alpha: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown regularization {self.kind!r}")
        if self.kind == TRUNCATION:
            if self.N is None or int(self.N) != self.N or self.N < 1:
                raise ValueError(f"truncation needs an integer N >= 1, got {self.N}")
        else:
            if self.alpha is None or not np.isfinite(self.alpha):
                raise ValueError(f"{self.kind} needs a finite alpha")
            if self.alpha < 0 or (self.alpha == 0 and not self.allow_zero_alpha):
                raise ValueError(f"{self.kind} needs alpha > 0, got {self.alpha}")

    @classmethod
    def truncation(cls, N: int) -> "RegScheme":
        return cls(TRUNCATION, N=int(N))

    @classmethod
    def penalization(cls, alpha: float) -> "RegScheme":
        return cls(PENALIZATION, alpha=float(alpha))

    @classmethod
    def tikhonov(cls, alpha: float) -> "RegScheme":
        return cls(TIKHONOV, alpha=float(alpha))

    @property
    def label(self) -> str:
        if self.kind == TRUNCATION:
            return f"truncation(N={self.N})"
        return f"{self.kind}(alpha={self.alpha:.6g})"

    def to_dict(self) -> dict:
        if self.kind == TRUNCATION:
            return {"kind": self.kind, "N": self.N}
        return {"kind": self.kind, "alpha": self.alpha}

    @classmethod
    def from_dict(cls, d: dict) -> "RegScheme":
        kind = d.get("kind")
        if kind == TRUNCATION:
            return cls.truncation(d["N"])
        return cls(kind, alpha=float(d["alpha"]))


def _kept(f: LocalFactorization, s: RegScheme) -> int:
    if s.kind != TRUNCATION:
        return f.rank
    if s.N > f.rank:
        warnings.warn(
            f"truncation N={s.N} exceeds the {f.rank} nonzero eigenvalues; clipped",
            RuntimeWarning, stacklevel=3,
        )
        if f.rank == 0:
            raise DegenerateTruncation("cannot truncate an operator with no nonzero eigenvalue")
        return f.rank
    return s.N


def spectral_filter(f: LocalFactorization, s: RegScheme) -> np.ndarray:
    """Multipliers applied to ``<v, u_j>`` on the retained eigenvectors."""
    mu = f.eigenvalues
    if s.kind == TRUNCATION:
        N = _kept(f, s)
        if mu[N - 1] <= 0:
            raise DegenerateTruncation(f"eigenvalue mu_{N} is zero")
        g = np.zeros_like(mu)
        g[:N] = 1.0 / mu[:N]
        return g
    if s.kind == PENALIZATION:
        return 1.0 / (mu + s.alpha)
    return mu / (mu * mu + s.alpha)


def apply_dagger(f: LocalFactorization, s: RegScheme, v, in_range: bool = False) -> np.ndarray:
    """Apply the regularized inverse to ``v``.

    ``in_range=True`` declares that ``v`` lies in the span of the retained
    eigenvectors (true of the local mean and of any combination of active
    ``Z_i``). The penalization complement term is then skipped: it is zero in
    exact arithmetic, and computing it would divide rounding noise by alpha.
    """
    v = as_curve(v)
    c = f.coordinates(v)
    out = f.eigenvectors @ (spectral_filter(f, s) * c)
    if s.kind == PENALIZATION:
        if s.alpha == 0 or in_range:
            return out
        out = out + (v - f.eigenvectors @ c) / s.alpha
    return out


def conditioning_index(f: LocalFactorization, s: RegScheme) -> float:
    """Inverse conditioning index ``r_n`` of the scheme."""
    if f.mu1 <= 0:
        raise DegenerateOperator("largest eigenvalue is zero")
    if s.kind == TRUNCATION:
        return float(f.eigenvalues[_kept(f, s) - 1] / f.mu1)
    if s.kind == PENALIZATION:
        return s.alpha / f.mu1
    return s.alpha / f.mu1 ** 2


def dagger_norm(f: LocalFactorization, s: RegScheme) -> float:
    """Operator norm of the regularized inverse, in closed form."""
    if s.kind == TRUNCATION:
        return float(1.0 / f.eigenvalues[_kept(f, s) - 1])
    if s.kind == PENALIZATION:
        if f.rank < f.dim:
            return 1.0 / s.alpha if s.alpha > 0 else float("inf")
        return float(1.0 / (f.eigenvalues[-1] + s.alpha))
    if f.rank == 0:
        return 0.0
    return float(np.max(spectral_filter(f, s)))
