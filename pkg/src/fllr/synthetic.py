"""Synthetic Gaussian functional data and regression functions.

Curves follow a truncated Karhunen-Loeve expansion
``X = sum_k sqrt(lambda_k) eta_k e_k`` with independent standard normal
``eta_k`` and either polynomial (``lambda_k = k^(-2r)``) or exponential
(``lambda_k = exp(-2ck)``) eigenvalue decay.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .hilbert import FunctionalSample, as_curve

logger = logging.getLogger(__name__)

POLYNOMIAL = "polynomial"
EXPONENTIAL = "exponential"


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; streams are fully determined by ``seed``."""
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class KLSpec:
    decay: str = EXPONENTIAL
    rate: float = 1.0
    d: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.decay == POLYNOMIAL:
            if not self.rate > 0.5:
                raise ValueError("polynomial decay needs r > 1/2")
        elif self.decay == EXPONENTIAL:
            if not self.rate > 0:
                raise ValueError("exponential decay needs c > 0")
        else:
            raise ValueError(f"unknown decay {self.decay!r}")
        if self.d < 1:
            raise ValueError("dimension must be at least 1")

    @property
    def eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.d + 1, dtype=float)
        if self.decay == POLYNOMIAL:
            return k ** (-2.0 * self.rate)
        return np.exp(-2.0 * self.rate * k)

    def to_dict(self) -> dict:
        return {"decay": self.decay, "rate": self.rate, "d": self.d, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "KLSpec":
        return cls(d.get("decay", EXPONENTIAL), float(d.get("rate", 1.0)),
                   int(d.get("d", 20)), int(d.get("seed", 0)))


def sample_kl(spec: KLSpec, n: int, seed: int | None = None) -> np.ndarray:
    """Draw ``n`` curves as an ``(n, d)`` array."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(spec.seed if seed is None else seed)
    eta = rng.standard_normal((n, spec.d))
    return eta * np.sqrt(spec.eigenvalues)


def true_rho(spec: KLSpec):
    """Auxiliary function matching the decay regime (unit constant).

    Exponential decay gives the ``s / |log s|`` form; polynomial decay
    ``k^(-r)`` gives ``s^(1 + beta)`` with ``beta = 2 / (2r - 1)``.
    """
    if spec.decay == EXPONENTIAL:
        return lambda s: np.asarray(s) / np.abs(np.log(s))
    beta = 2.0 / (2.0 * spec.rate - 1.0)
    return lambda s: np.asarray(s) ** (1.0 + beta)


@dataclass(frozen=True)
class RegressionSpec:
    """``m(x) = a0 + <theta, x> + sum_k quad_k x_k^2`` plus Gaussian noise."""

    a0: float = 0.0
    theta: np.ndarray = field(default_factory=lambda: np.zeros(0))
    quad_diag: np.ndarray = field(default_factory=lambda: np.zeros(0))
    noise_sigma: float = 0.0

    def __post_init__(self):
        theta = as_curve(self.theta) if np.size(self.theta) else np.zeros(0)
        quad = as_curve(self.quad_diag) if np.size(self.quad_diag) else np.zeros(0)
        if np.any(quad < 0):
            raise ValueError("quadratic coefficients must be nonnegative")
        if self.noise_sigma < 0:
            raise ValueError("noise level must be nonnegative")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "quad_diag", quad)

    def to_dict(self) -> dict:
        return {"a0": self.a0, "theta": self.theta.tolist(),
                "quad_diag": self.quad_diag.tolist(), "noise_sigma": self.noise_sigma}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionSpec":
        return cls(float(d.get("a0", 0.0)), np.asarray(d.get("theta", []), dtype=float),
                   np.asarray(d.get("quad_diag", []), dtype=float),
                   float(d.get("noise_sigma", 0.0)))


def _padded(v: np.ndarray, d: int) -> np.ndarray:
    if v.size > d:
        raise ValueError(f"coefficient vector of length {v.size} exceeds dimension {d}")
    out = np.zeros(d)
    out[: v.size] = v
    return out


def eval_m(spec: RegressionSpec, x) -> np.ndarray | float:
    """Regression function at one curve or at each row of an array.

    ``theta`` and ``quad_diag`` shorter than the curve are zero-padded.
    """
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    d = X.shape[1]
    theta, quad = _padded(spec.theta, d), _padded(spec.quad_diag, d)
    out = spec.a0 + X @ theta + (X * X) @ quad
    return float(out[0]) if single else out


def gen_dataset(kl: KLSpec, reg: RegressionSpec, n: int, seed: int) -> FunctionalSample:
    """Curves and responses ``y = m(X) + eps`` from a single seeded stream."""
    rng = make_rng(seed)
    X = rng.standard_normal((n, kl.d)) * np.sqrt(kl.eigenvalues)
    eps = rng.standard_normal(n) * reg.noise_sigma
    return FunctionalSample(X, eval_m(reg, X) + eps)


def a4_diagnostic(x0, kl: KLSpec) -> float:
    """``sum_k <x0, e_k>^2 / lambda_k^2``; large values flag a rough ``x0``."""
    x0 = as_curve(x0)
    if x0.size != kl.d:
        raise ValueError(f"x0 has dimension {x0.size}, expected {kl.d}")
    val = float(np.sum(x0 ** 2 / kl.eigenvalues ** 2))
    if val > kl.d:
        logger.warning("x0 smoothness sum %.3g exceeds dimension %d", val, kl.d)
    return val


def smooth_x0(kl: KLSpec, scale: float = 1.0) -> np.ndarray:
    """Evaluation point with coordinates ``scale * lambda_k^(3/2)``."""
    return scale * kl.eigenvalues ** 1.5
