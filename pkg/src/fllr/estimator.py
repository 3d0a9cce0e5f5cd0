"""Local linear estimate of a regression function with functional inputs.

The estimate at ``x0`` solves the kernel-weighted least squares problem

    min_{a, phi} sum_i (y_i - a - <phi, X_i - x0>)^2 K_i

with the inverse of the local covariance operator replaced by a regularized
inverse. It takes the closed form ``m_hat = sum_i y_i w_i / sum_i w_i`` with

    w_i = K_i (1 - <X_i - x0, Gamma_dagger zbar>),   zbar = (1/n) sum_i K_i Z_i
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, NumericalSingularity
from .hilbert import FunctionalSample, as_curve
from .kernels import KernelSpec
from .local_operator import LocalFactorization, build_factorization, kernel_weights
from .regularization import RegScheme, apply_dagger


@dataclass(frozen=True)
class FitReport:
    estimate: float
    weights: np.ndarray
    weight_sum: float
    active_count: int
    h: float
    scheme: RegScheme | None
    gradient: np.ndarray | None = None
    factorization: LocalFactorization | None = None

    def to_record(self) -> dict:
        """JSON-serializable summary."""
        return {
            "estimate": self.estimate,
            "weight_sum": self.weight_sum,
            "active_count": self.active_count,
            "h": self.h,
            "scheme": self.scheme.to_dict() if self.scheme else {"kind": "nadaraya_watson"},
        }


def denominator_guard(kernel_weights: np.ndarray) -> float:
    return 1e-10 * max(1.0, float(np.sum(kernel_weights)))


def local_linear_weights(K: np.ndarray, Z: np.ndarray, dagger_zbar: np.ndarray) -> np.ndarray:
    """``w_i = K_i (1 - <Z_i, dagger_zbar>)``; zero wherever ``K_i`` is."""
    return np.where(K > 0, K * (1.0 - Z @ dagger_zbar), 0.0)


def _ratio(y: np.ndarray, w: np.ndarray, K: np.ndarray) -> tuple[float, float]:
    total = float(np.sum(w))
    guard = denominator_guard(K)
    if abs(total) <= guard:
        raise DegenerateDenominator(total, guard)
    return float(y @ w) / total, total


def local_linear_fit(sample: FunctionalSample, x0, k: KernelSpec, h: float,
                     s: RegScheme, factorization: LocalFactorization | None = None,
                     with_gradient: bool = True) -> FitReport:
    """Local linear estimate of ``m(x0)``.

    A precomputed ``factorization`` for the same ``(sample, x0, k, h)`` may be
    passed to fit several schemes without re-decomposing the operator.

    Raises
    ------
    EmptyNeighborhood
        No curve within distance ``h`` of ``x0``.
    DegenerateDenominator
        The weights nearly cancel; increase ``alpha`` or ``h``.
    """
    x0 = as_curve(x0)
    f = factorization or build_factorization(sample, x0, k, h)
    Z = sample.centered_at(x0)
    K = f.weights
    g = apply_dagger(f, s, f.zbar, in_range=True)
    w = local_linear_weights(K, Z, g)
    est, total = _ratio(sample.outputs, w, K)
    report = FitReport(est, w, total, f.active_count, float(h), s, None, f)
    if with_gradient:
        grad = gradient_estimate(sample, report)
        report = FitReport(est, w, total, f.active_count, float(h), s, grad, f)
    return report


def gradient_estimate(sample: FunctionalSample, fit: FitReport) -> np.ndarray:
    """Estimated derivative ``phi* = dagger((1/n) sum y_i K_i Z_i - m_hat zbar)``."""
    f = fit.factorization
    if f is None or fit.scheme is None:
        raise ValueError("gradient needs a local linear fit with its factorization")
    Z = sample.centered_at(f.x0)
    rhs = (f.weights * sample.outputs) @ Z / f.n - fit.estimate * f.zbar
    return apply_dagger(f, fit.scheme, rhs, in_range=True)


def nadaraya_watson_fit(sample: FunctionalSample, x0, k: KernelSpec, h: float) -> FitReport:
    """Kernel-weighted mean ``sum y_i K_i / sum K_i``."""
    K = kernel_weights(sample, x0, k, h)
    est, total = _ratio(sample.outputs, K, K)
    return FitReport(est, K, total, int(np.count_nonzero(K > 0)), float(h), None)


def direct_program_solve(sample: FunctionalSample, x0, k: KernelSpec, h: float,
                         alpha: float, basis: np.ndarray | None = None):
    """Solve the penalized weighted least squares problem directly.

    Minimizes ``sum_i (y_i - a - <phi, Z_i>)^2 K_i + n alpha ||phi||^2`` over
    ``a`` and ``phi`` in the span of the active ``Z_i`` through the
    ``(1 + r)``-dimensional normal equations. Without an explicit ``basis``
    (columns orthonormal, shape ``(d, r)``), the span is obtained from an SVD
    of the weighted design, independently of the eigen-factorization.

    Returns ``(a, phi)`` with ``phi`` in ambient coordinates.
    """
    x0 = as_curve(x0)
    K = kernel_weights(sample, x0, k, h)
    Z = sample.centered_at(x0)
    act = K > 0
    Ka, Za, ya = K[act], Z[act], sample.outputs[act]
    if basis is None:
        _, sv, Vt = np.linalg.svd(np.sqrt(Ka)[:, None] * Za, full_matrices=False)
        r = int(np.sum(sv > 1e-10 * sv[0])) if sv.size and sv[0] > 0 else 0
        basis = Vt[:r].T
    design = np.column_stack([np.ones(Ka.size), Za @ basis])
    normal = (design.T * Ka) @ design
    normal[1:, 1:] += sample.n * alpha * np.eye(basis.shape[1])
    rhs = (design.T * Ka) @ ya
    cond = np.linalg.cond(normal)
    if not np.isfinite(cond) or cond > 1e15:
        raise NumericalSingularity(f"normal matrix condition number {cond:.3e}")
    coef = np.linalg.solve(normal, rhs)
    return float(coef[0]), basis @ coef[1:]
