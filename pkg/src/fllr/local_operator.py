"""Empirical local covariance operator and its spectral factorization.

For a sample ``(X_i)`` and evaluation point ``x0`` with ``Z_i = X_i - x0`` and
kernel weights ``K_i = K(||Z_i|| / h)``, the operator is

    Gamma v = (1/n) sum_i K_i <Z_i, v> Z_i

It has rank at most ``#{K_i > 0}``. Its eigenpairs are computed on the
smaller of the active-point Gram matrix ``G_ij = sqrt(K_i K_j) <Z_i, Z_j> / n``
and the ambient ``d x d`` matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyNeighborhood
from .hilbert import FunctionalSample, as_curve, distances
from .jacobi import jacobi_eigh
from .kernels import KernelSpec

CLAMP_REL = 1e-12


def kernel_weights(sample: FunctionalSample, x0, k: KernelSpec, h: float) -> np.ndarray:
    """Return ``K(||X_i - x0|| / h)`` for every observation."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    dist = distances(sample, x0)
    w = np.asarray(k(dist / h), dtype=float).reshape(-1)
    if not np.any(w > 0):
        raise EmptyNeighborhood(h, float(dist.min()))
    return w


@dataclass(frozen=True)
class LocalFactorization:
    """Spectral data of the local covariance operator around ``x0``.

    ``eigenvectors`` has shape ``(d, r)``: one column per retained
    eigenvalue, all eigenvalues strictly positive and decreasing.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zbar: np.ndarray
    weights: np.ndarray
    active_count: int
    n: int
    h: float
    x0: np.ndarray

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def dim(self) -> int:
        return self.zbar.size

    @property
    def mu1(self) -> float:
        return float(self.eigenvalues[0]) if self.rank else 0.0

    def coordinates(self, v) -> np.ndarray:
        """Coefficients ``<v, u_j>`` in the eigenbasis."""
        return self.eigenvectors.T @ v


def _canonical_signs(U: np.ndarray) -> np.ndarray:
    # first coefficient that is not negligible is made positive
    if U.size == 0:
        return U
    big = np.abs(U) > 1e-10 * np.max(np.abs(U), axis=0, keepdims=True)
    first = np.argmax(big, axis=0)
    signs = np.sign(U[first, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs


def factorize_weighted(Z: np.ndarray, w: np.ndarray, n: int, method: str = "auto"):
    """Eigenpairs of ``(1/n) sum_i w_i Z_i Z_i^T`` for rows ``Z_i``.

    ``method`` is ``"gram"``, ``"ambient"`` or ``"auto"`` (smaller side).
    Returns ``(eigenvalues, eigenvectors)`` with near-zero modes dropped.
    """
    active = w > 0
    B = np.sqrt(w[active] / n)[:, None] * Z[active]
    m, d = B.shape
    if method == "auto":
        method = "gram" if m <= d else "ambient"
    if method == "gram":
        mu, C = jacobi_eigh(B @ B.T)
    elif method == "ambient":
        mu, U = jacobi_eigh(B.T @ B)
    else:
        raise ValueError(f"unknown factorization method {method!r}")
    if mu.size == 0 or mu[0] <= 0:
        return np.zeros(0), np.zeros((d, 0))
    keep = mu > CLAMP_REL * mu[0]
    mu = mu[keep]
    if method == "gram":
        U = B.T @ C[:, keep]
        U /= np.linalg.norm(U, axis=0, keepdims=True)
    else:
        U = U[:, keep]
    return mu, _canonical_signs(U)


def build_factorization(sample: FunctionalSample, x0, k: KernelSpec, h: float,
                        method: str = "auto") -> LocalFactorization:
    x0 = as_curve(x0)
    w = kernel_weights(sample, x0, k, h)
    Z = sample.centered_at(x0)
    n = sample.n
    mu, U = factorize_weighted(Z, w, n, method=method)
    zbar = (w @ Z) / n
    for arr in (mu, U, zbar, w):
        arr.setflags(write=False)
    return LocalFactorization(
        eigenvalues=mu, eigenvectors=U, zbar=zbar, weights=w,
        active_count=int(np.count_nonzero(w > 0)), n=n, h=float(h), x0=x0,
    )


def apply_gamma(f: LocalFactorization, v) -> np.ndarray:
    v = as_curve(v)
    return f.eigenvectors @ (f.eigenvalues * f.coordinates(v))


def explicit_gamma(sample: FunctionalSample, x0, k: KernelSpec, h: float) -> np.ndarray:
    """Assemble the ``d x d`` matrix of the operator directly."""
    w = kernel_weights(sample, x0, k, h)
    Z = sample.centered_at(x0)
    return (Z.T * w) @ Z / sample.n


def operator_norm_certificate(f: LocalFactorization, k: KernelSpec) -> dict:
    """Check ``||Gamma||_inf = mu_1 <= sup(K) h^2``."""
    bound = k.sup * f.h ** 2
    return {"mu1": f.mu1, "bound": bound, "pass": f.mu1 <= bound * (1 + 1e-12)}
