"""Cyclic Jacobi eigensolver for small symmetric matrices.

Sweeps use a round-robin ordering so that each step rotates ``m // 2``
disjoint index pairs at once with vectorized row and column updates.
"""

from __future__ import annotations

import numpy as np

from .errors import EigenNonConvergence

OFF_TOL = 1e-14
MAX_SWEEPS = 100


def _round_robin(m: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # tournament schedule; a dummy player pads odd sizes
    players = list(range(m)) + ([-1] if m % 2 else [])
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        p, q = [], []
        for i in range(size // 2):
            a, b = players[i], players[size - 1 - i]
            if a >= 0 and b >= 0:
                p.append(min(a, b))
                q.append(max(a, b))
        rounds.append((np.array(p, dtype=int), np.array(q, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(A: np.ndarray) -> float:
    off = A - np.diag(np.diag(A))
    return float(np.linalg.norm(off))


def jacobi_eigh(A, tol: float = OFF_TOL, max_sweeps: int = MAX_SWEEPS):
    """Eigen-decompose a symmetric matrix.

    Returns ``(w, V)`` with eigenvalues in decreasing order and orthonormal
    eigenvectors in the columns of ``V``. Iteration stops once the
    off-diagonal Frobenius norm drops below ``tol`` times the Frobenius norm
    of ``A``.

    Raises
    ------
    EigenNonConvergence
        If ``max_sweeps`` sweeps do not reach the threshold.
    """
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if np.linalg.norm(A - A.T) > 1e-8 * max(np.linalg.norm(A), 1e-300):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)  # remove rounding asymmetry
    m = A.shape[0]
    V = np.eye(m)
    scale = float(np.linalg.norm(A))
    if m <= 1 or scale == 0.0:
        return np.diag(A).copy(), V
    target = tol * scale
    schedule = _round_robin(m)
    off = _off_norm(A)
    sweeps = 0
    while off > target:
        if sweeps >= max_sweeps:
            raise EigenNonConvergence(sweeps, off)
        for p, q in schedule:
            apq = A[p, q]
            active = np.abs(apq) > 1e-300
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t = np.where(theta == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            Ap, Aq = A[p, :].copy(), A[q, :].copy()
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            Ap, Aq = A[:, p].copy(), A[:, q].copy()
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            A[p, q] = 0.0
            A[q, p] = 0.0
            Vp, Vq = V[:, p].copy(), V[:, q].copy()
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c
        sweeps += 1
        off = _off_norm(A)
    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]
