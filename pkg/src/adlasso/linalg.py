"""Dense linear algebra primitives.

Factorizations and eigenvalue routines are implemented here rather than
delegated to LAPACK so that the Jacobi eigensolver can serve as an
independent oracle for the power-iteration spectral norm, and so the
numerical behavior is pinned by this module.  Problem sizes are a few
hundred at most, so O(p^3) dense algorithms are fine.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    EigenFailure,
    IndefiniteMatrix,
    NoConvergence,
    NotSymmetric,
    SingularGram,
)

DEFAULT_SYM_TOL = 1e-10
DEFAULT_JACOBI_OFF_TOL = 1e-12
DEFAULT_POWER_TOL = 1e-9
POWER_MAX_ITER = 10_000


def asymmetry(M) -> float:
    """Largest absolute difference between M and its transpose."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.abs(M - M.T).max())


def require_symmetric(M, tol: float = DEFAULT_SYM_TOL):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {M.shape}")
    gap = asymmetry(M)
    scale = max(1.0, float(np.abs(M).max()) if M.size else 1.0)
    if gap > tol * scale:
        raise NotSymmetric(f"asymmetry {gap:.3e} exceeds tolerance {tol:.3e}")
    return 0.5 * (M + M.T)


def cholesky_sqrt(M, sym_tol: float = DEFAULT_SYM_TOL) -> np.ndarray:
    """Lower-triangular L with L L' = M for symmetric PSD M.

    Rank-deficient input is handled by zeroing the column whenever the
    pivot vanishes, which keeps L triangular and L L' = M for PSD input.

    Raises
    ------
    NotSymmetric
        If the asymmetry of M exceeds ``sym_tol``.
    IndefiniteMatrix
        If a pivot falls below ``-1e-10 * trace(M)``.
    """
    A = require_symmetric(M, sym_tol).copy()
    p = A.shape[0]
    L = np.zeros_like(A)
    trace = float(np.trace(A))
    neg_tol = -1e-10 * trace
    zero_tol = 1e-12 * max(1.0, abs(trace))
    for j in range(p):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d < neg_tol:
            raise IndefiniteMatrix(f"pivot {d:.3e} at column {j} below {neg_tol:.3e}")
        if d <= zero_tol:
            L[j:, j] = 0.0
            continue
        root = np.sqrt(d)
        L[j, j] = root
        if j + 1 < p:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / root
    return L


def jacobi_eigh(M, off_tol: float = DEFAULT_JACOBI_OFF_TOL, max_sweeps: int = 100):
    """Symmetric eigendecomposition by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors in the columns.  Convergence is declared once the
    off-diagonal Frobenius norm drops below ``off_tol * max(1, ||M||_F)``.
    """
    A = require_symmetric(M).copy()
    p = A.shape[0]
    V = np.eye(p)
    if p <= 1:
        return A.diagonal().copy(), V
    threshold = off_tol * max(1.0, float(np.sqrt((A * A).sum())))
    for _ in range(max_sweeps):
        off = A - np.diag(A.diagonal())
        if np.sqrt((off * off).sum()) <= threshold:
            order = np.argsort(A.diagonal())
            return A.diagonal()[order].copy(), V[:, order]
        for q in range(1, p):
            for r in range(q):
                apq = A[r, q]
                if abs(apq) <= threshold / p:
                    continue
                app, aqq = A[r, r], A[q, q]
                theta = 0.5 * (aqq - app) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_r = c * A[:, r] - s * A[:, q]
                rot_q = s * A[:, r] + c * A[:, q]
                A[:, r], A[:, q] = rot_r, rot_q
                A[r, :], A[q, :] = c * A[r, :] - s * A[q, :], s * A[r, :] + c * A[q, :]
                A[r, q] = A[q, r] = 0.0
                V[:, r], V[:, q] = c * V[:, r] - s * V[:, q], s * V[:, r] + c * V[:, q]
    raise EigenFailure(f"Jacobi sweeps exhausted after {max_sweeps} sweeps")


def eig_extremes(M) -> tuple[float, float]:
    """(smallest, largest) eigenvalue of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0, 0.0
    vals, _ = jacobi_eigh(M)
    return float(vals[0]), float(vals[-1])


def spectral_norm(B, tol: float = DEFAULT_POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Largest singular value of B by power iteration on the smaller Gram matrix.

    Starts from the normalized all-ones vector and stops when the Rayleigh
    estimate's relative change drops below ``tol``.

    Raises
    ------
    NoConvergence
        If the relative change is still above ``tol`` after ``max_iter``
        iterations.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.size == 0:
        return 0.0
    G = B.T @ B if B.shape[0] >= B.shape[1] else B @ B.T
    scale = float(np.abs(G).max())
    if scale == 0.0:
        return 0.0
    m = G.shape[0]
    v = np.full(m, 1.0 / np.sqrt(m))
    lam = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = float(np.sqrt(w @ w))
        if nw == 0.0:
            # all-ones start hit the null space exactly; restart from the
            # coordinate axis with the largest diagonal (still deterministic)
            v = np.zeros(m)
            v[int(np.argmax(G.diagonal()))] = 1.0
            w = G @ v
            nw = float(np.sqrt(w @ w))
            if nw == 0.0:
                return 0.0
        v = w / nw
        lam_new = float(v @ (G @ v))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-300):
            return float(np.sqrt(max(lam_new, 0.0)))
        lam = lam_new
    raise NoConvergence(f"power iteration did not reach relative tol {tol:.1e} in {max_iter} iterations")


def induced_inf_norm(A) -> float:
    """Max over rows of the l1 norm; the operator norm for the sup norm."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        return 0.0
    return float(np.abs(A).sum(axis=1).max())


def solve_spd(M, b, zero_tol_scale: float = 1e-12):
    """Solve M x = b for symmetric positive definite M via own Cholesky.

    Raises ``SingularGram`` when a pivot collapses, i.e. M is numerically
    singular.
    """
    L = cholesky_sqrt(M)
    d = L.diagonal()
    if np.any(d <= zero_tol_scale * max(1.0, float(np.trace(M)))):
        raise SingularGram("zero pivot in Cholesky factor")
    b = np.asarray(b, dtype=float)
    # forward then backward substitution
    y = np.zeros_like(b, dtype=float)
    n = L.shape[0]
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros_like(y)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def inv_spd(M):
    """Inverse of a symmetric positive definite matrix via own Cholesky."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    L = cholesky_sqrt(M)
    d = L.diagonal()
    if np.any(d <= 1e-12 * max(1.0, abs(float(np.trace(M))))):
        raise SingularGram("zero pivot in Cholesky factor")
    # invert L by forward substitution on the identity, then M^-1 = L^-T L^-1
    Linv = np.zeros_like(L)
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        for i in range(j, n):
            Linv[i, j] = (e[i] - L[i, :i] @ Linv[:i, j]) / L[i, i]
    return Linv.T @ Linv
