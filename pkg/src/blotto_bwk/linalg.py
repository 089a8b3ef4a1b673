"""Dense symmetric eigendecomposition, Moore-Penrose pseudoinverse, and the
smallest nonzero eigenvalue.

Two eigensolvers are available: ``"jacobi"`` (cyclic Jacobi rotations,
implemented here) and ``"lapack"`` (``numpy.linalg.eigh``).  They are
cross-checked in the test-suite; the learner's hot loop uses LAPACK.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import DegenerateInputError, InvalidInputError, NumericalError

DEFAULT_REL_TOL = 1e-9
MAX_SWEEPS = 100


def as_symmetric(A):
    """Validate approximate symmetry and return the symmetrized copy."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise NumericalError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if np.abs(A - A.T).max(initial=0.0) > 1e-12 * scale:
        raise InvalidInputError("matrix is not symmetric")
    return 0.5 * (A + A.T)


def jacobi_eigh(A, tol=1e-12, max_sweeps=MAX_SWEEPS):
    """Cyclic Jacobi eigensolver; returns unsorted eigenvalues and eigenvectors."""
    A = as_symmetric(A)
    k = A.shape[0]
    V = np.eye(k)
    if k < 2:
        return np.diag(A).copy(), V
    target = tol * np.linalg.norm(A)
    iu = np.triu_indices(k, 1)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * np.sum(A[iu] ** 2))
        if off <= target:
            return np.diag(A).copy(), V
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    raise NumericalError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")


def sym_eig(A, method="jacobi"):
    """Eigenvalues in descending order with orthonormal eigenvectors as columns."""
    if method == "jacobi":
        vals, vecs = jacobi_eigh(A)
    elif method == "lapack":
        vals, vecs = np.linalg.eigh(as_symmetric(A))
    else:
        raise InvalidInputError(f"unknown eigensolver {method!r}")
    order = np.argsort(vals, kind="stable")[::-1]
    return vals[order], vecs[:, order]


def _psd_spectrum(A, rel_tol, method):
    vals, vecs = sym_eig(A, method)
    lam_max = max(float(vals[0]), 0.0) if vals.size else 0.0
    if vals.size and vals[-1] < -1e-8 * max(lam_max, np.finfo(float).tiny):
        raise InvalidInputError(
            f"matrix is not positive semidefinite (eigenvalue {vals[-1]:.3e})"
        )
    keep = vals > rel_tol * lam_max
    return vals, vecs, keep


def pinv(A, rel_tol=DEFAULT_REL_TOL, method="jacobi"):
    """Pseudoinverse of a PSD matrix; eigenvalues <= rel_tol * max are dropped."""
    vals, vecs, keep = _psd_spectrum(A, rel_tol, method)
    Q = vecs[:, keep]
    P = (Q / vals[keep]) @ Q.T
    return 0.5 * (P + P.T)


def smallest_nonzero_eig(A, rel_tol=DEFAULT_REL_TOL, method="jacobi"):
    vals, _, keep = _psd_spectrum(A, rel_tol, method)
    if not np.any(keep):
        raise DegenerateInputError("matrix has no nonzero eigenvalue")
    return float(vals[keep].min())


def range_basis(A, rel_tol=DEFAULT_REL_TOL, method="jacobi"):
    """Orthonormal basis (columns) of the range of a PSD matrix."""
    _, vecs, keep = _psd_spectrum(A, rel_tol, method)
    return vecs[:, keep]


def pinv_on_range(A, basis):
    """Pseudoinverse of a PSD matrix whose range is spanned by ``basis``.

    ``A = Q K Q^T`` with ``K = Q^T A Q`` positive definite, so
    ``A^+ = Q K^{-1} Q^T``; ``K`` is inverted through a Cholesky factor.
    Raises :class:`NumericalError` when ``K`` is not positive definite.
    """
    Q = basis
    factor = _range_cholesky(A, Q)
    return Q @ cho_solve(factor, Q.T)


def pinv_apply_on_range(A, basis, x):
    """``pinv(A) @ x`` for PSD ``A`` with range spanned by ``basis``."""
    Q = basis
    return Q @ cho_solve(_range_cholesky(A, Q), Q.T @ x)


def _range_cholesky(A, Q):
    K = Q.T @ A @ Q
    K = 0.5 * (K + K.T)
    try:
        return cho_factor(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix is singular on the supplied range") from exc
