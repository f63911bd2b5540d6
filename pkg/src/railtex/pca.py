"""Principal component analysis over feature matrices.

The covariance eigendecomposition uses cyclic Jacobi rotations, which are
deterministic to exact tolerances on the small dimensionalities this
pipeline produces (d <= 60). Components carry a fixed sign convention so
identical input always yields a bit-identical model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DimensionMismatchError, InvalidParameterError, TooFewSamplesError

_JACOBI_TOL = 1e-11
_MAX_SWEEPS = 100


@dataclass(frozen=True)
class PcaModel:
    """Fitted mean, orthonormal component rows, and their variances.

    ``components`` is k x d with rows sorted by descending eigenvalue;
    ``explained_ratio`` is each eigenvalue's share of the total variance.
    """

    mean: np.ndarray
    components: np.ndarray
    eigenvalues: np.ndarray
    explained_ratio: np.ndarray


def jacobi_eigh(a: np.ndarray, tol: float = _JACOBI_TOL, max_sweeps: int = _MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a symmetric matrix by cyclic Jacobi.

    Sweeps all (p, q) pairs, rotating away off-diagonal entries, until the
    off-diagonal Frobenius norm drops below ``tol``. Returns (eigenvalues,
    column eigenvectors), unsorted. Raises ConvergenceError after
    ``max_sweeps`` sweeps.
    """
    m = np.array(a, dtype=np.float64)
    n = m.shape[0]
    if m.shape != (n, n):
        raise InvalidParameterError(f"matrix must be square, got {m.shape}")
    v = np.eye(n)
    if n == 1:
        return m.diagonal().copy(), v

    for _ in range(max_sweeps):
        if _off_norm(m) < tol:
            return m.diagonal().copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                h = m[q, q] - m[p, p]
                if abs(h) + 100.0 * abs(apq) == abs(h):
                    t = apq / h  # asymptotic rotation for negligible pivots
                else:
                    theta = 0.5 * h / apq
                    t = 1.0 / (abs(theta) + np.sqrt(1.0 + theta * theta))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * m[:, p] - s * m[:, q]
                rot_q = s * m[:, p] + c * m[:, q]
                m[:, p], m[:, q] = rot_p, rot_q
                m[p, :], m[q, :] = c * m[p, :] - s * m[q, :], s * m[p, :] + c * m[q, :]
                v[:, p], v[:, q] = c * v[:, p] - s * v[:, q], s * v[:, p] + c * v[:, q]
    off = _off_norm(m)
    if off < tol:
        return m.diagonal().copy(), v
    raise ConvergenceError(f"Jacobi did not reach off-diagonal norm {tol} in {max_sweeps} sweeps (at {off:.3e})")


def _off_norm(m: np.ndarray) -> float:
    od = m.copy()
    np.fill_diagonal(od, 0.0)
    return float(np.sqrt(np.sum(od * od)))


def fit_pca(X: np.ndarray, k: int) -> PcaModel:
    """Fit PCA on an n x d matrix, keeping the top k components.

    Centers the data, eigendecomposes the unbiased covariance with cyclic
    Jacobi, sorts eigenpairs by descending eigenvalue (clamped at 0), and
    fixes each component's sign so its largest-magnitude entry is
    positive. When k exceeds the feature count it is clamped to d with a
    warning; k exceeding the sample count is an error.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidParameterError(f"X must be 2-D, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise TooFewSamplesError(f"PCA needs at least 2 samples, got {n}")
    if not np.isfinite(X).all():
        raise InvalidParameterError("X contains non-finite values")
    if k < 1:
        raise InvalidParameterError(f"k must be >= 1, got {k}")
    if k > d:
        warnings.warn(f"requested {k} components but only {d} features; clamping k to {d}", stacklevel=2)
        k = d
    if k > n:
        raise InvalidParameterError(f"k = {k} exceeds the sample count {n}")

    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = jacobi_eigh(cov)
    order = np.argsort(-eigvals, kind="stable")
    eigvals = np.maximum(eigvals[order], 0.0)
    eigvecs = eigvecs[:, order]

    components = eigvecs[:, :k].T.copy()
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = float(eigvals.sum())
    kept = eigvals[:k].copy()
    ratio = kept / total if total > 0 else np.zeros(k)
    return PcaModel(mean=mean, components=components, eigenvalues=kept, explained_ratio=ratio)


def transform(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project a d-vector (or n x d matrix) onto the component basis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.mean.shape[0]:
        raise DimensionMismatchError(f"input has {x.shape[-1]} features, model expects {model.mean.shape[0]}")
    return (x - model.mean) @ model.components.T


def inverse_transform(model: PcaModel, y: np.ndarray) -> np.ndarray:
    """Reconstruct from component space back to feature space."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != model.components.shape[0]:
        raise DimensionMismatchError(f"input has {y.shape[-1]} components, model holds {model.components.shape[0]}")
    return y @ model.components + model.mean
