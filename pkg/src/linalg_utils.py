"""Rank, complement and inverse helpers shared by extops and grouprep."""

import numpy as np
import scipy.linalg as sla

SINGULAR_THRESHOLD = 1e-10


def numerical_rank(matrix: np.ndarray, threshold: float = SINGULAR_THRESHOLD) -> int:
    """Number of singular values above `threshold`."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.size == 0:
        return 0
    return int((sla.svdvals(matrix) > threshold).sum())


def smallest_singular_value(matrix: np.ndarray) -> float:
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    # non-square counts as singular
    if matrix.size == 0 or matrix.shape[0] != matrix.shape[1]:
        return 0.0
    return float(sla.svdvals(matrix).min())


def null_space(matrix: np.ndarray, threshold: float = SINGULAR_THRESHOLD) -> np.ndarray:
    """Orthonormal basis (as columns) of the kernel of `matrix`."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[0] == 0:
        return np.eye(matrix.shape[1])
    return sla.null_space(matrix, rcond=threshold / max(1.0, float(sla.svdvals(matrix).max())))


def complement_basis(columns: np.ndarray) -> tuple[np.ndarray, int]:
    """Orthonormal basis of the orthogonal complement of span(columns).

    Uses a column-pivoted QR factorisation; returns (basis, rank of columns).
    """
    columns = np.atleast_2d(np.asarray(columns, dtype=float))
    n = columns.shape[0]
    if columns.shape[1] == 0:
        return np.eye(n), 0
    q, r, _ = sla.qr(columns, pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int((diag > SINGULAR_THRESHOLD * max(1.0, diag.max() if diag.size else 0.0)).sum())
    return q[:, rank:], rank


def left_inverse(matrix: np.ndarray) -> np.ndarray:
    """Moore-Penrose left inverse; exact on the column space of an injective matrix."""
    return np.linalg.pinv(np.asarray(matrix, dtype=float))


def right_inverse(matrix: np.ndarray) -> np.ndarray:
    """Minimum-norm right inverse of a surjective matrix."""
    return np.linalg.pinv(np.asarray(matrix, dtype=float))


def column_space_residual(basis: np.ndarray, vectors: np.ndarray) -> float:
    """Largest distance of the columns of `vectors` from span(basis)."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.size == 0:
        return 0.0
    coeffs = np.linalg.lstsq(basis, vectors, rcond=None)[0]
    return float(np.abs(vectors - basis @ coeffs).max())


def block_diag(*blocks: np.ndarray) -> np.ndarray:
    return sla.block_diag(*blocks)
