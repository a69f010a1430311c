"""Small-matrix Hermitian positive-definite solves, batched over leading axes.

numpy has no batched triangular solve, so forward/backward substitution is
written out over the (small) matrix dimension while staying vectorized over
the batch. Never forms an explicit inverse.
"""

from __future__ import annotations

import numpy as np


def forward_substitution(chol_lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L y = b for lower-triangular L; shapes (..., K, K) and (..., K, R)."""
    order = chol_lower.shape[-1]
    y = np.empty_like(rhs)
    for i in range(order):
        acc = rhs[..., i, :]
        if i:
            acc = acc - np.einsum("...j,...jr->...r", chol_lower[..., i, :i], y[..., :i, :])
        y[..., i, :] = acc / chol_lower[..., i, i][..., None]
    return y


def backward_substitution_conj(chol_lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve L^H x = y given the lower Cholesky factor L."""
    order = chol_lower.shape[-1]
    x = np.empty_like(rhs)
    for i in range(order - 1, -1, -1):
        acc = rhs[..., i, :]
        if i < order - 1:
            acc = acc - np.einsum(
                "...j,...jr->...r", chol_lower[..., i + 1 :, i].conj(), x[..., i + 1 :, :]
            )
        x[..., i, :] = acc / chol_lower[..., i, i][..., None].conj()
    return x


def cholesky_solve(chol_lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A x = b from the lower Cholesky factor of A."""
    vector_rhs = rhs.ndim == chol_lower.ndim - 1
    if vector_rhs:
        rhs = rhs[..., None]
    x = backward_substitution_conj(chol_lower, forward_substitution(chol_lower, rhs))
    return x[..., 0] if vector_rhs else x


def solve_hermitian_psd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b for Hermitian positive-definite A via Cholesky.

    Raises numpy.linalg.LinAlgError when any batch item is not positive
    definite.
    """
    return cholesky_solve(np.linalg.cholesky(a), b)


def hermitian_rcond(a: np.ndarray) -> np.ndarray | float:
    """Reciprocal condition estimate of a Hermitian matrix (batched)."""
    eigenvalues = np.linalg.eigvalsh(a)
    smallest = eigenvalues[..., 0]
    largest = eigenvalues[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        rcond = np.where(largest > 0, smallest / largest, 0.0)
    if rcond.ndim == 0:
        return float(rcond)
    return rcond
