"""Blocked numerical kernels over compact genotype codes.

Genotypes are held as ``uint8`` allele counts in {0, 1, 2}; the standardized
matrix ``X_std = (codes - mean) / sd`` is never materialized.  All kernels
walk fixed-size column blocks in index order, so results are reproducible
bit-for-bit for a given block size.  Per-column reductions (``crossprod``)
do not depend on the block size at all; the accumulating matvec does, which
is why the block size is part of the recorded configuration.
"""

from __future__ import annotations

import numpy as np

DEFAULT_BLOCK_SIZE = 2048

__all__ = ["DEFAULT_BLOCK_SIZE", "column_stats", "std_crossprod", "std_matvec"]


def column_stats(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column mean and population-style (1/n divisor) SD of the codes.

    The 1/n divisor makes the standardized columns satisfy
    ``x_std.T @ x_std == n`` exactly, which in turn makes the marginal OLS
    slope equal ``x_std.T @ y / n`` with no correction factor.
    """
    n = codes.shape[0]
    s = codes.sum(axis=0, dtype=np.int64)
    # for values in {0,1,2}: x^2 = x + 2*[x == 2]
    n2 = np.count_nonzero(codes == 2, axis=0)
    mean = s / n
    var = (s + 2.0 * n2) / n - mean * mean
    return mean, np.sqrt(np.maximum(var, 0.0))


def std_crossprod(
    codes: np.ndarray,
    col_mean: np.ndarray,
    col_sd: np.ndarray,
    y: np.ndarray,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """Return ``X_std.T @ y`` (length p) without materializing ``X_std``.

    Uses the identity ``x_std_j.T y = (codes_j.T y - mean_j * sum(y)) / sd_j``.
    The per-column reduction runs in fixed row order (einsum, not BLAS gemv,
    whose strategy varies with the block shape), so the result is bitwise
    independent of the block size.
    """
    n, p = codes.shape
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (n,):
        raise ValueError(f"phenotype length {y.shape} does not match n={n}")
    ysum = y.sum()
    out = np.empty(p, dtype=np.float64)
    for j0 in range(0, p, block_size):
        j1 = min(j0 + block_size, p)
        blk = codes[:, j0:j1].astype(np.float64)
        out[j0:j1] = np.einsum("ij,i->j", blk, y)
    return (out - col_mean * ysum) / col_sd


def std_matvec(
    codes: np.ndarray,
    col_mean: np.ndarray,
    col_sd: np.ndarray,
    weights: np.ndarray,
    indices: np.ndarray | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
) -> np.ndarray:
    """Return ``X_std[:, indices] @ weights`` (length n).

    ``weights`` is aligned with ``indices`` when given, else with all p
    columns.  Computed as ``codes[:, idx] @ (w / sd) - sum(w * mean / sd)``,
    accumulating over column blocks in fixed index order.
    """
    n, p = codes.shape
    weights = np.asarray(weights, dtype=np.float64)
    if indices is None:
        indices = np.arange(p)
    else:
        indices = np.asarray(indices, dtype=np.intp)
    if weights.shape != indices.shape:
        raise ValueError("weights and indices must have equal length")
    v = weights / col_sd[indices]
    offset = float(np.dot(v, col_mean[indices]))
    out = np.zeros(n, dtype=np.float64)
    for k0 in range(0, len(indices), block_size):
        k1 = min(k0 + block_size, len(indices))
        blk = codes[:, indices[k0:k1]].astype(np.float64)
        out += blk @ v[k0:k1]
    out -= offset
    return out
