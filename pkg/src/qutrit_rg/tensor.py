"""Dense complex tensors and projective equality.

Tensors are plain ``numpy`` arrays of dtype ``complex128``. Matrices follow the
row = output, column = input convention and Kronecker products put the first
factor in the most significant position (row-major flattening).
"""

from __future__ import annotations

import os
from collections.abc import Sequence

import numpy as np

DEFAULT_TOL = 1e-9
EXACT_TOL = 1e-12


class ShapeError(ValueError):
    pass


def default_tol() -> float:
    """The projective tolerance, overridable through ``RG_TOLERANCE``."""
    raw = os.environ.get("RG_TOLERANCE")
    if raw is None:
        return DEFAULT_TOL
    tol = float(raw)
    if not tol > 0:
        raise ValueError(f"RG_TOLERANCE must be positive, got {raw!r}")
    return tol


def as_tensor(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor entries must be finite")
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs matrices, got shapes {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim > 2 or b.ndim > 2:
        raise ShapeError("kron is defined on tensors of rank <= 2")
    return np.kron(np.atleast_2d(a) if a.ndim == 0 else a, np.atleast_2d(b) if b.ndim == 0 else b)


def dagger(a: np.ndarray) -> np.ndarray:
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"dagger needs a matrix, got shape {a.shape}")
    return a.conj().T


def projective_residual(a: np.ndarray, b: np.ndarray) -> float:
    """``1 - |<a,b>|^2 / (|a|^2 |b|^2)``: zero iff ``a`` and ``b`` are parallel.

    Two zero tensors have residual 0, a zero and a nonzero tensor residual 1.
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na == 0.0 and nb == 0.0:
        return 0.0
    if na == 0.0 or nb == 0.0:
        return 1.0
    overlap = abs(np.vdot(a, b)) ** 2
    return max(0.0, 1.0 - overlap / (na * nb))


def proportional(a: np.ndarray, b: np.ndarray, tol: float | None = None) -> bool:
    """True iff ``a = z b`` for some nonzero complex ``z`` (Cauchy-Schwarz equality test)."""
    if tol is None:
        tol = default_tol()
    return projective_residual(a, b) <= tol


def real_span_dim(mats: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> int:
    """Dimension of the real linear span of complex matrices."""
    if len(mats) == 0:
        return 0
    shape = np.shape(mats[0])
    if any(np.shape(m) != shape for m in mats):
        raise ShapeError("all matrices must share one shape")
    rows = np.array([realify(m) for m in mats])
    return _row_rank(rows, tol)


def realify(m: np.ndarray) -> np.ndarray:
    """Flatten a complex matrix into its real and imaginary coordinates."""
    flat = as_tensor(m).reshape(-1)
    return np.concatenate([flat.real, flat.imag])


def _row_rank(rows: np.ndarray, tol: float) -> int:
    # Gaussian elimination with partial pivoting on row-normalized input.
    a = np.array(rows, dtype=float)
    norms = np.linalg.norm(a, axis=1)
    a = a[norms > tol] / norms[norms > tol, None]
    rank = 0
    n_rows, n_cols = a.shape
    for col in range(n_cols):
        if rank == n_rows:
            break
        pivot = rank + int(np.argmax(np.abs(a[rank:, col])))
        if abs(a[pivot, col]) <= tol:
            continue
        a[[rank, pivot]] = a[[pivot, rank]]
        a[rank + 1 :] -= np.outer(a[rank + 1 :, col] / a[rank, col], a[rank])
        rank += 1
    return rank
