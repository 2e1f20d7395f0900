"""Dense complex tensor primitives: contraction, truncated SVD, Hermitian exp.

Everything downstream (MPS, MPO, circuit evaluation) funnels its linear
algebra through the three operations here.  Arrays are numpy complex128
throughout; we lean on LAPACK via numpy and fall back to the slower but
sturdier gesvd driver when gesdd fails to converge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericError, ShapeError, ValidationError

DEFAULT_CUTOFF = 1e-14


def contract(a: np.ndarray, b: np.ndarray, axes: Sequence[tuple[int, int]]) -> np.ndarray:
    """Contract ``a`` with ``b`` over the given (a_axis, b_axis) pairs.

    Result carries the remaining axes of ``a`` followed by the remaining
    axes of ``b``, in their original order.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if len(axes) == 0:
        return np.tensordot(a, b, axes=0)
    a_axes = [ax for ax, _ in axes]
    b_axes = [bx for _, bx in axes]
    for ax, bx in axes:
        if a.shape[ax] != b.shape[bx]:
            raise ShapeError(
                f"contract: axis {ax} of a (extent {a.shape[ax]}) does not match "
                f"axis {bx} of b (extent {b.shape[bx]})"
            )
    return np.tensordot(a, b, axes=(a_axes, b_axes))


@dataclass
class SvdResult:
    """Truncated SVD ``m ~= u @ diag(s) @ vh``.

    ``truncation_weight`` is the sum of squared discarded singular values.
    """

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray
    truncation_weight: float

    @property
    def rank(self) -> int:
        return len(self.s)


def _robust_svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but reliable
        from scipy.linalg import svd as scipy_svd

        return scipy_svd(m, full_matrices=False, lapack_driver="gesvd")


def svd_truncated(m: np.ndarray, max_rank: int | None = None,
                  cutoff: float = DEFAULT_CUTOFF) -> SvdResult:
    """SVD of a matrix keeping at most ``max_rank`` singular values and
    dropping any below ``cutoff``.  ``max_rank=None`` means no rank cap.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ShapeError(f"svd_truncated expects a matrix, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NumericError("svd_truncated: input contains non-finite entries")
    if max_rank is not None and max_rank < 1:
        raise ValidationError(f"svd_truncated: max_rank must be >= 1, got {max_rank}")

    u, s, vh = _robust_svd(m)
    keep = int(np.sum(s >= cutoff))
    if max_rank is not None:
        keep = min(keep, max_rank)
    keep = max(keep, 1)  # never return an empty factorization
    weight = float(np.sum(s[keep:] ** 2))
    return SvdResult(u[:, :keep], s[:keep].copy(), vh[:keep], weight)


def herm_exp(h: np.ndarray, scale: complex = 1.0) -> np.ndarray:
    """exp(scale * h) for Hermitian ``h`` via eigendecomposition."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ShapeError(f"herm_exp expects a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NumericError("herm_exp: input contains non-finite entries")
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise ValidationError("herm_exp: input is not Hermitian to 1e-10")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)) @ v.conj().T
