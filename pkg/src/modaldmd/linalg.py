"""Dense kernels used by DMD: compact SVD, small eigenproblems, small solves.

All three are thin contracts over LAPACK (through numpy/scipy) with the
rank, ordering and conditioning rules DMD relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

from .errors import EigenSolverError, SingularSystemError, ZeroMatrixError

__all__ = [
    "RANK_EPS",
    "COND_LIMIT",
    "CompactSvd",
    "EigenPairs",
    "SolveResult",
    "compact_svd",
    "eig_dense",
    "solve_dense",
]

RANK_EPS = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True)
class CompactSvd:
    """``a = u @ diag(s) @ w.T`` with only the numerically nonzero triplets."""

    u: np.ndarray
    s: np.ndarray
    w: np.ndarray

    @property
    def rank(self) -> int:
        return self.s.shape[0]

    def truncate(self, r: int) -> "CompactSvd":
        return CompactSvd(self.u[:, :r], self.s[:r], self.w[:, :r])


@dataclass(frozen=True)
class EigenPairs:
    values: np.ndarray
    right_vectors: np.ndarray


class SolveResult(NamedTuple):
    x: np.ndarray
    pseudo: bool  # True when the least-squares fallback was used


def compact_svd(a: np.ndarray, rank_eps: float = RANK_EPS) -> CompactSvd:
    """Economy SVD of ``a`` with singular values below ``rank_eps * s[0]`` dropped.

    Raises
    ------
    ZeroMatrixError
        If ``a`` has no nonzero entry.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise ValueError("compact_svd expects a non-empty 2-D array")
    if not np.any(a):
        raise ZeroMatrixError("zero matrix has no compact SVD")
    try:
        u, s, vt = sla.svd(a, full_matrices=False, check_finite=True)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails where the slower QR-iteration driver succeeds
        u, s, vt = sla.svd(a, full_matrices=False, lapack_driver="gesvd")
    keep = int(np.count_nonzero(s > rank_eps * s[0]))
    return CompactSvd(u[:, :keep], s[:keep], vt[:keep].T)


def _conjugate_blocks(values: np.ndarray) -> list[list[int]]:
    """Split LAPACK's eigenvalue list into real singletons and conjugate pairs.

    For real input ``geev`` emits each complex pair as adjacent entries,
    positive imaginary part first.
    """
    blocks = []
    i = 0
    n = len(values)
    while i < n:
        if values[i].imag != 0 and i + 1 < n and values[i + 1] == np.conj(values[i]):
            blocks.append([i, i + 1])
            i += 2
        else:
            blocks.append([i])
            i += 1
    return blocks


def eig_dense(a: np.ndarray) -> EigenPairs:
    """Eigenvalues and unit-norm right eigenvectors of a small real matrix.

    Eigenvalues are ordered by descending magnitude; a complex conjugate
    pair stays adjacent with the positive imaginary part first.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"eig_dense expects a square matrix, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValueError("eig_dense input contains non-finite values")
    try:
        values, vectors = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError("eigensolver failed to converge") from exc
    values = values.astype(np.complex128)
    vectors = vectors.astype(np.complex128)

    blocks = _conjugate_blocks(values)
    # descending |lambda|; ties broken towards larger real part for determinism
    blocks.sort(key=lambda b: (-abs(values[b[0]]), -values[b[0]].real))
    order = [i for b in blocks for i in b]
    values = values[order]
    vectors = vectors[:, order]
    vectors /= np.linalg.norm(vectors, axis=0)
    return EigenPairs(values, vectors)


def solve_dense(
    a: np.ndarray, b: np.ndarray, cond_limit: float = COND_LIMIT, strict: bool = True
) -> SolveResult:
    """Solve ``a @ x = b`` for small square complex ``a``.

    Falls back to a least-squares pseudo-solution when the condition number
    exceeds ``cond_limit``. With ``strict`` an exactly singular system whose
    right-hand side is outside the range of ``a`` raises
    :class:`SingularSystemError`; otherwise the pseudo-solution is returned.
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"solve_dense expects a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"row mismatch: a is {a.shape}, b is {b.shape}")

    sv = np.linalg.svd(a, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    if cond <= cond_limit:
        return SolveResult(sla.solve(a, b, check_finite=False), False)

    x, *_ = np.linalg.lstsq(a, b, rcond=None)
    if strict and sv[-1] <= sv[0] * np.finfo(float).eps * max(a.shape):
        resid = np.linalg.norm(a @ x - b)
        scale = sv[0] * np.linalg.norm(x) + np.linalg.norm(b)
        if resid > 1e-8 * scale:
            raise SingularSystemError("singular system")
    return SolveResult(x, True)
