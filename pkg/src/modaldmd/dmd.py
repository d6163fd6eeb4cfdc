"""Exact dynamic mode decomposition.

The decomposition fits the best linear propagator ``A`` with
``v1 ~= A @ v0`` without ever forming it: ``v0`` is reduced by a compact
SVD, ``A`` is projected onto the leading left singular vectors, and the
eigenpairs of that small operator are lifted back to exact modes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ZeroEigenvalueError
from .linalg import CompactSvd, EigenPairs, SolveResult, compact_svd, eig_dense, solve_dense
from .snapshots import DataMatrixPair, SnapshotMatrix, build_data_matrices

__all__ = [
    "Truncation",
    "DmdOptions",
    "DmdResult",
    "ModeGroup",
    "truncation_rank",
    "fit",
    "decompose",
    "frequency_of",
    "amplitudes",
    "mode_power",
    "pair_conjugates",
    "reconstruct",
]

PAIR_TOL = 1e-9
ZERO_EIG_EPS = 1e-12


@dataclass(frozen=True)
class Truncation:
    """SVD truncation policy.

    Use the constructors :meth:`none`, :meth:`fixed_rank`,
    :meth:`energy_fraction` and :meth:`sv_threshold`.
    """

    kind: str
    value: float = 0.0

    def __post_init__(self):
        kind, value = self.kind, self.value
        if kind == "none":
            return
        if kind == "fixed_rank":
            if int(value) != value or value < 1:
                raise ValueError(f"fixed rank must be an integer >= 1, got {value}")
        elif kind == "energy_fraction":
            if not 0 < value <= 1:
                raise ValueError(f"energy fraction must lie in (0, 1], got {value}")
        elif kind == "sv_threshold":
            if not value > 0:
                raise ValueError(f"singular value threshold must be positive, got {value}")
        else:
            raise ValueError(f"unknown truncation policy {kind!r}")

    @classmethod
    def none(cls) -> "Truncation":
        return cls("none")

    @classmethod
    def fixed_rank(cls, r: int) -> "Truncation":
        return cls("fixed_rank", r)

    @classmethod
    def energy_fraction(cls, f: float) -> "Truncation":
        return cls("energy_fraction", f)

    @classmethod
    def sv_threshold(cls, eps: float) -> "Truncation":
        return cls("sv_threshold", eps)


@dataclass(frozen=True)
class DmdOptions:
    m_stack: int = 0
    truncation: Truncation = field(default_factory=lambda: Truncation.sv_threshold(1e-10))

    def __post_init__(self):
        if int(self.m_stack) != self.m_stack or self.m_stack < 0:
            raise ValueError(f"m_stack must be a non-negative integer, got {self.m_stack}")


@dataclass(frozen=True)
class DmdResult:
    """Output of :func:`fit`, ordered by descending mode power.

    Attributes
    ----------
    eigenvalues : (r,) complex ndarray
        Per-step multipliers.
    modes : (M, r) complex ndarray
        Unstacked exact modes, unit 2-norm, largest component real-positive.
    frequencies : (r,) ndarray
        Signed frequencies in hertz.
    growth_magnitudes : (r,) ndarray
        ``|eigenvalues|``.
    powers : (r,) ndarray
        Mean magnitude of each row of ``amplitudes``.
    amplitudes : (r, N') complex ndarray
        Mode coefficients for every column of ``v0``; ``modes @ amplitudes``
        approximates the leading ``N'`` snapshots.
    rank_used : int
    dt : float
    singular_values : ndarray
        Full spectrum of ``v0`` before truncation.
    projected : (r,) bool ndarray
        Modes that fell back to the projected form because ``lambda ~= 0``.
    pseudo_solve : bool
        Amplitudes came from the least-squares fallback.
    stacked_modes : complex ndarray or None
        Modes over all stacked rows, scaled like ``modes``; only kept on request.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    frequencies: np.ndarray
    growth_magnitudes: np.ndarray
    powers: np.ndarray
    amplitudes: np.ndarray
    rank_used: int
    dt: float
    singular_values: np.ndarray
    m_stack: int = 0
    projected: Optional[np.ndarray] = None
    pseudo_solve: bool = False
    stacked_modes: Optional[np.ndarray] = None


@dataclass(frozen=True)
class ModeGroup:
    """A real mode or a conjugate pair of modes treated as one oscillation."""

    members: tuple[int, ...]
    representative: int
    frequency: float
    oscillatory: bool
    unpaired: bool = False


# -- small operations ---------------------------------------------------------
def truncation_rank(s: np.ndarray, policy: Truncation) -> int:
    """Number of singular triplets to keep under ``policy`` (always >= 1)."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("singular values must be a non-empty vector")
    if np.any(s <= 0):
        raise ValueError("singular values must be positive")
    if np.any(np.diff(s) > 0):
        raise ValueError("singular values must be sorted in descending order")

    n = s.size
    if policy.kind == "none":
        r = n
    elif policy.kind == "fixed_rank":
        r = min(int(policy.value), n)
    elif policy.kind == "energy_fraction":
        energy = np.cumsum(s**2) / np.sum(s**2)
        r = int(np.searchsorted(energy, policy.value, side="left")) + 1
    else:
        r = int(np.count_nonzero(s >= policy.value * s[0]))
    return max(1, min(r, n))


def frequency_of(lam: complex, dt: float) -> float:
    """Oscillation frequency in hertz of a per-step eigenvalue."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if lam == 0:
        raise ZeroEigenvalueError("frequency undefined for zero eigenvalue")
    return float(np.angle(lam) / (2 * np.pi * dt))


def _amplitudes(svd: CompactSvd, eig: EigenPairs) -> SolveResult:
    rhs = svd.s[:, None] * svd.w.T
    return solve_dense(eig.right_vectors, rhs, strict=False)


def amplitudes(svd: CompactSvd, eig: EigenPairs) -> np.ndarray:
    """Coefficients ``B`` expressing each ``v0`` column in the reduced eigenbasis.

    Solves ``P @ B = diag(s) @ w.T`` with ``P`` the reduced right
    eigenvectors. Emits a ``RuntimeWarning`` when the eigenbasis is too
    ill-conditioned and a least-squares solution was used instead.
    """
    sol = _amplitudes(svd, eig)
    if sol.pseudo:
        warnings.warn(
            "eigenvector basis is (near-)defective; amplitudes use a pseudo-solve",
            RuntimeWarning,
            stacklevel=2,
        )
    return sol.x


def mode_power(b: np.ndarray) -> np.ndarray:
    """Mean coefficient magnitude per mode (row of ``b``)."""
    b = np.asarray(b)
    if b.ndim != 2 or b.shape[1] < 1:
        raise ValueError("amplitude matrix needs at least one column")
    return np.abs(b).mean(axis=1)


def _group_indices(
    eigenvalues: np.ndarray, tol: float
) -> list[tuple[list[int], bool, bool]]:
    """Return ``(members, oscillatory, unpaired)`` per group, in input order."""
    n = len(eigenvalues)
    taken = np.zeros(n, dtype=bool)
    groups = []
    for i in range(n):
        if taken[i]:
            continue
        lam = eigenvalues[i]
        scale = abs(lam)
        taken[i] = True
        if abs(lam.imag) <= tol * scale:
            groups.append(([i], False, False))
            continue
        candidates = [j for j in range(n) if not taken[j]]
        if candidates:
            dist = np.abs(lam - np.conj(eigenvalues[candidates]))
            k = int(np.argmin(dist))
            if dist[k] <= tol * scale:
                j = candidates[k]
                taken[j] = True
                pair = [i, j] if lam.imag > 0 else [j, i]
                groups.append((pair, True, False))
                continue
        groups.append(([i], True, True))
    return groups


def pair_conjugates(result: DmdResult, tol: float = PAIR_TOL) -> list[ModeGroup]:
    """Group each eigenvalue with its complex-conjugate partner.

    Real eigenvalues form singleton groups. A complex eigenvalue without a
    partner inside ``tol`` (relative) is returned as a flagged singleton and
    a ``RuntimeWarning`` is emitted.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    out = []
    unpaired = 0
    for members, oscillatory, lonely in _group_indices(result.eigenvalues, tol):
        rep = members[0]
        freq = float(np.angle(result.eigenvalues[rep]) / (2 * np.pi * result.dt))
        if lonely:
            unpaired += 1
            freq = abs(freq)
        out.append(ModeGroup(tuple(members), rep, freq, oscillatory, lonely))
    if unpaired:
        warnings.warn(
            f"{unpaired} complex eigenvalue(s) without a conjugate partner",
            RuntimeWarning,
            stacklevel=2,
        )
    return out


# -- fitting ------------------------------------------------------------------
def fit(
    pair: DataMatrixPair,
    opts: DmdOptions | None = None,
    dt: float = 1.0,
    keep_stacked: bool = False,
) -> DmdResult:
    """Exact DMD of a shifted data-matrix pair.

    Parameters
    ----------
    pair : DataMatrixPair
        Output of :func:`~modaldmd.snapshots.build_data_matrices`.
    opts : DmdOptions, optional
        Truncation policy; ``opts.m_stack`` is ignored here because the pair
        already carries its stacking level.
    dt : float
        Sampling interval used to convert eigenvalues to hertz.
    keep_stacked : bool
        Also return the modes over all stacked rows.
    """
    opts = opts or DmdOptions()
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    v0, v1 = pair.v0, pair.v1

    full = compact_svd(v0)
    r = truncation_rank(full.s, opts.truncation)
    svd = full.truncate(r)
    u, s, w = svd.u, svd.s, svd.w

    v1_ws = v1 @ (w / s)
    a_tilde = u.T @ v1_ws
    eig = eig_dense(a_tilde)
    lam, p = eig.values, eig.right_vectors

    lifted = v1_ws @ p
    projected = np.abs(lam) < ZERO_EIG_EPS * np.max(np.abs(lam))
    stacked = np.empty_like(lifted)
    ok = ~projected
    stacked[:, ok] = lifted[:, ok] / lam[ok]
    if projected.any():
        stacked[:, projected] = u @ p[:, projected]

    sol = _amplitudes(svd, eig)
    b = sol.x
    if sol.pseudo:
        warnings.warn(
            "eigenvector basis is (near-)defective; amplitudes use a pseudo-solve",
            RuntimeWarning,
            stacklevel=2,
        )

    # unit-normalize the leading block, rotate its largest entry onto the
    # positive real axis, and push the scale into the amplitudes
    base = stacked[: pair.base_m]
    norms = np.linalg.norm(base, axis=0)
    peak = np.argmax(np.abs(base), axis=0)
    peak_val = base[peak, np.arange(r)]
    peak_abs = np.abs(peak_val)
    unit = np.where(peak_abs > 0, peak_val / np.where(peak_abs > 0, peak_abs, 1.0), 1.0)
    scale = np.where(norms > 0, norms, 1.0) * unit
    stacked = stacked / scale
    b = b * scale[:, None]

    # real data: make conjugate partners exact conjugates of the representative
    groups = _group_indices(lam, PAIR_TOL)
    for members, oscillatory, lonely in groups:
        if len(members) == 2:
            i, j = members
            lam[j] = np.conj(lam[i])
            stacked[:, j] = np.conj(stacked[:, i])
            b[j] = np.conj(b[i])

    powers = mode_power(b)
    freqs = np.angle(lam) / (2 * np.pi * dt)
    groups.sort(
        key=lambda g: (-powers[g[0][0]], abs(freqs[g[0][0]]), g[0][0])
    )
    order = np.array([i for members, _, _ in groups for i in members], dtype=int)

    stacked = stacked[:, order]
    modes = np.ascontiguousarray(stacked[: pair.base_m])
    return DmdResult(
        eigenvalues=lam[order],
        modes=modes,
        frequencies=freqs[order],
        growth_magnitudes=np.abs(lam[order]),
        powers=powers[order],
        amplitudes=b[order],
        rank_used=r,
        dt=float(dt),
        singular_values=full.s,
        m_stack=pair.m_stack,
        projected=projected[order],
        pseudo_solve=sol.pseudo,
        stacked_modes=stacked if keep_stacked else None,
    )


def decompose(
    s: SnapshotMatrix, opts: DmdOptions | None = None, keep_stacked: bool = False
) -> DmdResult:
    """Build the data matrices for ``s`` and run :func:`fit`."""
    opts = opts or DmdOptions()
    pair = build_data_matrices(s, opts.m_stack)
    return fit(pair, opts, dt=s.dt, keep_stacked=keep_stacked)


def reconstruct(
    result: DmdResult,
    stacked_modes: np.ndarray | None = None,
    b: np.ndarray | None = None,
) -> np.ndarray:
    """Real part of ``modes @ amplitudes``.

    Defaults to the result's own (unstacked) modes and amplitudes, which
    reproduces the leading ``N'`` snapshots. Pass ``result.stacked_modes``
    to reconstruct the full stacked ``v0``.
    """
    phi = result.modes if stacked_modes is None else stacked_modes
    coeffs = result.amplitudes if b is None else b
    if phi.shape[1] != coeffs.shape[0]:
        raise ValueError(f"mode/amplitude shape mismatch: {phi.shape} vs {coeffs.shape}")
    return (phi @ coeffs).real
