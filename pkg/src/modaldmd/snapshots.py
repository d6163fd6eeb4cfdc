"""Snapshot data model, the DMDS1 binary format and shifted data matrices.

A DMDS1 file is little-endian throughout::

    bytes 0-7    ASCII magic b"DMDSNAP1"
    bytes 8-11   u32 M   (values per snapshot)
    bytes 12-15  u32 N   (number of snapshots)
    bytes 16-23  f64 dt  (seconds per sample)
    bytes 24-    N*M f64 values, snapshot-contiguous
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadMagicError,
    InsufficientSnapshotsError,
    InvalidSnapshotError,
    LengthMismatchError,
    NonFiniteError,
    SizeOverflowError,
    TruncatedPayloadError,
)

__all__ = [
    "MAGIC",
    "HEADER_SIZE",
    "SnapshotMatrix",
    "DataMatrixPair",
    "load_snapshots",
    "save_snapshots",
    "load_field",
    "save_field",
    "load_csv",
    "build_data_matrices",
    "unstack_vector",
]

MAGIC = b"DMDSNAP1"
_HEADER = struct.Struct("<8sIId")
HEADER_SIZE = _HEADER.size  # 24
_U32_MAX = 2**32 - 1
_MAX_VALUES = (2**63 - 1) // 8


@dataclass(frozen=True)
class SnapshotMatrix:
    """Time series of flattened field snapshots.

    Parameters
    ----------
    data : (M, N) ndarray
        Column ``j`` is the snapshot taken at ``t = j * dt``. Every column
        uses the same spatial ordering.
    dt : float
        Uniform sampling interval in seconds.
    """

    data: np.ndarray
    dt: float

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, order="F")
        if data.ndim != 2:
            raise InvalidSnapshotError(f"snapshot data must be 2-D, got {data.ndim}-D")
        m, n = data.shape
        if m < 1:
            raise InvalidSnapshotError("snapshots need at least one value (M >= 1)")
        if n < 2:
            raise InvalidSnapshotError(f"need at least two snapshots (N >= 2), got {n}")
        if not np.isfinite(data).all():
            raise InvalidSnapshotError("snapshot data contains non-finite values")
        dt = float(self.dt)
        if not (np.isfinite(dt) and dt > 0):
            raise InvalidSnapshotError(f"dt must be positive, got {self.dt!r}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dt", dt)

    @property
    def n_points(self) -> int:
        return self.data.shape[0]

    @property
    def n_snapshots(self) -> int:
        return self.data.shape[1]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_snapshots) * self.dt


@dataclass(frozen=True)
class DataMatrixPair:
    """Left/right shifted (optionally time-delay stacked) data matrices.

    ``v1[:, k]`` is exactly column ``k + 1`` of the stacked matrix while
    ``v0[:, k]`` is column ``k``.
    """

    v0: np.ndarray
    v1: np.ndarray
    m_stack: int
    base_m: int

    @property
    def n_columns(self) -> int:
        return self.v0.shape[1]


# -- binary I/O ---------------------------------------------------------------
def _encode(data: np.ndarray, dt: float) -> bytes:
    m, n = data.shape
    if m > _U32_MAX or n > _U32_MAX:
        raise SizeOverflowError(f"dimensions {m}x{n} do not fit the u32 header fields")
    header = _HEADER.pack(MAGIC, m, n, float(dt))
    return header + np.asarray(data, dtype="<f8").tobytes(order="F")


def _decode(raw: bytes) -> tuple[np.ndarray, float]:
    if len(raw) < HEADER_SIZE:
        if not MAGIC.startswith(raw[:8]):
            raise BadMagicError("bad magic: not a DMDS1 snapshot file")
        raise TruncatedPayloadError("truncated header")
    magic, m, n, dt = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}, expected {MAGIC!r}")
    count = m * n
    if count > _MAX_VALUES:
        raise SizeOverflowError(f"M*N = {count} overflows the addressable payload")
    expected = HEADER_SIZE + 8 * count
    if len(raw) < expected:
        raise TruncatedPayloadError(
            f"truncated payload: expected {expected} bytes, found {len(raw)}"
        )
    if len(raw) > expected:
        raise SizeOverflowError(
            f"trailing data: expected {expected} bytes, found {len(raw)}"
        )
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=HEADER_SIZE)
    if not np.isfinite(values).all():
        raise NonFiniteError("payload contains non-finite values")
    if not np.isfinite(dt):
        raise NonFiniteError("header dt is not finite")
    data = values.astype(np.float64).reshape((m, n), order="F")
    return data, dt


def save_snapshots(s: SnapshotMatrix, path: str | os.PathLike) -> None:
    """Write ``s`` to ``path`` in DMDS1 format (raises ``OSError`` on I/O failure)."""
    with open(path, "wb") as fh:
        fh.write(_encode(s.data, s.dt))


def load_snapshots(path: str | os.PathLike) -> SnapshotMatrix:
    """Read a DMDS1 file holding at least two snapshots."""
    with open(path, "rb") as fh:
        raw = fh.read()
    data, dt = _decode(raw)
    return SnapshotMatrix(data, dt)


def save_field(values: np.ndarray, path: str | os.PathLike, dt: float = 1.0) -> None:
    """Write a single real field as a one-column DMDS1 file."""
    values = np.asarray(values, dtype=np.float64).reshape(-1, 1)
    if not np.isfinite(values).all():
        raise InvalidSnapshotError("field contains non-finite values")
    with open(path, "wb") as fh:
        fh.write(_encode(values, dt))


def load_field(path: str | os.PathLike, column: int = 0) -> tuple[np.ndarray, float]:
    """Read one column of any DMDS1 file (including one-column field files)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    data, dt = _decode(raw)
    if not 0 <= column < data.shape[1]:
        raise LengthMismatchError(
            f"column {column} out of range for file with {data.shape[1]} columns"
        )
    return data[:, column].copy(), dt


def load_csv(path: str | os.PathLike, dt: float) -> SnapshotMatrix:
    """Read plain CSV with one snapshot per row."""
    rows = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return SnapshotMatrix(rows.T, dt)


# -- data matrices ------------------------------------------------------------
def build_data_matrices(s: SnapshotMatrix, m_stack: int = 0) -> DataMatrixPair:
    """Arrange snapshots into the shifted pair used by DMD.

    With ``m_stack = m`` the stacked matrix has ``m + 1`` block rows; block
    row ``b`` of column ``k`` holds snapshot ``k + b``. ``v0`` takes the
    first ``N - m - 1`` columns of the stacked matrix, ``v1`` the last
    ``N - m - 1``.
    """
    m_stack = int(m_stack)
    if m_stack < 0:
        raise InsufficientSnapshotsError(f"m_stack must be non-negative, got {m_stack}")
    base_m, n = s.data.shape
    n_cols = n - m_stack  # columns of the stacked matrix
    if n_cols - 1 < 1:
        raise InsufficientSnapshotsError(
            f"insufficient snapshots for stacking: N={n}, m_stack={m_stack}"
        )
    stacked = np.empty(((m_stack + 1) * base_m, n_cols))
    for b in range(m_stack + 1):
        stacked[b * base_m : (b + 1) * base_m] = s.data[:, b : b + n_cols]
    return DataMatrixPair(
        v0=stacked[:, :-1], v1=stacked[:, 1:], m_stack=m_stack, base_m=base_m
    )


def unstack_vector(v: np.ndarray, base_m: int) -> np.ndarray:
    """Return the leading ``base_m`` entries of a stacked mode vector."""
    v = np.asarray(v)
    if base_m < 1 or v.shape[0] % base_m != 0:
        raise LengthMismatchError(
            f"length {v.shape[0]} is not a whole number of blocks of {base_m}"
        )
    return v[:base_m]
