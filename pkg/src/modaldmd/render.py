"""Binary PGM (P5) output for scalar fields."""

from __future__ import annotations

import os

import numpy as np

__all__ = ["to_gray", "pgm_bytes", "write_pgm"]


def to_gray(field: np.ndarray) -> np.ndarray:
    """Map ``|field|`` linearly onto 0..255 with the largest magnitude at 255."""
    mag = np.abs(np.asarray(field, dtype=np.float64))
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    return np.rint(mag * (255.0 / peak)).astype(np.uint8)


def pgm_bytes(field: np.ndarray) -> bytes:
    """Encode a 2-D field; row ``i`` of the array is raster line ``i``."""
    gray = to_gray(field)
    if gray.ndim != 2:
        raise ValueError(f"expected a 2-D field, got shape {gray.shape}")
    height, width = gray.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + gray.tobytes()


def write_pgm(field: np.ndarray, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(field))
