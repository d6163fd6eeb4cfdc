"""Time-stepping kernels for the damped wave equation.

Two interchangeable implementations of :func:`advance` exist: a numba
``@njit`` loop and a vectorized numpy version. The numba path is used
when numba imports and ``MODALDMD_DISABLE_NUMBA`` is unset (or "0").
Both evaluate the stencil in the same order, so they agree to rounding.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["BACKEND", "advance", "advance_numpy", "advance_numba", "HAVE_NUMBA"]

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None


def _disabled() -> bool:
    return os.environ.get("MODALDMD_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


def advance_numpy(h, h_prev, mask, coef, damp, n_steps):
    """Advance ``n_steps`` explicit steps; returns the new ``(h, h_prev)``.

    ``coef = (c*dt/spacing)**2`` and ``damp = gamma*dt/2``. Inputs are not
    modified.
    """
    h = h.copy()
    h_prev = h_prev.copy()
    inv = 1.0 / (1.0 + damp)
    keep = 1.0 - damp
    inner = mask[1:-1, 1:-1]
    for _ in range(n_steps):
        sx = h[2:, 1:-1] + h[:-2, 1:-1]
        sy = h[1:-1, 2:] + h[1:-1, :-2]
        c0 = h[1:-1, 1:-1]
        upd = (2.0 * c0 - keep * h_prev[1:-1, 1:-1] + coef * ((sx + sy) - 4.0 * c0)) * inv
        h_prev, h = h, h_prev
        h[1:-1, 1:-1] = np.where(inner, upd, 0.0)
    return h, h_prev


def _advance_loops(h, h_prev, mask, coef, damp, n_steps):
    nx, ny = h.shape
    cur = h.copy()
    old = h_prev.copy()
    inv = 1.0 / (1.0 + damp)
    keep = 1.0 - damp
    for _ in range(n_steps):
        for i in range(1, nx - 1):
            for j in range(1, ny - 1):
                if mask[i, j]:
                    c0 = cur[i, j]
                    sx = cur[i + 1, j] + cur[i - 1, j]
                    sy = cur[i, j + 1] + cur[i, j - 1]
                    # old[i, j] is read before being overwritten with h_next
                    old[i, j] = (2.0 * c0 - keep * old[i, j] + coef * ((sx + sy) - 4.0 * c0)) * inv
                else:
                    old[i, j] = 0.0
        cur, old = old, cur
    return cur, old


if HAVE_NUMBA:
    advance_numba = numba.njit(cache=True, nogil=True)(_advance_loops)
else:  # pragma: no cover
    advance_numba = None

if HAVE_NUMBA and not _disabled():
    BACKEND = "numba"
    advance = advance_numba
else:
    BACKEND = "numpy"
    advance = advance_numpy
