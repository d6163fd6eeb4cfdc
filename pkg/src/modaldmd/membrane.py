"""Damped 2-D wave equation on a masked finite-difference grid.

Solves ``h_tt = c^2 lap(h) - gamma h_t`` with ``h = 0`` on every node outside
the mask. Time stepping is the explicit central-difference scheme with the
damping term averaged over ``t - dt`` and ``t + dt``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np

from . import _kernels
from .errors import BlowUpError, ConfigError
from .snapshots import SnapshotMatrix

__all__ = [
    "CFL_SAFETY",
    "GridDomain",
    "WaveConfig",
    "TimeGrid",
    "parse_mask",
    "load_mask",
    "gaussian_ic",
    "step",
    "trajectory",
    "simulate",
    "height_sum",
    "discrete_energy",
]

CFL_SAFETY = 0.5
BLOWUP_FACTOR = 1e6


@dataclass(frozen=True, eq=False)
class GridDomain:
    """Uniform grid with node ``(i, j)`` at ``(i*h, j*h)``.

    ``mask[i, j]`` is True on interior (solved) nodes. The outermost ring
    must be False so that every interior node has four in-bounds neighbours.
    """

    nx: int
    ny: int
    h: float
    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool)
        if mask.shape != (self.nx, self.ny):
            raise ConfigError(f"mask shape {mask.shape} != grid ({self.nx}, {self.ny})")
        if self.nx < 3 or self.ny < 3:
            raise ConfigError("grid needs at least 3 points per axis")
        if not self.h > 0:
            raise ConfigError(f"grid spacing must be positive, got {self.h}")
        if mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any():
            raise ConfigError("interior nodes must not touch the grid edge")
        if not mask.any():
            raise ConfigError("domain has no interior nodes")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def square(cls, n: int = 41) -> "GridDomain":
        """Unit square sampled by ``n x n`` nodes, boundary ring pinned."""
        if n < 3:
            raise ConfigError(f"grid must have at least 3 points, got {n}")
        mask = np.zeros((n, n), dtype=bool)
        mask[1:-1, 1:-1] = True
        return cls(n, n, 1.0 / (n - 1), mask)

    @property
    def n_interior(self) -> int:
        return int(self.mask.sum())

    @property
    def is_full_square(self) -> bool:
        if self.nx != self.ny:
            return False
        ref = np.zeros_like(self.mask)
        ref[1:-1, 1:-1] = True
        return bool(np.array_equal(ref, self.mask))

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as two ``(nx, ny)`` arrays."""
        x = np.arange(self.nx) * self.h
        y = np.arange(self.ny) * self.h
        return np.meshgrid(x, y, indexing="ij")

    def flatten(self, field: np.ndarray) -> np.ndarray:
        """Interior values in row-major mask order (the snapshot ordering)."""
        return np.asarray(field)[self.mask]

    def unflatten(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[0] != self.n_interior:
            raise ConfigError(
                f"field length {values.shape[0]} does not match {self.n_interior} interior nodes"
            )
        out = np.zeros((self.nx, self.ny), dtype=values.dtype)
        out[self.mask] = values
        return out


def parse_mask(text: str, h: Optional[float] = None) -> GridDomain:
    """Build a domain from ASCII art: '#' interior, '.' exterior.

    Line ``i`` is grid row ``i`` and character ``j`` its column. Without an
    explicit spacing the longer axis spans the unit interval.
    """
    lines = [ln.rstrip("\r") for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ConfigError("mask file is empty")
    width = len(lines[0])
    for k, ln in enumerate(lines):
        if len(ln) != width:
            raise ConfigError(f"mask line {k + 1} has length {len(ln)}, expected {width}")
        bad = set(ln) - {"#", "."}
        if bad:
            raise ConfigError(f"mask line {k + 1} contains invalid characters {sorted(bad)}")
    mask = np.array([[ch == "#" for ch in ln] for ln in lines], dtype=bool)
    nx, ny = mask.shape
    if h is None:
        h = 1.0 / (max(nx, ny) - 1)
    return GridDomain(nx, ny, h, mask)


def load_mask(path: str | os.PathLike, h: Optional[float] = None) -> GridDomain:
    with open(path, encoding="ascii") as fh:
        return parse_mask(fh.read(), h)


@dataclass(frozen=True)
class TimeGrid:
    dt_sim: float
    substeps: int
    sample_dt: float


@dataclass(frozen=True)
class WaveConfig:
    """Physical and numerical parameters of one membrane run.

    ``dt_sim`` defaults to the largest step that divides the sampling
    interval and respects the CFL bound.
    """

    c: float = 1.0
    gamma: float = 0.0
    ic_center: tuple[float, float] = (0.3, 0.4)
    ic_sigma: float = 0.1
    ic_amplitude: float = 1.0
    t_end: float = 10.0
    n_samples: int = 1000
    dt_sim: Optional[float] = None

    def __post_init__(self):
        if not self.c > 0:
            raise ConfigError(f"c must be positive, got {self.c}")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}")
        if not self.ic_sigma > 0:
            raise ConfigError(f"sigma must be positive, got {self.ic_sigma}")
        if not math.isfinite(self.ic_amplitude):
            raise ConfigError("amplitude must be finite")
        if int(self.n_samples) != self.n_samples or self.n_samples < 2:
            raise ConfigError(f"samples must be an integer >= 2, got {self.n_samples}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive (sampling interval would be {self.t_end})")
        if self.dt_sim is not None and not self.dt_sim > 0:
            raise ConfigError(f"dt_sim must be positive, got {self.dt_sim}")

    @property
    def sample_dt(self) -> float:
        return self.t_end / (self.n_samples - 1)

    def time_grid(self, d: GridDomain) -> TimeGrid:
        """Solver step and steps per sample for domain ``d``."""
        sample_dt = self.sample_dt
        dt_max = CFL_SAFETY * d.h / (self.c * math.sqrt(2.0))
        if self.dt_sim is None:
            substeps = max(1, math.ceil(sample_dt / dt_max * (1 - 1e-12)))
            return TimeGrid(sample_dt / substeps, substeps, sample_dt)
        if self.dt_sim > dt_max * (1 + 1e-12):
            raise ConfigError(f"dt_sim={self.dt_sim} violates the CFL limit {dt_max}")
        ratio = sample_dt / self.dt_sim
        substeps = round(ratio)
        if substeps < 1 or abs(ratio - substeps) > 1e-9 * ratio:
            raise ConfigError(
                f"sampling interval {sample_dt} is not an integer multiple of dt_sim={self.dt_sim}"
            )
        return TimeGrid(self.dt_sim, substeps, sample_dt)


def gaussian_ic(d: GridDomain, cfg: WaveConfig) -> np.ndarray:
    """Gaussian bump on interior nodes, zero elsewhere."""
    cx, cy = cfg.ic_center
    if not (0 <= cx <= (d.nx - 1) * d.h and 0 <= cy <= (d.ny - 1) * d.h):
        raise ConfigError(f"initial-condition center {cfg.ic_center} lies outside the domain")
    x, y = d.coordinates()
    r2 = (x - cx) ** 2 + (y - cy) ** 2
    f = cfg.ic_amplitude * np.exp(-r2 / (2.0 * cfg.ic_sigma**2))
    return np.where(d.mask, f, 0.0)


def _stencil_sum(f: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """``h^2 * lap(f)`` on interior nodes, zero elsewhere."""
    out = np.zeros_like(f)
    sx = f[2:, 1:-1] + f[:-2, 1:-1]
    sy = f[1:-1, 2:] + f[1:-1, :-2]
    out[1:-1, 1:-1] = (sx + sy) - 4.0 * f[1:-1, 1:-1]
    out[~mask] = 0.0
    return out


def _coefficients(d: GridDomain, cfg: WaveConfig, dt: float) -> tuple[float, float]:
    return (cfg.c * dt / d.h) ** 2, 0.5 * cfg.gamma * dt


def step(
    state: tuple[np.ndarray, np.ndarray],
    d: GridDomain,
    cfg: WaveConfig,
    n_steps: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance ``(field, prev_field)`` by ``n_steps`` solver steps."""
    dt = cfg.time_grid(d).dt_sim
    coef, damp = _coefficients(d, cfg, dt)
    h, h_prev = state
    return _kernels.advance(
        np.ascontiguousarray(h, dtype=np.float64),
        np.ascontiguousarray(h_prev, dtype=np.float64),
        d.mask,
        coef,
        damp,
        int(n_steps),
    )


def trajectory(
    d: GridDomain, cfg: WaveConfig, initial: Optional[np.ndarray] = None
) -> Iterator[tuple[float, np.ndarray, np.ndarray]]:
    """Yield ``(t, field, prev_field)`` at every sample time.

    The state starts from rest in ``initial`` (default: the Gaussian bump
    of ``cfg``); the fictitious step before ``t = 0`` is the second-order
    Taylor value ``h0 + (c dt)^2 lap(h0) / 2``.
    """
    tg = cfg.time_grid(d)
    coef, damp = _coefficients(d, cfg, tg.dt_sim)
    if initial is None:
        h = gaussian_ic(d, cfg)
    else:
        h = np.where(d.mask, np.asarray(initial, dtype=np.float64), 0.0)
    h_prev = h + 0.5 * coef * _stencil_sum(h, d.mask)
    limit = BLOWUP_FACTOR * (abs(cfg.ic_amplitude) if initial is None else float(np.max(np.abs(h))))
    yield 0.0, h, h_prev
    for k in range(1, cfg.n_samples):
        h, h_prev = _kernels.advance(h, h_prev, d.mask, coef, damp, tg.substeps)
        if np.max(np.abs(h)) > limit or not np.isfinite(h).all():
            raise BlowUpError(f"CFL violation or blow-up at t={k * tg.sample_dt:g}")
        yield k * tg.sample_dt, h, h_prev


def simulate(
    d: GridDomain, cfg: WaveConfig, initial: Optional[np.ndarray] = None
) -> SnapshotMatrix:
    """Run a membrane simulation and collect interior snapshots.

    Column ``k`` holds the interior values (mask order) at ``t = k * dt``
    with ``dt = t_end / (n_samples - 1)``.
    """
    cols = np.empty((d.n_interior, cfg.n_samples))
    for k, (_, h, _) in enumerate(trajectory(d, cfg, initial)):
        cols[:, k] = h[d.mask]
    return SnapshotMatrix(cols, cfg.sample_dt)


def height_sum(field: np.ndarray) -> float:
    """Sum of heights; exterior nodes are zero so full grids and interior vectors agree."""
    return float(np.sum(field))


def discrete_energy(
    h: np.ndarray, h_prev: np.ndarray, d: GridDomain, c: float, dt: float
) -> float:
    """Energy of the leapfrog state between ``t - dt`` and ``t``.

    Kinetic part uses the backward difference; the elastic part pairs the
    edge gradients of both time levels, which makes the sum an exact
    invariant of the undamped scheme (and non-increasing with damping).
    """
    vel = (h - h_prev) / dt
    gx = np.diff(h, axis=0) * np.diff(h_prev, axis=0)
    gy = np.diff(h, axis=1) * np.diff(h_prev, axis=1)
    area = d.h * d.h
    return 0.5 * area * float(np.sum(vel * vel)) + 0.5 * c * c * float(np.sum(gx) + np.sum(gy))
