"""Closed-form square-membrane modes and matching of DMD output against them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import subspace_angles

from .dmd import DmdResult, ModeGroup
from .errors import ConfigError
from .membrane import GridDomain

__all__ = [
    "AnalyticLevel",
    "MatchRow",
    "MatchReport",
    "analytic_frequency",
    "analytic_mode_field",
    "frequency_table",
    "group_basis",
    "match_modes",
]

MATCH_WINDOW = 0.05
SPAN_TOL = 0.05


def analytic_frequency(m: int, n: int, c: float = 1.0) -> float:
    """Eigenfrequency in hertz of the ``(m, n)`` mode of the unit square."""
    if m < 1 or n < 1:
        raise ValueError(f"quantization indices must be >= 1, got ({m}, {n})")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    return 0.5 * c * math.sqrt(m * m + n * n)


def analytic_mode_field(m: int, n: int, d: GridDomain) -> np.ndarray:
    """``sin(m pi x) sin(n pi y)`` sampled on ``d`` and scaled to unit 2-norm."""
    if not d.is_full_square:
        raise ConfigError("analytic modes exist only for the full square domain")
    x, y = d.coordinates()
    f = np.sin(m * np.pi * x) * np.sin(n * np.pi * y)
    f[~d.mask] = 0.0
    return f / np.linalg.norm(f)


@dataclass(frozen=True)
class AnalyticLevel:
    """All ``(m, n)`` sharing ``m^2 + n^2``, hence one frequency."""

    frequency: float
    indices: tuple[tuple[int, int], ...]

    @property
    def multiplicity(self) -> int:
        return len(self.indices)


def frequency_table(c: float, max_freq: float) -> list[AnalyticLevel]:
    """Analytic levels with frequency ``<= max_freq``, ascending."""
    kmax = int(math.floor(2 * max_freq / c)) + 1
    levels: dict[int, list[tuple[int, int]]] = {}
    for m in range(1, kmax + 1):
        for n in range(1, kmax + 1):
            if analytic_frequency(m, n, c) <= max_freq:
                levels.setdefault(m * m + n * n, []).append((m, n))
    return [
        AnalyticLevel(0.5 * c * math.sqrt(q), tuple(levels[q])) for q in sorted(levels)
    ]


def group_basis(result: DmdResult, group: ModeGroup, span_tol: float = SPAN_TOL) -> np.ndarray:
    """Orthonormal real basis spanned by a group's mode real and imaginary parts.

    Directions weaker than ``span_tol`` times the strongest are dropped, so a
    standing-wave mode (real up to rounding) yields a single vector.
    """
    phi = result.modes[:, group.representative]
    parts = np.column_stack([phi.real, phi.imag])
    u, s, _ = np.linalg.svd(parts, full_matrices=False)
    keep = s > span_tol * s[0]
    return u[:, keep]


@dataclass(frozen=True)
class MatchRow:
    status: str  # "matched", "spurious" or "undetected"
    m: Optional[int] = None
    n: Optional[int] = None
    nu_analytic: Optional[float] = None
    nu_dmd: Optional[float] = None
    rel_err: Optional[float] = None
    principal_angle_deg: Optional[float] = None
    power: Optional[float] = None
    group: Optional[int] = None  # index into the groups passed to match_modes
    ambiguous: bool = False


@dataclass
class MatchReport:
    rows: list[MatchRow] = field(default_factory=list)
    # largest principal angle (degrees) between the combined span of all
    # groups matched to a level and the level's analytic subspace
    level_angles: dict[float, np.ndarray] = field(default_factory=dict)
    level_groups: dict[float, list[int]] = field(default_factory=dict)

    @property
    def matched(self) -> list[MatchRow]:
        return [r for r in self.rows if r.status == "matched"]

    @property
    def spurious(self) -> list[MatchRow]:
        return [r for r in self.rows if r.status == "spurious"]

    @property
    def undetected(self) -> list[MatchRow]:
        return [r for r in self.rows if r.status == "undetected"]


def _max_angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape[1] == 0 or b.shape[1] == 0:
        return 90.0
    return float(np.degrees(np.max(subspace_angles(a, b))))


def match_modes(
    result: DmdResult,
    groups: Sequence[ModeGroup],
    c: float,
    max_freq: float,
    d: GridDomain,
    window: float = MATCH_WINDOW,
    span_tol: float = SPAN_TOL,
) -> MatchReport:
    """Score oscillatory DMD groups against the analytic square-membrane spectrum.

    Groups are visited in the given order (strongest first for a fitted
    result). Each takes the nearest analytic level within ``window``
    relative error that still has unused degenerate slots; anything else is
    reported as spurious. Analytic modes left without a partner are
    reported as undetected.
    """
    levels = frequency_table(c, max_freq)
    fields = {
        idx: d.flatten(analytic_mode_field(idx[0], idx[1], d))
        for lvl in levels
        for idx in lvl.indices
    }
    free = {lvl.frequency: list(lvl.indices) for lvl in levels}
    freqs = np.array([lvl.frequency for lvl in levels])

    report = MatchReport()
    level_bases: dict[float, list[np.ndarray]] = {}
    for gi, g in enumerate(groups):
        if not g.oscillatory:
            continue
        nu = abs(g.frequency)
        power = float(result.powers[g.representative])
        basis = group_basis(result, g, span_tol)
        chosen = None
        ambiguous = False
        if len(freqs):
            rel = np.abs(nu - freqs) / freqs
            ambiguous = int(np.count_nonzero(rel <= window)) > 1
            for k in np.argsort(rel, kind="stable"):
                if rel[k] > window:
                    break
                if free[freqs[k]]:
                    chosen = levels[k]
                    break
        if chosen is None:
            report.rows.append(
                MatchRow("spurious", nu_dmd=nu, power=power, group=gi, ambiguous=ambiguous)
            )
            continue
        # assign the degenerate index best represented in this group's span
        cands = free[chosen.frequency]
        weight = [np.linalg.norm(basis.T @ fields[idx]) for idx in cands]
        idx = cands.pop(int(np.argmax(weight)))
        level_space = np.column_stack([fields[i] for i in chosen.indices])
        report.rows.append(
            MatchRow(
                "matched",
                m=idx[0],
                n=idx[1],
                nu_analytic=chosen.frequency,
                nu_dmd=nu,
                rel_err=abs(nu - chosen.frequency) / chosen.frequency,
                principal_angle_deg=_max_angle_deg(basis, level_space),
                power=power,
                group=gi,
                ambiguous=ambiguous,
            )
        )
        level_bases.setdefault(chosen.frequency, []).append(basis)
        report.level_groups.setdefault(chosen.frequency, []).append(gi)

    for lvl in levels:
        if lvl.frequency in level_bases:
            combined = np.column_stack(level_bases[lvl.frequency])
            u, s, _ = np.linalg.svd(combined, full_matrices=False)
            span = u[:, s > span_tol * s[0]]
            level_space = np.column_stack([fields[i] for i in lvl.indices])
            angles = np.degrees(subspace_angles(span, level_space))
            # dimensions the DMD span is missing count as orthogonal
            missing = lvl.multiplicity - span.shape[1]
            if missing > 0:
                angles = np.concatenate([angles, np.full(missing, 90.0)])
            report.level_angles[lvl.frequency] = np.sort(angles)[::-1]
        for idx in free[lvl.frequency]:
            report.rows.append(
                MatchRow("undetected", m=idx[0], n=idx[1], nu_analytic=lvl.frequency)
            )
    return report
