"""Command-line front end: ``simulate``, ``dmd``, ``verify`` and ``render``.

Every failure exits nonzero with one line on stderr starting ``error:``.
Floats are written with 17 significant digits so output files are
byte-identical across runs on identical input.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .dmd import DmdOptions, DmdResult, Truncation, decompose, pair_conjugates
from .errors import ModalDmdError
from .membrane import GridDomain, WaveConfig, height_sum, load_mask, trajectory
from .oracle import MATCH_WINDOW, match_modes
from .render import write_pgm
from .snapshots import SnapshotMatrix, load_csv, load_field, load_snapshots, save_field, save_snapshots

SNAPSHOT_FILE = "snapshots.dmds"
OBSERVABLE_FILE = "observable.csv"
SPECTRUM_FILE = "spectrum.csv"
MATCH_FILE = "match.csv"
MODE_DIR = "modes"
SPECTRUM_COLUMNS = [
    "index", "frequency_hz", "eigenvalue_re", "eigenvalue_im", "magnitude", "power", "paired_with",
]
MATCH_COLUMNS = [
    "analytic_m", "analytic_n", "nu_analytic", "nu_dmd", "rel_err", "principal_angle_deg", "power", "status",
]


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"error: {message}\n")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


# -- argument types ----------------------------------------------------------------
def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return v


def _nonneg_float(text: str) -> float:
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def _fraction(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {text}")
    return v


def _int_at_least(lo: int):
    def parse(text: str) -> int:
        v = int(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {text}")
        return v

    return parse


def _point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y, got {text!r}")
    return float(parts[0]), float(parts[1])


for _f, _name in [
    (_positive_float, "positive number"),
    (_nonneg_float, "non-negative number"),
    (_fraction, "fraction"),
    (_point, "point"),
]:
    _f.__name__ = _name


def _domain(args) -> GridDomain:
    if getattr(args, "mask", None):
        return load_mask(args.mask)
    return GridDomain.square(args.grid)


# -- subcommands -------------------------------------------------------------------
def cmd_simulate(args) -> int:
    d = _domain(args)
    cfg = WaveConfig(
        c=args.c,
        gamma=args.gamma,
        ic_center=args.center,
        ic_sigma=args.sigma,
        ic_amplitude=args.amplitude,
        t_end=args.t_end,
        n_samples=args.samples,
        dt_sim=args.dt_sim,
    )
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    cols = np.empty((d.n_interior, cfg.n_samples))
    obs = []
    for k, (t, h, _) in enumerate(trajectory(d, cfg)):
        cols[:, k] = h[d.mask]
        obs.append((t, height_sum(h)))
    s = SnapshotMatrix(cols, cfg.sample_dt)
    save_snapshots(s, out / SNAPSHOT_FILE)
    _write_csv(out / OBSERVABLE_FILE, ["t", "height_sum"], obs)
    print(f"wrote {out / SNAPSHOT_FILE}: M={s.n_points} N={s.n_snapshots} dt={fmt(s.dt)}")
    return 0


def _truncation(args) -> Truncation:
    if args.rank is not None:
        return Truncation.fixed_rank(args.rank)
    if args.energy is not None:
        return Truncation.energy_fraction(args.energy)
    if args.no_truncation:
        return Truncation.none()
    return Truncation.sv_threshold(args.sv_threshold if args.sv_threshold is not None else 1e-10)


def _groups(result: DmdResult):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        groups = pair_conjugates(result)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return groups


def cmd_dmd(args) -> int:
    if args.csv:
        if args.dt is None:
            raise CliError("--dt is required with --csv")
        s = load_csv(args.input, args.dt)
    else:
        s = load_snapshots(args.input)
    opts = DmdOptions(m_stack=args.stack, truncation=_truncation(args))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = decompose(s, opts)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    keep = np.flatnonzero(result.powers >= args.power_floor)
    new_index = {int(old): k for k, old in enumerate(keep)}
    partner = {}
    for g in _groups(result):
        if len(g.members) == 2:
            a, b = g.members
            partner[a], partner[b] = b, a

    out = Path(args.output)
    (out / MODE_DIR).mkdir(parents=True, exist_ok=True)
    rows = []
    for k, old in enumerate(keep):
        lam = result.eigenvalues[old]
        p = partner.get(int(old))
        rows.append([
            k,
            result.frequencies[old],
            lam.real,
            lam.imag,
            result.growth_magnitudes[old],
            result.powers[old],
            new_index.get(p, -1) if p is not None else -1,
        ])
        phi = result.modes[:, old]
        stem = out / MODE_DIR / f"mode_{k:04d}"
        save_field(np.abs(phi), f"{stem}_abs.dmds", result.dt)
        save_field(phi.real, f"{stem}_re.dmds", result.dt)
        save_field(phi.imag, f"{stem}_im.dmds", result.dt)
    _write_csv(out / SPECTRUM_FILE, SPECTRUM_COLUMNS, rows)

    reps = [r for r in rows if r[1] >= 0][:10]
    print(f"rank {result.rank_used}, {len(rows)} modes written to {out}")
    for r in reps:
        print(f"  nu={r[1]:.6g} Hz  |lambda|={r[4]:.6g}  power={r[5]:.6g}")
    return 0


def _read_spectrum(directory: Path, d: GridDomain) -> DmdResult:
    with open(directory / SPECTRUM_FILE, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SPECTRUM_COLUMNS:
            raise CliError(f"{directory / SPECTRUM_FILE}: unexpected header {reader.fieldnames}")
        rows = list(reader)
    r = len(rows)
    lam = np.array([complex(float(x["eigenvalue_re"]), float(x["eigenvalue_im"])) for x in rows])
    freqs = np.array([float(x["frequency_hz"]) for x in rows])
    powers = np.array([float(x["power"]) for x in rows])
    modes = np.zeros((d.n_interior, r), dtype=np.complex128)
    dt = 1.0
    for k, row in enumerate(rows):
        stem = directory / MODE_DIR / f"mode_{int(row['index']):04d}"
        re, dt = load_field(f"{stem}_re.dmds")
        im, _ = load_field(f"{stem}_im.dmds")
        if re.shape[0] != d.n_interior or im.shape[0] != d.n_interior:
            raise CliError(
                f"mode {k} has {re.shape[0]} values but the grid has {d.n_interior} interior nodes"
            )
        modes[:, k] = re + 1j * im
    return DmdResult(
        eigenvalues=lam,
        modes=modes,
        frequencies=freqs,
        growth_magnitudes=np.abs(lam),
        powers=powers,
        amplitudes=np.zeros((r, 0), dtype=np.complex128),
        rank_used=r,
        dt=dt,
        singular_values=np.zeros(0),
    )


def cmd_verify(args) -> int:
    d = _domain(args)
    directory = Path(args.input)
    result = _read_spectrum(directory, d)
    groups = _groups(result)
    report = match_modes(result, groups, args.c, args.max_freq, d, window=args.window)
    rows = [
        [row.m, row.n, row.nu_analytic, row.nu_dmd, row.rel_err, row.principal_angle_deg, row.power, row.status]
        for row in report.rows
    ]
    out = Path(args.output) if args.output else directory / MATCH_FILE
    _write_csv(out, MATCH_COLUMNS, rows)
    n_ambiguous = sum(row.ambiguous for row in report.rows if row.status == "matched")
    if n_ambiguous:
        print(f"warning: {n_ambiguous} matched group(s) had several analytic levels inside the window",
              file=sys.stderr)
    print(
        f"{len(report.matched)} matched, {len(report.spurious)} spurious, "
        f"{len(report.undetected)} undetected -> {out}"
    )
    return 0


def cmd_render(args) -> int:
    d = _domain(args)
    values, _ = load_field(args.input, args.column)
    if values.shape[0] != d.n_interior:
        raise CliError(
            f"field length {values.shape[0]} inconsistent with grid ({d.n_interior} interior nodes)"
        )
    write_pgm(d.unflatten(values), args.output)
    return 0


# -- parser ------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="modaldmd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"modaldmd {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="solve the damped wave equation and write snapshots")
    s.add_argument("-o", "--output", required=True, help="output directory")
    s.add_argument("--c", type=_positive_float, default=1.0, help="wave speed")
    s.add_argument("--gamma", type=_nonneg_float, default=0.0, help="damping factor")
    s.add_argument("--sigma", type=_positive_float, default=0.1, help="Gaussian width")
    s.add_argument("--center", type=_point, default=(0.3, 0.4), help="Gaussian center X,Y")
    s.add_argument("--amplitude", type=float, default=1.0)
    s.add_argument("--grid", type=_int_at_least(3), default=41, help="points per side of the square")
    s.add_argument("--mask", help="ASCII mask file ('#' interior, '.' exterior)")
    s.add_argument("--t-end", type=_positive_float, default=10.0)
    s.add_argument("--samples", type=_int_at_least(2), default=1000)
    s.add_argument("--dt-sim", type=_positive_float, default=None, help="solver step (default: CFL-derived)")
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("dmd", help="decompose a snapshot file")
    m.add_argument("input", help="DMDS1 file, or CSV with --csv")
    m.add_argument("-o", "--output", required=True, help="output directory")
    m.add_argument("--csv", action="store_true", help="input is CSV, one snapshot per row")
    m.add_argument("--dt", type=_positive_float, help="sampling interval for CSV input")
    m.add_argument("--stack", type=_int_at_least(0), default=0,
                   help="number of time-delay copies appended to each snapshot (default 0)")
    trunc = m.add_mutually_exclusive_group()
    trunc.add_argument("--rank", type=_int_at_least(1), help="keep this many singular triplets")
    trunc.add_argument("--energy", type=_fraction,
                       help="keep the smallest rank reaching this fraction of squared singular values")
    trunc.add_argument("--sv-threshold", type=_positive_float,
                       help="drop singular values below this fraction of the largest (default 1e-10)")
    trunc.add_argument("--no-truncation", action="store_true", help="keep the full numerical rank")
    m.add_argument("--power-floor", type=_nonneg_float, default=0.0,
                   help="omit modes whose power is below this value")
    m.set_defaults(func=cmd_dmd)

    v = sub.add_parser("verify", help="match a dmd output directory against the square membrane")
    v.add_argument("input", help="directory written by 'dmd'")
    v.add_argument("-o", "--output", help=f"match CSV path (default: INPUT/{MATCH_FILE})")
    v.add_argument("--c", type=_positive_float, default=1.0)
    v.add_argument("--max-freq", type=_positive_float, default=5.0)
    v.add_argument("--grid", type=_int_at_least(3), default=41)
    v.add_argument("--window", type=_positive_float, default=MATCH_WINDOW)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("render", help="write a field as a grayscale PGM")
    r.add_argument("input", help="DMDS1 file")
    r.add_argument("-o", "--output", required=True)
    r.add_argument("--column", type=_int_at_least(0), default=0)
    r.add_argument("--grid", type=_int_at_least(3), default=41)
    r.add_argument("--mask")
    r.set_defaults(func=cmd_render)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ModalDmdError, CliError, OSError, ValueError) as exc:
        msg = str(exc).replace("\n", " ") or type(exc).__name__
        print(f"error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
