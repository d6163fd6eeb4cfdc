"""Exact dynamic mode decomposition with a damped-membrane test bed."""

from .dmd import (
    DmdOptions,
    DmdResult,
    ModeGroup,
    Truncation,
    amplitudes,
    decompose,
    fit,
    frequency_of,
    mode_power,
    pair_conjugates,
    reconstruct,
    truncation_rank,
)
from .membrane import GridDomain, WaveConfig, simulate
from .oracle import analytic_frequency, analytic_mode_field, match_modes
from .snapshots import (
    DataMatrixPair,
    SnapshotMatrix,
    build_data_matrices,
    load_snapshots,
    save_snapshots,
    unstack_vector,
)

__version__ = "0.1.0"
