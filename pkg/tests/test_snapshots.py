import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from modaldmd.errors import (
    BadMagicError,
    InsufficientSnapshotsError,
    InvalidSnapshotError,
    LengthMismatchError,
    NonFiniteError,
    SizeOverflowError,
    TruncatedPayloadError,
)
from modaldmd.snapshots import (
    HEADER_SIZE,
    MAGIC,
    SnapshotMatrix,
    build_data_matrices,
    load_csv,
    load_field,
    load_snapshots,
    save_field,
    save_snapshots,
    unstack_vector,
)


def raw_file(m, n, dt, values):
    return MAGIC + struct.pack("<IId", m, n, dt) + struct.pack(f"<{len(values)}d", *values)


def test_load_reads_header_and_column_major_payload(tmp_path):
    path = tmp_path / "a.dmds"
    path.write_bytes(raw_file(2, 3, 0.5, [1, 2, 3, 4, 5, 6]))
    s = load_snapshots(path)
    assert s.dt == 0.5
    np.testing.assert_array_equal(s.data, [[1, 3, 5], [2, 4, 6]])


def test_save_load_is_byte_identity(tmp_path):
    raw = raw_file(2, 3, 0.5, [1, 2, 3, 4, 5, 6])
    src, dst = tmp_path / "a.dmds", tmp_path / "b.dmds"
    src.write_bytes(raw)
    save_snapshots(load_snapshots(src), dst)
    assert dst.read_bytes() == raw


def test_minimal_file_size(tmp_path):
    path = tmp_path / "z.dmds"
    save_snapshots(SnapshotMatrix(np.zeros((1, 2)), 1.0), path)
    raw = path.read_bytes()
    assert len(raw) == 8 + 16 + 16
    assert raw[:8] == b"DMDSNAP1"
    assert HEADER_SIZE == 24


def test_random_round_trip_bit_exact(tmp_path, rng):
    data = rng.standard_normal((10, 10))
    path = tmp_path / "r.dmds"
    save_snapshots(SnapshotMatrix(data, 0.01), path)
    back = load_snapshots(path)
    assert np.array_equal(back.data.view(np.uint64), data.view(np.uint64))


@pytest.mark.parametrize(
    "raw, exc, text",
    [
        (raw_file(2, 3, 0.5, [1, 2, 3, 4, 5, 6])[:-5], TruncatedPayloadError, "truncated payload"),
        (b"NOTSNAP1" + bytes(16), BadMagicError, "bad magic"),
        (raw_file(1, 2, 1.0, [1.0, float("nan")]), NonFiniteError, "non-finite"),
        (raw_file(1, 2, 1.0, [1.0, 2.0]) + b"\x00", SizeOverflowError, "trailing"),
        (b"DMDS", TruncatedPayloadError, "truncated"),
    ],
)
def test_load_errors(tmp_path, raw, exc, text):
    path = tmp_path / "bad.dmds"
    path.write_bytes(raw)
    with pytest.raises(exc, match=text):
        load_snapshots(path)


def test_errors_are_distinct_types():
    kinds = {BadMagicError, TruncatedPayloadError, NonFiniteError, SizeOverflowError}
    assert len(kinds) == 4


def test_huge_header_is_reported_as_truncation(tmp_path):
    path = tmp_path / "big.dmds"
    path.write_bytes(MAGIC + struct.pack("<IId", 2**32 - 1, 2**32 - 1, 1.0))
    with pytest.raises((TruncatedPayloadError, SizeOverflowError)):
        load_snapshots(path)


def test_save_to_unwritable_path_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        save_snapshots(SnapshotMatrix(np.zeros((1, 2)), 1.0), tmp_path / "missing" / "x.dmds")


@pytest.mark.parametrize(
    "data, dt",
    [(np.zeros((1, 1)), 1.0), (np.zeros((0, 3)), 1.0), (np.zeros((2, 2)), 0.0),
     (np.array([[1.0, np.inf]]), 1.0), (np.zeros(4), 1.0)],
)
def test_snapshot_invariants(data, dt):
    with pytest.raises(InvalidSnapshotError):
        SnapshotMatrix(data, dt)


def test_snapshot_matrix_is_read_only():
    s = SnapshotMatrix(np.ones((2, 2)), 1.0)
    with pytest.raises(ValueError):
        s.data[0, 0] = 5.0


def test_field_files_hold_one_column(tmp_path):
    path = tmp_path / "f.dmds"
    save_field(np.array([1.0, -2.0, 3.0]), path, dt=0.25)
    values, dt = load_field(path)
    np.testing.assert_array_equal(values, [1.0, -2.0, 3.0])
    assert dt == 0.25
    with pytest.raises(InvalidSnapshotError):
        load_snapshots(path)


def test_csv_one_snapshot_per_row(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("1,2\n3,4\n5,6\n")
    s = load_csv(path, 0.1)
    np.testing.assert_array_equal(s.data, [[1, 3, 5], [2, 4, 6]])


# -- data matrices --------------------------------------------------------------
def four_snapshots():
    return SnapshotMatrix(np.array([[0.0, 1, 2, 3], [10, 11, 12, 13]]), 1.0)


def test_plain_shift():
    pair = build_data_matrices(four_snapshots(), 0)
    np.testing.assert_array_equal(pair.v0, [[0, 1, 2], [10, 11, 12]])
    np.testing.assert_array_equal(pair.v1, [[1, 2, 3], [11, 12, 13]])


def test_stacking_one_level():
    pair = build_data_matrices(four_snapshots(), 1)
    # stacked columns [v0;v1], [v1;v2], [v2;v3]
    stacked = np.array([[0, 1, 2], [10, 11, 12], [1, 2, 3], [11, 12, 13]], dtype=float)
    np.testing.assert_array_equal(pair.v0, stacked[:, :2])
    np.testing.assert_array_equal(pair.v1, stacked[:, 1:])
    assert pair.base_m == 2 and pair.m_stack == 1


def test_stacking_needs_a_column_pair():
    s = SnapshotMatrix(np.arange(3.0).reshape(1, 3), 1.0)
    build_data_matrices(s, 1)
    with pytest.raises(InsufficientSnapshotsError, match="insufficient snapshots"):
        build_data_matrices(s, 2)


def test_unstack():
    np.testing.assert_array_equal(unstack_vector(np.array([1, 2, 3, 4]), 2), [1, 2])
    v = np.array([1 + 1j, 2.0])
    np.testing.assert_array_equal(unstack_vector(v, 2), v)
    with pytest.raises(LengthMismatchError):
        unstack_vector(np.arange(5), 2)


@settings(max_examples=50, deadline=None)
@given(
    m=st.integers(1, 5),
    n=st.integers(2, 12),
    m_stack=st.integers(0, 4),
    seed=st.integers(0, 2**32 - 1),
)
def test_shift_relation_and_block_layout(m, n, m_stack, seed):
    data = np.random.default_rng(seed).standard_normal((m, n))
    s = SnapshotMatrix(data, 1.0)
    if n - m_stack - 1 < 1:
        with pytest.raises(InsufficientSnapshotsError):
            build_data_matrices(s, m_stack)
        return
    pair = build_data_matrices(s, m_stack)
    assert pair.v0.shape == pair.v1.shape == ((m_stack + 1) * m, n - m_stack - 1)
    np.testing.assert_array_equal(pair.v1[:, :-1], pair.v0[:, 1:])
    for b in range(m_stack + 1):
        np.testing.assert_array_equal(pair.v0[b * m:(b + 1) * m], data[:, b:b + pair.n_columns])
    if m_stack == 0:
        rebuilt = np.column_stack([pair.v0, pair.v1[:, -1]])
        np.testing.assert_array_equal(rebuilt, data)


@settings(max_examples=50, deadline=None)
@given(
    data=arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(2, 6)),
                elements=st.floats(allow_nan=False, allow_infinity=False)),
    dt=st.floats(min_value=1e-9, max_value=1e9),
)
def test_round_trip_property(tmp_path_factory, data, dt):
    path = tmp_path_factory.mktemp("rt") / "x.dmds"
    s = SnapshotMatrix(data, dt)
    save_snapshots(s, path)
    raw = path.read_bytes()
    back = load_snapshots(path)
    assert back.dt == s.dt
    assert np.array_equal(back.data.view(np.uint64), s.data.view(np.uint64))
    save_snapshots(back, path)
    assert path.read_bytes() == raw
