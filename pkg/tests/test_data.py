"""Binary format, metadata, graph loading, windowing, splits, normalization."""

import numpy as np
import pytest

from dwafm import data as D
from dwafm.data import (
    AdjacencyError,
    BadMagicError,
    DataError,
    NormStats,
    PayloadSizeError,
    PredefinedGraph,
    RawSeries,
    TruncatedPayloadError,
    UnknownDtypeError,
    VersionMismatchError,
    collate,
    compute_stats,
    denormalize,
    iter_batches,
    load_adjacency,
    load_data_file,
    load_dataset_dir,
    normalize,
    prepare_dataset,
    read_tensor_file,
    split,
    windowize,
    write_series,
    write_tensor_file,
)


# ------------------------------------------------------------- binary format

def test_round_trip_two_step_one_node(tmp_path):
    path = tmp_path / "t.dwaf"
    arr = np.array([[[1.5]], [[2.5]]], dtype=np.float32)  # [2, 1, 1]
    write_tensor_file(path, arr)
    back = read_tensor_file(path)
    assert back.shape == (2, 1, 1)
    np.testing.assert_array_equal(back, arr)


def test_header_layout_exact_bytes(tmp_path):
    path = tmp_path / "t.dwaf"
    write_tensor_file(path, np.array([7.0], dtype=np.float32))
    raw = path.read_bytes()
    assert raw[:4] == b"DWAF"
    assert int.from_bytes(raw[4:8], "little") == 1  # version
    assert raw[8] == 1 and raw[9] == 1  # dtype f32, ndim
    assert raw[10:12] == b"\x00\x00"  # pad
    assert int.from_bytes(raw[12:20], "little") == 1  # dim
    assert len(raw) == 24


def test_bad_magic(tmp_path):
    path = tmp_path / "t.dwaf"
    write_tensor_file(path, np.ones(3, dtype=np.float32))
    path.write_bytes(b"NOPE" + path.read_bytes()[4:])
    with pytest.raises(BadMagicError):
        read_tensor_file(path)


def test_version_mismatch(tmp_path):
    path = tmp_path / "t.dwaf"
    write_tensor_file(path, np.ones(3, dtype=np.float32))
    raw = bytearray(path.read_bytes())
    raw[4] = 9
    path.write_bytes(bytes(raw))
    with pytest.raises(VersionMismatchError):
        read_tensor_file(path)


def test_unknown_dtype(tmp_path):
    path = tmp_path / "t.dwaf"
    write_tensor_file(path, np.ones(3, dtype=np.float32))
    raw = bytearray(path.read_bytes())
    raw[8] = 42
    path.write_bytes(bytes(raw))
    with pytest.raises(UnknownDtypeError):
        read_tensor_file(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "t.dwaf"
    write_tensor_file(path, np.ones(4, dtype=np.float32))
    path.write_bytes(path.read_bytes()[:-5])
    with pytest.raises(TruncatedPayloadError):
        read_tensor_file(path)


def test_oversized_payload(tmp_path):
    path = tmp_path / "t.dwaf"
    write_tensor_file(path, np.ones(4, dtype=np.float32))
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(PayloadSizeError):
        read_tensor_file(path)


def test_file_shorter_than_header(tmp_path):
    path = tmp_path / "t.dwaf"
    path.write_bytes(b"DWAF\x01")
    with pytest.raises(TruncatedPayloadError):
        read_tensor_file(path)


# --------------------------------------------------------------- raw series

def make_series(length=50, n_nodes=3, rate=5, start="2016-07-01T00:00:00"):
    rng = np.random.default_rng(0)
    values = rng.uniform(10, 100, size=(length, n_nodes, 1)).astype(np.float32)
    return RawSeries(
        values=values,
        start_timestamp=start,
        sample_rate=rate,
        channel_names=["traffic"],
    )


def test_series_round_trip_with_metadata(tmp_path):
    path = tmp_path / "data.dwaf"
    series = make_series()
    write_series(path, series)
    assert (tmp_path / "data.meta.yaml").exists()
    back = load_data_file(path)
    np.testing.assert_array_equal(back.values, series.values)
    assert back.sample_rate == 5
    assert back.start_timestamp == "2016-07-01T00:00:00"
    assert back.channel_names == ["traffic"]


# -------------------------------------------------------------------- graph

def test_graph_self_loops_and_symmetry():
    g = PredefinedGraph.from_edges([(0, 1, 3.0), (1, 2, 4.0)], 3)
    assert (np.diag(g.mask) == 1).all()
    np.testing.assert_array_equal(g.mask, g.mask.T)
    assert g.mask[0, 1] == 1 and g.mask[1, 0] == 1
    assert g.mask[0, 2] == 0


def test_graph_asymmetric_costs_take_max():
    g = PredefinedGraph.from_edges([(0, 1, 3.0), (1, 0, 7.0)], 2)
    assert g.raw_weights[0, 1] == g.raw_weights[1, 0] == 7.0


def test_load_adjacency_csv(tmp_path):
    path = tmp_path / "adjacency.csv"
    path.write_text("from,to,cost\n0,1,2.5\n1,2,1.0\n")
    g = load_adjacency(path, 3)
    assert g.n_nodes == 3
    assert g.mask[0, 1] == 1 and g.mask[2, 1] == 1 and g.mask[0, 2] == 0


def test_load_adjacency_rejects_bad_ids(tmp_path):
    path = tmp_path / "adjacency.csv"
    path.write_text("from,to,cost\n0,3,1.0\n")
    with pytest.raises(AdjacencyError):
        load_adjacency(path, 3)


# ---------------------------------------------------------------- windowing

def test_windowize_count_formula():
    # one sample per valid start position: L - T - T_f + 1
    series = make_series(length=24)
    assert len(windowize(series, 12, 12)) == 1
    series = make_series(length=50)
    assert len(windowize(series, 12, 12)) == 27


def test_windowize_17856_gives_17833():
    series = make_series(length=17856, n_nodes=1)
    assert len(windowize(series, 12, 12)) == 17833


def test_windowize_too_short_errors():
    with pytest.raises(DataError):
        windowize(make_series(length=20), 12, 12)


def test_windowize_contents_align():
    series = make_series(length=30)
    samples = windowize(series, 4, 2)
    s = samples[3]
    np.testing.assert_array_equal(s.x, series.values[3:7, :, :1])
    np.testing.assert_array_equal(s.y, series.values[7:9, :, 0])


def test_time_indices_from_midnight_monday_default():
    series = make_series(length=30, rate=5, start=None)
    samples = windowize(series, 4, 2)
    np.testing.assert_array_equal(samples[0].tod_idx, [0, 1, 2, 3])
    np.testing.assert_array_equal(samples[0].dow_idx, [0, 0, 0, 0])  # Monday


def test_time_indices_with_offset_start():
    # 2016-07-01 is a Friday (weekday 4); 06:00 at 5-minute steps = index 72
    series = make_series(length=600, rate=5, start="2016-07-01T06:00:00")
    samples = windowize(series, 4, 2)
    np.testing.assert_array_equal(samples[0].tod_idx, [72, 73, 74, 75])
    assert samples[0].dow_idx[0] == 4
    # 18 hours later the day rolls over: step 216 = midnight Saturday
    assert samples[216].tod_idx[0] == 0
    assert samples[216].dow_idx[0] == 5


def test_n_day_for_5_minute_rate():
    series = make_series(length=300, rate=5)
    g = PredefinedGraph.from_edges([(0, 1, 1.0), (1, 2, 1.0)], 3)
    ds = prepare_dataset(series, g, 12, 12)
    assert ds.n_day == 288
    assert windowize(series, 12, 12)[0].tod_idx.max() < 288


# ------------------------------------------------------------ split + stats

def test_split_sizes_floor_floor_remainder():
    samples = list(range(17833))
    train, val, test = split(samples)
    assert (len(train), len(val), len(test)) == (10699, 3566, 3568)
    assert train + val + test == samples  # chronological, no shuffling


def test_split_small():
    train, val, test = split(list(range(10)))
    assert (len(train), len(val), len(test)) == (6, 2, 2)


def test_stats_from_train_inputs_only():
    series = make_series(length=60)
    samples = windowize(series, 4, 2)
    train, _, _ = split(samples)
    stats = compute_stats(train)
    stacked = np.concatenate([s.x for s in train], axis=0)
    assert stats.mean == pytest.approx(float(stacked.mean()))
    assert stats.std == pytest.approx(float(stacked.std()))


def test_constant_data_rejected():
    series = make_series(length=60)
    series.values[:] = 5.0
    samples = windowize(series, 4, 2)
    with pytest.raises(DataError):
        compute_stats(split(samples)[0])


def test_normalize_denormalize_inverse():
    series = make_series(length=60)
    samples = windowize(series, 4, 2)
    stats = compute_stats(samples)
    normed = normalize(samples, stats)
    for raw, n in zip(samples, normed):
        np.testing.assert_allclose(denormalize(n.x, stats), raw.x, rtol=1e-5)
        np.testing.assert_array_equal(n.y, raw.y)  # targets stay physical


# ---------------------------------------------------------- batching + dirs

def test_collate_shapes():
    series = make_series(length=60)
    samples = windowize(series, 4, 2)
    batch = collate(samples[:8])
    assert batch["x"].shape == (8, 4, 3, 1)
    assert batch["tod"].shape == (8, 4)
    assert batch["dow"].shape == (8, 4)
    assert batch["y"].shape == (8, 2, 3)


def test_iter_batches_seeded_shuffle_is_reproducible():
    series = make_series(length=60)
    samples = windowize(series, 4, 2)
    runs = []
    for _ in range(2):
        rng = np.random.default_rng(5)
        runs.append([b["x"] for b in iter_batches(samples, 8, rng)])
    for a, b in zip(*runs):
        np.testing.assert_array_equal(a, b)
    ordered = [b["x"] for b in iter_batches(samples, 8)]
    assert not all(np.array_equal(a, b) for a, b in zip(runs[0], ordered))


def test_load_dataset_dir(tmp_path):
    series = make_series(length=60)
    write_series(tmp_path / "data.dwaf", series)
    (tmp_path / "adjacency.csv").write_text("from,to,cost\n0,1,1.0\n1,2,2.0\n")
    ds = load_dataset_dir(tmp_path, 4, 2)
    assert ds.n_nodes == 3
    assert len(ds.train) + len(ds.val) + len(ds.test) == 55
    assert ds.sample_rate == 5
