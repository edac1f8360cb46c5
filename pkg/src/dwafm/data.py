"""Dataset IO, graph preprocessing, windowing, splitting, normalization.

Binary tensor format (little-endian):
    magic 'DWAF' | u32 version=1 | u8 dtype (1 = float32) | u8 ndim |
    2 zero pad bytes | ndim x u64 dims | row-major float payload
Sidecar metadata is a small YAML file next to the data file.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np
import yaml

MAGIC = b"DWAF"
VERSION = 1
DTYPE_F32 = 1


class DataError(Exception):
    """Base class for dataset/file faults."""


class BadMagicError(DataError):
    pass


class VersionMismatchError(DataError):
    pass


class UnknownDtypeError(DataError):
    pass


class TruncatedPayloadError(DataError):
    pass


class PayloadSizeError(DataError):
    """Header-declared size disagrees with the bytes actually present."""


class AdjacencyError(DataError):
    pass


# ------------------------------------------------------------- binary format

def write_tensor_file(path, array: np.ndarray):
    arr = np.ascontiguousarray(array, dtype="<f4")
    header = MAGIC + struct.pack("<IBB2x", VERSION, DTYPE_F32, arr.ndim)
    dims = struct.pack(f"<{arr.ndim}Q", *arr.shape)
    Path(path).write_bytes(header + dims + arr.tobytes())


def read_tensor_file(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 12:
        raise TruncatedPayloadError(f"{path}: file shorter than fixed header")
    if raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    version, dtype_code, ndim = struct.unpack_from("<IBB", raw, 4)
    if version != VERSION:
        raise VersionMismatchError(f"{path}: version {version}, expected {VERSION}")
    if dtype_code != DTYPE_F32:
        raise UnknownDtypeError(f"{path}: unknown dtype code {dtype_code}")
    dims_end = 12 + 8 * ndim
    if len(raw) < dims_end:
        raise TruncatedPayloadError(f"{path}: truncated dimension block")
    shape = struct.unpack_from(f"<{ndim}Q", raw, 12)
    expected = int(np.prod(shape)) * 4
    payload = raw[dims_end:]
    if len(payload) < expected:
        raise TruncatedPayloadError(
            f"{path}: payload has {len(payload)} bytes, header declares {expected}"
        )
    if len(payload) > expected:
        raise PayloadSizeError(
            f"{path}: payload has {len(payload)} bytes, header declares {expected}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(shape).copy()


# ---------------------------------------------------------------- raw series

@dataclass
class RawSeries:
    values: np.ndarray  # [L, N, C] float32
    start_timestamp: str | None
    sample_rate: int  # minutes per step
    channel_names: list[str] = field(default_factory=lambda: ["traffic"])

    @property
    def length(self):
        return self.values.shape[0]

    @property
    def n_nodes(self):
        return self.values.shape[1]


def meta_path_for(data_path) -> Path:
    p = Path(data_path)
    return p.with_suffix(".meta.yaml")


def write_series(data_path, series: RawSeries):
    write_tensor_file(data_path, series.values)
    meta = {
        "sample_rate_minutes": series.sample_rate,
        "start_timestamp": series.start_timestamp,
        "num_nodes": series.n_nodes,
        "channel_names": series.channel_names,
    }
    meta_path_for(data_path).write_text(yaml.safe_dump(meta, sort_keys=True))


def load_data_file(path) -> RawSeries:
    values = read_tensor_file(path)
    if values.ndim == 2:
        values = values[:, :, None]
    if values.ndim != 3:
        raise DataError(f"{path}: expected [L, N, C] data, got shape {values.shape}")
    mp = meta_path_for(path)
    if not mp.exists():
        raise DataError(f"missing sidecar metadata file {mp}")
    meta = yaml.safe_load(mp.read_text())
    if meta.get("num_nodes") != values.shape[1]:
        raise DataError(
            f"{path}: metadata num_nodes={meta.get('num_nodes')} but data has "
            f"{values.shape[1]} nodes"
        )
    rate = int(meta["sample_rate_minutes"])
    if rate <= 0:
        raise DataError(f"{path}: sample_rate_minutes must be positive, got {rate}")
    return RawSeries(
        values=values,
        start_timestamp=meta.get("start_timestamp"),
        sample_rate=rate,
        channel_names=list(meta.get("channel_names") or ["traffic"]),
    )


# ---------------------------------------------------------------- adjacency

@dataclass
class PredefinedGraph:
    n_nodes: int
    mask: np.ndarray  # [N, N] of {0,1}, symmetric, self-loops on
    raw_weights: np.ndarray  # [N, N] >= 0, symmetrized by max

    @classmethod
    def from_edges(cls, edges, n_nodes: int) -> "PredefinedGraph":
        mask = np.eye(n_nodes, dtype=np.float32)
        weights = np.zeros((n_nodes, n_nodes), dtype=np.float32)
        for i, j, cost in edges:
            if not (0 <= i < n_nodes and 0 <= j < n_nodes):
                raise AdjacencyError(
                    f"edge ({i},{j}) out of range for {n_nodes} nodes"
                )
            if cost < 0:
                raise AdjacencyError(f"negative edge cost {cost} on ({i},{j})")
            mask[i, j] = mask[j, i] = 1.0
            w = max(cost, weights[i, j])
            weights[i, j] = weights[j, i] = w
        return cls(n_nodes=n_nodes, mask=mask, raw_weights=weights)


def load_adjacency(path, n_nodes: int) -> PredefinedGraph:
    """Parse a `from,to,cost` CSV into a symmetric masked graph."""
    edges = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header[:3]] != [
            "from",
            "to",
            "cost",
        ]:
            raise AdjacencyError(f"{path}: expected header 'from,to,cost'")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                i, j, cost = int(row[0]), int(row[1]), float(row[2])
            except (ValueError, IndexError) as exc:
                raise AdjacencyError(f"{path}:{lineno}: malformed row {row}") from exc
            edges.append((i, j, cost))
    return PredefinedGraph.from_edges(edges, n_nodes)


# ----------------------------------------------------------------- windowing

@dataclass
class Sample:
    x: np.ndarray  # [T, N, 1] traffic channel (normalized after normalize())
    tod_idx: np.ndarray  # [T] ints in [0, N_d)
    dow_idx: np.ndarray  # [T] ints in [0, 7)
    y: np.ndarray  # [T_f, N] physical units


@dataclass
class NormStats:
    mean: float
    std: float


def _start_offsets(series: RawSeries):
    """(steps since midnight, weekday) of the first sample."""
    if series.start_timestamp is None:
        return 0, 0  # midnight, Monday
    ts = datetime.fromisoformat(str(series.start_timestamp))
    return (ts.hour * 60 + ts.minute) // series.sample_rate, ts.weekday()


def windowize(series: RawSeries, t_in: int, t_out: int) -> list[Sample]:
    """Slide a (t_in, t_out) window over the series, one sample per position."""
    length = series.length
    if length < t_in + t_out:
        raise DataError(
            f"series length {length} shorter than window {t_in}+{t_out}"
        )
    n_day = (24 * 60) // series.sample_rate
    tod0, dow0 = _start_offsets(series)
    traffic = series.values[:, :, :1].astype(np.float32)
    targets = series.values[:, :, 0].astype(np.float32)
    steps = np.arange(length) + tod0
    tod_all = steps % n_day
    dow_all = (dow0 + steps // n_day) % 7
    samples = []
    for i in range(length - t_in - t_out + 1):
        samples.append(
            Sample(
                x=traffic[i : i + t_in],
                tod_idx=tod_all[i : i + t_in].astype(np.int64),
                dow_idx=dow_all[i : i + t_in].astype(np.int64),
                y=targets[i + t_in : i + t_in + t_out],
            )
        )
    return samples


def split(samples, ratios=(0.6, 0.2, 0.2)):
    """Chronological train/val/test partition; sizes floor, floor, remainder."""
    total = sum(ratios)
    r_train, r_val = ratios[0] / total, ratios[1] / total
    n = len(samples)
    n_train = int(np.floor(r_train * n))
    n_val = int(np.floor(r_val * n))
    return samples[:n_train], samples[n_train : n_train + n_val], samples[n_train + n_val :]


def compute_stats(train_samples) -> NormStats:
    """Mean/std of the traffic channel over training inputs only."""
    stacked = np.concatenate([s.x for s in train_samples], axis=0)
    mean = float(stacked.mean())
    std = float(stacked.std())
    if std == 0.0:
        raise DataError("constant training data: std is zero, cannot normalize")
    return NormStats(mean=mean, std=std)


def normalize(samples, stats: NormStats) -> list[Sample]:
    """Z-score inputs; targets stay in physical units."""
    return [
        Sample(
            x=(s.x - stats.mean) / stats.std,
            tod_idx=s.tod_idx,
            dow_idx=s.dow_idx,
            y=s.y,
        )
        for s in samples
    ]


def denormalize(arr, stats: NormStats):
    return arr * stats.std + stats.mean


@dataclass
class Dataset:
    train: list[Sample]
    val: list[Sample]
    test: list[Sample]
    stats: NormStats
    graph: PredefinedGraph
    n_day: int
    sample_rate: int

    @property
    def n_nodes(self):
        return self.graph.n_nodes


def prepare_dataset(
    series: RawSeries, graph: PredefinedGraph, t_in: int, t_out: int
) -> Dataset:
    samples = windowize(series, t_in, t_out)
    train, val, test = split(samples)
    stats = compute_stats(train)
    return Dataset(
        train=normalize(train, stats),
        val=normalize(val, stats),
        test=normalize(test, stats),
        stats=stats,
        graph=graph,
        n_day=(24 * 60) // series.sample_rate,
        sample_rate=series.sample_rate,
    )


def load_dataset_dir(data_dir, t_in: int, t_out: int) -> Dataset:
    """Load a converted dataset directory (data.dwaf + adjacency.csv)."""
    data_dir = Path(data_dir)
    series = load_data_file(data_dir / "data.dwaf")
    graph = load_adjacency(data_dir / "adjacency.csv", series.n_nodes)
    return prepare_dataset(series, graph, t_in, t_out)


def collate(samples) -> dict:
    """Stack a list of samples into batched arrays."""
    return {
        "x": np.stack([s.x for s in samples]),
        "tod": np.stack([s.tod_idx for s in samples]),
        "dow": np.stack([s.dow_idx for s in samples]),
        "y": np.stack([s.y for s in samples]),
    }


def iter_batches(samples, batch_size: int, rng=None):
    """Yield collated batches; seeded shuffle when an rng is given."""
    order = np.arange(len(samples))
    if rng is not None:
        rng.shuffle(order)
    for start in range(0, len(samples), batch_size):
        idx = order[start : start + batch_size]
        yield collate([samples[i] for i in idx])
