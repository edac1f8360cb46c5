"""Shared fixtures: toy models, the synthetic benchmark dataset."""

import numpy as np
import pytest

from dwafm.config import RunConfig
from dwafm.data import NormStats, PredefinedGraph, prepare_dataset
from dwafm.model import make_model
from dwafm.synthetic import generate_synthetic
from dwafm.training import make_toy_batch, toy_config


TOY_EDGES = [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0)]


def build_toy(variant="full", temporal_kind="fre_mlp", seed=1, **overrides):
    """Float64 4-node model plus a matching random batch."""
    config = toy_config(variant, temporal_kind, seed)
    for key, val in overrides.items():
        setattr(config, key, val)
    graph = PredefinedGraph.from_edges(TOY_EDGES, 4)
    stats = NormStats(mean=5.0, std=2.0)
    model = make_model(config, graph, stats, n_day=6)
    batch = make_toy_batch(config, seed=seed)
    return model, batch, config, graph


@pytest.fixture(scope="session")
def toy_graph():
    return PredefinedGraph.from_edges(TOY_EDGES, 4)


@pytest.fixture(scope="session")
def synthetic_dataset():
    """The 8-node / 1000-step benchmark series, windowed and split."""
    series, graph = generate_synthetic(8, 1000, seed=0)
    cfg = RunConfig()
    return series, prepare_dataset(series, graph, cfg.t_in, cfg.t_out)


def rel_err(a, b):
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-12)
    return float((np.abs(a - b) / denom).max())
