"""Embedding layer: feature, temporal, dynamic-graph and adaptive embeddings.

The dynamic weighted graph is learned per (batch, timestep) by masked
self-attention over the raw input window, restricted to the predefined
graph's support and symmetrized.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from . import tensor as T
from .data import PredefinedGraph
from .optim import make_param, make_zeros
from .tensor import Tensor


class DynamicGraph:
    """Per-timestep symmetric weighted adjacency, zero off the mask support."""

    def __init__(self, a_g: Tensor, a_a: Tensor):
        self.a_g = a_g  # [B, T, N, N] symmetrized
        self.a_a = a_a  # [B, T, N, N] pre-symmetrization attention rows


class EmbeddingLayer:
    def __init__(self, config, n_nodes, n_day, rng, dtype, d_in=1):
        self.config = config
        self.n_nodes = n_nodes
        self.n_day = n_day
        self.d_in = d_in
        d_f = config.d_f
        scheme = config.init_scheme
        v = config.variant

        self.fc_w = make_param("embed.fc_w", (d_in, d_f), scheme, rng, dtype)
        self.fc_b = make_zeros("embed.fc_b", (d_f,), dtype)
        self.w_day = self.w_week = None
        if v != "no_et":
            self.w_day = make_param("embed.w_day", (n_day, d_f), scheme, rng, dtype)
            self.w_week = make_param("embed.w_week", (7, d_f), scheme, rng, dtype)
        self.w_q = self.w_k = self.b_node = None
        if v not in ("no_eg", "no_es"):
            self.b_node = make_param("embed.b_node", (n_nodes, d_f), scheme, rng, dtype)
            if v != "no_ag":
                self.w_q = make_param("embed.w_q", (d_in, d_f), scheme, rng, dtype)
                self.w_k = make_param("embed.w_k", (d_in, d_f), scheme, rng, dtype)
        self.e_a = None
        if v != "no_es":
            self.e_a = make_param(
                "embed.e_a", (config.t_in, n_nodes, d_f), scheme, rng, dtype
            )
        self.dtype = dtype

    def params(self):
        cand = [
            self.fc_w, self.fc_b, self.w_day, self.w_week,
            self.w_q, self.w_k, self.b_node, self.e_a,
        ]
        return [p for p in cand if p is not None]

    # ------------------------------------------------------------ components

    def feature_embedding(self, x: Tensor) -> Tensor:
        return T.matmul(x, self.fc_w) + self.fc_b.value

    def temporal_embedding(self, tod_idx, dow_idx) -> Tensor:
        """Lookup + node-axis replication, concatenated on the feature axis."""
        e_td = T.gather_rows(self.w_day, tod_idx)  # [B, T, d_f]
        e_tw = T.gather_rows(self.w_week, dow_idx)
        e_t = T.concat([e_td, e_tw], axis=-1)  # [B, T, 2d_f]
        return self._tile_nodes(e_t)

    def _tile_nodes(self, e: Tensor) -> Tensor:
        """[B, T, d] -> [B, T, N, d] by replication along the node axis."""
        b, t, d = e.shape
        zeros = Tensor(np.zeros((1, 1, self.n_nodes, 1), dtype=self.dtype))
        return T.reshape(e, (b, t, 1, d)) + zeros

    def dynamic_adjacency(self, x_raw: Tensor, graph: PredefinedGraph) -> DynamicGraph:
        """Masked self-attention over raw inputs, then exact symmetrization."""
        d_f = self.config.d_f
        q = T.matmul(x_raw, self.w_q)  # [B, T, N, d_f]
        k = T.matmul(x_raw, self.w_k)
        logits = T.scale(T.matmul(q, T.transpose(k)), 1.0 / np.sqrt(d_f))
        a_a = T.masked_softmax_lastdim(logits, graph.mask)
        a_g = T.scale(a_a + T.transpose(a_a), 0.5)
        return DynamicGraph(a_g=a_g, a_a=a_a)

    def static_adjacency(self, graph: PredefinedGraph) -> np.ndarray:
        """Row-normalized binary predefined graph (the no_ag replacement)."""
        mask = graph.mask.astype(self.dtype)
        return mask / mask.sum(axis=-1, keepdims=True)

    def dwgs_embedding(self, a_g: Tensor) -> Tensor:
        return T.matmul(a_g, self.b_node.value)  # [B, T, N, d_f]

    def adaptive_embedding(self, batch_size: int) -> Tensor:
        e_a = self.e_a.value  # [T, N, d_f]
        t, n, d = e_a.shape
        zeros = Tensor(np.zeros((batch_size, 1, 1, 1), dtype=self.dtype))
        return T.reshape(e_a, (1, t, n, d)) + zeros

    # --------------------------------------------------------------- forward

    def forward(self, x: Tensor, tod_idx, dow_idx, graph: PredefinedGraph):
        """Assemble Z = (E_f | E_g | E_a | E_t); returns (Z, DynamicGraph|None)."""
        v = self.config.variant
        batch = x.shape[0]
        parts = [self.feature_embedding(x)]
        dyn = None
        if v not in ("no_eg", "no_es"):
            if v == "no_ag":
                a_static = Tensor(
                    np.broadcast_to(
                        self.static_adjacency(graph),
                        (batch, self.config.t_in, self.n_nodes, self.n_nodes),
                    ).copy()
                )
                parts.append(self.dwgs_embedding(a_static))
            else:
                dyn = self.dynamic_adjacency(x, graph)
                parts.append(self.dwgs_embedding(dyn.a_g))
        if v != "no_es":
            parts.append(self.adaptive_embedding(batch))
        if v != "no_et":
            parts.append(self.temporal_embedding(tod_idx, dow_idx))
        return T.concat(parts, axis=-1), dyn


def export_dynamic_graph(a_g: np.ndarray, selections, out_dir):
    """Write A_g slices as CSV matrices, one file per (sample, timestep)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for b, t in selections:
        path = out_dir / f"a_g_sample{b}_t{t}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in a_g[b, t]:
                writer.writerow([f"{v:.10g}" for v in row])
        written.append(path)
    return written
