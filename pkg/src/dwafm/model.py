"""Full forecaster: embedding -> m x (spatial, temporal) blocks -> regression.

Variants swap or drop single components so the ablation harness can
attribute performance; the temporal kind swaps the time mixer for the
module-comparison study.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import yaml

from . import tensor as T
from .config import RunConfig
from .data import NormStats, PredefinedGraph, read_tensor_file, write_tensor_file
from .embedding import EmbeddingLayer
from .optim import make_param, make_zeros
from .rng import RngStreams
from .spatial import SpatialLayer
from .temporal import build_temporal
from .tensor import DTYPES, Parameter, Tensor


class DwafmModel:
    def __init__(
        self,
        config: RunConfig,
        graph: PredefinedGraph,
        stats: NormStats,
        n_day: int,
        rng_init,
        linear_temporal=False,
    ):
        config.validate()
        self.config = config
        self.graph = graph
        self.stats = stats
        self.n_day = n_day
        self.dtype = DTYPES[config.precision]
        dtype = self.dtype
        n = graph.n_nodes

        self.embedding = EmbeddingLayer(config, n, n_day, rng_init, dtype)
        self.blocks = []
        for i in range(config.m):
            spatial = (
                None
                if config.variant == "no_spatial"
                else SpatialLayer(config, rng_init, dtype, name=f"block{i}.spatial")
            )
            temporal = (
                None
                if config.variant == "no_temporal"
                else build_temporal(
                    config, rng_init, dtype, name=f"block{i}.temporal",
                    linear_mode=linear_temporal,
                )
            )
            self.blocks.append((spatial, temporal))
        d_h = config.d_h
        self.reg_w = make_param(
            "regression.w", (config.t_in * d_h, config.t_out),
            config.init_scheme, rng_init, dtype,
        )
        self.reg_b = make_zeros("regression.b", (config.t_out,), dtype)

    # ---------------------------------------------------------------- params

    def params(self) -> list[Parameter]:
        out = list(self.embedding.params())
        for spatial, temporal in self.blocks:
            if spatial is not None:
                out.extend(spatial.params())
            if temporal is not None:
                out.extend(temporal.params())
        out.extend([self.reg_w, self.reg_b])
        return out

    def param_count(self) -> int:
        return sum(p.value.size for p in self.params())

    # --------------------------------------------------------------- forward

    def forward(self, batch, training=False, rng=None, return_graph=False):
        """batch dict of arrays -> predictions [B, T_f, N] in physical units."""
        cfg = self.config
        x = Tensor(np.asarray(batch["x"], dtype=self.dtype))
        z, dyn = self.embedding.forward(x, batch["tod"], batch["dow"], self.graph)
        z_cur = z
        for spatial, temporal in self.blocks:
            z_hat = z_cur if spatial is None else spatial.forward(z_cur)
            if temporal is None:
                z_cur = z_hat
            else:
                residual = z if cfg.temporal_residual == "embedding" else z_hat
                z_cur = temporal.forward(z_hat, training, rng) + residual
        b, t, n, d_h = z_cur.shape
        per_node = T.reshape(T.transpose(z_cur, (0, 2, 1, 3)), (b, n, t * d_h))
        pred = T.matmul(per_node, self.reg_w) + self.reg_b.value  # [B, N, T_f]
        pred = T.transpose(pred, (0, 2, 1))  # [B, T_f, N]
        pred = T.scale(pred, self.stats.std) + Tensor(
            np.array(self.stats.mean, dtype=self.dtype)
        )
        if return_graph:
            return pred, dyn
        return pred

    # ----------------------------------------------------------- persistence

    def save(self, ckpt_dir, extra: dict | None = None):
        ckpt_dir = Path(ckpt_dir)
        ckpt_dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "config": self.config.to_dict(),
            "stats": {"mean": self.stats.mean, "std": self.stats.std},
            "n_day": self.n_day,
            "params": {},
        }
        if extra:
            manifest.update(extra)
        for p in self.params():
            manifest["params"][p.name] = {
                "shape": list(p.shape),
                "step_count": p.step_count,
            }
            write_tensor_file(ckpt_dir / f"{p.name}.value.dwaf", p.value.data)
            write_tensor_file(ckpt_dir / f"{p.name}.adam_m.dwaf", p.adam_m)
            write_tensor_file(ckpt_dir / f"{p.name}.adam_v.dwaf", p.adam_v)
        (ckpt_dir / "manifest.yaml").write_text(
            yaml.safe_dump(manifest, sort_keys=True)
        )

    @classmethod
    def load(cls, ckpt_dir, graph: PredefinedGraph) -> "DwafmModel":
        ckpt_dir = Path(ckpt_dir)
        manifest = yaml.safe_load((ckpt_dir / "manifest.yaml").read_text())
        config = RunConfig.from_dict(manifest["config"])
        stats = NormStats(**manifest["stats"])
        rng = RngStreams(config.seed).get("init")
        model = cls(config, graph, stats, manifest["n_day"], rng)
        for p in model.params():
            info = manifest["params"][p.name]
            if list(p.shape) != info["shape"]:
                raise ValueError(
                    f"checkpoint shape {info['shape']} != model shape "
                    f"{list(p.shape)} for {p.name}"
                )
            p.assign(read_tensor_file(ckpt_dir / f"{p.name}.value.dwaf"))
            p.adam_m = read_tensor_file(ckpt_dir / f"{p.name}.adam_m.dwaf").astype(
                model.dtype
            )
            p.adam_v = read_tensor_file(ckpt_dir / f"{p.name}.adam_v.dwaf").astype(
                model.dtype
            )
            p.step_count = int(info["step_count"])
        return model


def make_model(
    config: RunConfig,
    graph: PredefinedGraph,
    stats: NormStats,
    n_day: int,
    linear_temporal=False,
) -> DwafmModel:
    """Build a model (any variant/temporal kind) from the init RNG stream."""
    rng = RngStreams(config.seed).get("init")
    return DwafmModel(config, graph, stats, n_day, rng, linear_temporal)
