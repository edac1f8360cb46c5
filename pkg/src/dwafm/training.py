"""Training loop, masked metrics, HI baseline and gradient checking."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import tensor as T
from .config import RunConfig
from .data import Dataset, denormalize, iter_batches
from .model import DwafmModel, make_model
from .optim import adam_step
from .rng import RngStreams
from .tensor import Tensor, backward

ZERO_MASK_THRESHOLD = 1e-4


class NumericalFault(RuntimeError):
    """Loss went non-finite; carries the diagnostic context."""


@dataclass
class MetricsReport:
    mae: float
    rmse: float
    mape_pct: float
    per_horizon: list | None = None
    wall_seconds_per_epoch: float | None = None

    def to_dict(self):
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "mape_pct": self.mape_pct,
            "per_horizon": self.per_horizon,
            "wall_seconds_per_epoch": self.wall_seconds_per_epoch,
        }


# ------------------------------------------------------------------- loss

def masked_mae_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean |pred - target| over entries with |target| above the zero mask."""
    target = np.asarray(target, dtype=pred.data.dtype)
    if pred.shape != target.shape:
        raise T.ShapeError(f"pred {pred.shape} vs target {target.shape}")
    mask = (np.abs(target) > ZERO_MASK_THRESHOLD).astype(pred.data.dtype)
    count = max(float(mask.sum()), 1.0)
    err = T.absolute(pred - Tensor(target)) * Tensor(mask)
    return T.scale(T.tensor_sum(err), 1.0 / count)


def _masked_metric_sums(pred: np.ndarray, target: np.ndarray):
    mask = np.abs(target) > ZERO_MASK_THRESHOLD
    err = np.where(mask, pred - target, 0.0)
    return (
        np.abs(err).sum(),
        (err**2).sum(),
        np.abs(np.divide(err, target, out=np.zeros_like(err), where=mask)).sum(),
        mask.sum(),
    )


# --------------------------------------------------------------- evaluation

def evaluate_predictions(preds, targets, per_horizon=False) -> MetricsReport:
    """Masked MAE / RMSE / MAPE over concatenated [*, T_f, N] arrays."""
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.size == 0:
        raise ValueError("empty evaluation set")
    abs_sum, sq_sum, ape_sum, count = _masked_metric_sums(preds, targets)
    count = max(count, 1)
    horizon = None
    if per_horizon:
        horizon = []
        for h in range(preds.shape[1]):
            a, s, p, c = _masked_metric_sums(preds[:, h], targets[:, h])
            c = max(c, 1)
            horizon.append(
                {
                    "mae": float(a / c),
                    "rmse": float(np.sqrt(s / c)),
                    "mape_pct": float(100 * p / c),
                }
            )
    return MetricsReport(
        mae=float(abs_sum / count),
        rmse=float(np.sqrt(sq_sum / count)),
        mape_pct=float(100.0 * ape_sum / count),
        per_horizon=horizon,
    )


def evaluate(model: DwafmModel, samples, batch_size=64, per_horizon=False):
    preds, targets = [], []
    for batch in iter_batches(samples, batch_size):
        preds.append(model.forward(batch, training=False).data)
        targets.append(batch["y"])
    return evaluate_predictions(
        np.concatenate(preds), np.concatenate(targets), per_horizon
    )


def hi_baseline(samples, stats, per_horizon=False) -> MetricsReport:
    """Historical Inertia: each sample's input window is its own forecast."""
    first = samples[0]
    if first.x.shape[0] != first.y.shape[0]:
        raise ValueError("HI baseline requires T == T_f")
    preds = np.stack([denormalize(s.x[:, :, 0], stats) for s in samples])
    targets = np.stack([s.y for s in samples])
    return evaluate_predictions(preds, targets, per_horizon)


# ----------------------------------------------------------------- training

def _grad_norm(params):
    return float(np.sqrt(sum(float((p.grad**2).sum()) for p in params)))


def train(
    model: DwafmModel,
    dataset: Dataset,
    config: RunConfig,
    out_dir,
    streams: RngStreams | None = None,
    start_epoch: int = 0,
    best_val_mae: float = np.inf,
    log_rows: list | None = None,
):
    """Algorithm-1 loop: shuffled batches, masked MAE, Adam, best-val model."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if streams is None:
        streams = RngStreams(config.seed)
    shuffle_rng = streams.get("shuffle")
    dropout_rng = streams.get("dropout")
    params = model.params()
    log_rows = list(log_rows or [])

    for epoch in range(start_epoch, config.epochs):
        tic = time.perf_counter()
        losses = []
        for batch_i, batch in enumerate(
            iter_batches(dataset.train, config.batch_size, shuffle_rng)
        ):
            pred = model.forward(batch, training=True, rng=dropout_rng)
            loss = masked_mae_loss(pred, batch["y"])
            if not np.isfinite(loss.data):
                raise NumericalFault(
                    f"non-finite loss at epoch {epoch} batch {batch_i}; "
                    f"param grad norm {_grad_norm(params):.3e}"
                )
            backward(loss)
            if config.grad_clip_norm > 0:
                norm = _grad_norm(params)
                if norm > config.grad_clip_norm:
                    factor = config.grad_clip_norm / norm
                    for p in params:
                        p.grad *= factor
            adam_step(params, config.lr)
            losses.append(float(loss.data))
        val = evaluate(model, dataset.val, config.batch_size)
        seconds = time.perf_counter() - tic
        row = {
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_mae": val.mae,
            "val_rmse": val.rmse,
            "val_mape": val.mape_pct,
            "seconds": seconds,
        }
        log_rows.append(row)
        if val.mae < best_val_mae:
            best_val_mae = val.mae
            model.save(out_dir / "best", extra={"epoch": epoch, "val_mae": float(val.mae)})
        model.save(
            out_dir / "latest",
            extra={
                "epoch": epoch,
                "rng": streams.state(),
                "best_val_mae": float(best_val_mae),
            },
        )
        _write_log(out_dir / "epochs.csv", log_rows)

    best = DwafmModel.load(out_dir / "best", model.graph)
    test = evaluate(best, dataset.test, config.batch_size, per_horizon=True)
    if log_rows:
        test.wall_seconds_per_epoch = float(
            np.mean([r["seconds"] for r in log_rows])
        )
    (out_dir / "final_report.yaml").write_text(
        yaml.safe_dump({"test": test.to_dict(), "best_val_mae": float(best_val_mae)})
    )
    return best, log_rows, test


def resume(out_dir, dataset: Dataset):
    """Continue a run from its `latest` checkpoint to config.epochs."""
    out_dir = Path(out_dir)
    manifest = yaml.safe_load((out_dir / "latest" / "manifest.yaml").read_text())
    config = RunConfig.from_dict(manifest["config"])
    model = DwafmModel.load(out_dir / "latest", dataset.graph)
    streams = RngStreams.from_state(manifest["rng"])
    log_rows = []
    log_path = out_dir / "epochs.csv"
    if log_path.exists():
        with open(log_path, newline="") as fh:
            for row in csv.DictReader(fh):
                if int(row["epoch"]) <= manifest["epoch"]:
                    log_rows.append(
                        {
                            "epoch": int(row["epoch"]),
                            "train_loss": float(row["train_loss"]),
                            "val_mae": float(row["val_mae"]),
                            "val_rmse": float(row["val_rmse"]),
                            "val_mape": float(row["val_mape"]),
                            "seconds": float(row["seconds"]),
                        }
                    )
    return train(
        model,
        dataset,
        config,
        out_dir,
        streams=streams,
        start_epoch=manifest["epoch"] + 1,
        best_val_mae=float(manifest["best_val_mae"]),
        log_rows=log_rows,
    )


def _write_log(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=["epoch", "train_loss", "val_mae", "val_rmse", "val_mape", "seconds"],
        )
        writer.writeheader()
        for row in rows:
            out = dict(row)
            # full precision so fixed-seed runs compare bit-identically
            for key in ("train_loss", "val_mae", "val_rmse", "val_mape"):
                out[key] = repr(float(row[key]))
            out["seconds"] = f"{row['seconds']:.3f}"
            writer.writerow(out)


# ---------------------------------------------------------------- gradcheck

def toy_config(variant="full", temporal_kind="fre_mlp", seed=0) -> RunConfig:
    return RunConfig(
        d_f=3,
        m=1,
        t_in=4,
        t_out=2,
        dropout=0.1,  # inert: gradcheck runs in eval mode
        precision="float64",
        variant=variant,
        temporal_kind=temporal_kind,
        seed=seed,
        batch_size=2,
        epochs=1,
    )


def make_toy_batch(config, n_nodes=4, n_day=6, batch=2, seed=0):
    rng = np.random.default_rng(seed)
    return {
        "x": rng.normal(size=(batch, config.t_in, n_nodes, 1)),
        "tod": rng.integers(0, n_day, size=(batch, config.t_in)),
        "dow": rng.integers(0, 7, size=(batch, config.t_in)),
        "y": rng.normal(loc=5.0, scale=1.0, size=(batch, config.t_out, n_nodes)),
    }


def gradcheck(
    model: DwafmModel, batch, h=1e-5, threshold=1e-4, corrupt_param=None
):
    """Central finite differences vs analytic gradients for every parameter.

    Returns (passed, max_rel_err, per_param dict). `corrupt_param` perturbs
    one analytic gradient, as a negative control for the checker itself.
    """
    if model.dtype != np.float64:
        raise ValueError("gradcheck requires a float64 model")
    params = model.params()
    for p in params:
        p.zero_grad()
    loss = masked_mae_loss(model.forward(batch, training=False), batch["y"])
    backward(loss)
    analytic = {p.name: p.grad.copy() for p in params}
    if corrupt_param is not None:
        analytic[corrupt_param] += 1.0

    def loss_at():
        out = masked_mae_loss(model.forward(batch, training=False), batch["y"])
        return float(out.data)

    max_err = 0.0
    per_param = {}
    for p in params:
        flat = p.value.data.reshape(-1)
        num = np.zeros_like(flat)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_at()
            flat[i] = orig - h
            down = loss_at()
            flat[i] = orig
            num[i] = (up - down) / (2 * h)
        a = analytic[p.name].reshape(-1)
        denom = np.maximum(np.maximum(np.abs(a), np.abs(num)), 1e-6)
        err = float((np.abs(a - num) / denom).max())
        per_param[p.name] = err
        max_err = max(max_err, err)
    for p in params:
        p.zero_grad()
    return max_err <= threshold, max_err, per_param


def gradcheck_variant(variant, temporal_kind="fre_mlp", seed=1):
    """Build the 4-node toy for one variant and run the full grad check.

    The default seed keeps every ReLU pre-activation farther than h from
    zero, so no kink falls inside the central-difference interval.
    """
    from .data import NormStats, PredefinedGraph

    config = toy_config(variant, temporal_kind, seed)
    graph = PredefinedGraph.from_edges([(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0)], 4)
    stats = NormStats(mean=5.0, std=2.0)
    model = make_model(config, graph, stats, n_day=6)
    batch = make_toy_batch(config, seed=seed)
    return gradcheck(model, batch)
