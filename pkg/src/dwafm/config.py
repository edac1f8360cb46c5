"""Run configuration: defaults, YAML loading, override handling."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

VARIANTS = (
    "full",
    "no_ag",
    "no_eg",
    "no_es",
    "no_et",
    "no_fft",
    "no_spatial",
    "no_temporal",
)
TEMPORAL_KINDS = ("fre_mlp", "cnn", "attention")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    # model
    d_f: int = 20
    m: int = 1
    t_in: int = 12
    t_out: int = 12
    dropout: float = 0.1
    scaling_mode: str = "half_dh"  # attention scale 1/sqrt(d_h/2) or 1/sqrt(d_h)
    init_scheme: str = "xavier_uniform"
    variant: str = "full"
    temporal_kind: str = "fre_mlp"
    temporal_residual: str = "embedding"  # or "block_input"
    fre_mlp_expansion: int = 1
    cnn_kernel: int = 3
    precision: str = "float32"
    # training
    lr: float = 0.001
    batch_size: int = 64
    epochs: int = 80
    seed: int = 0
    grad_clip_norm: float = 0.0  # 0 disables; NaN-recovery aid only
    # data
    data_dir: str = ""
    out_dir: str = "runs/latest"
    threads: int = 0  # 0 = leave BLAS threading alone

    def validate(self):
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.batch_size < 1 or self.epochs < 1 or self.m < 1:
            raise ConfigError("batch_size, epochs and m must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must be in [0, 1)")
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; pick from {VARIANTS}")
        if self.temporal_kind not in TEMPORAL_KINDS:
            raise ConfigError(
                f"unknown temporal_kind {self.temporal_kind!r}; pick from {TEMPORAL_KINDS}"
            )
        if self.scaling_mode not in ("half_dh", "dh"):
            raise ConfigError("scaling_mode must be 'half_dh' or 'dh'")
        if self.temporal_residual not in ("embedding", "block_input"):
            raise ConfigError("temporal_residual must be 'embedding' or 'block_input'")
        if self.precision not in ("float32", "float64"):
            raise ConfigError("precision must be 'float32' or 'float64'")
        return self

    @property
    def d_h(self) -> int:
        widths = {"no_eg": 4, "no_es": 3, "no_et": 3}
        return widths.get(self.variant, 5) * self.d_f

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**values).validate()

    @classmethod
    def from_file(cls, path, overrides: dict | None = None) -> "RunConfig":
        values = yaml.safe_load(Path(path).read_text()) or {}
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: expected a mapping at top level")
        if overrides:
            values.update(overrides)
        return cls.from_dict(values)

    def save(self, path):
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))


def parse_overrides(pairs) -> dict:
    """Turn CLI `key=value` strings into typed config values."""
    defaults = RunConfig()
    out = {}
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value")
        key, raw = pair.split("=", 1)
        key = key.strip()
        if not hasattr(defaults, key):
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(defaults, key)
        if isinstance(current, bool):
            out[key] = raw.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            out[key] = int(raw)
        elif isinstance(current, float):
            out[key] = float(raw)
        else:
            out[key] = raw
    return out
