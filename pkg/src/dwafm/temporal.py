"""Temporal mixing layers.

The default is the frequency-domain MLP block: real FFT along time,
cross-computed real/imag MLPs (mimicking complex multiplication), inverse
FFT. Time-domain MLP, causal CNN and time-axis self-attention variants
exist for the ablation and temporal-module comparisons.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .optim import make_param, make_zeros
from .tensor import Tensor


class Mlp:
    """FC2(Dropout(GELU(FC1(.)))) on the feature axis (MLP-Mixer style)."""

    def __init__(self, config, rng, dtype, name, linear_mode=False):
        d_h = config.d_h
        hidden = d_h * config.fre_mlp_expansion
        scheme = config.init_scheme
        self.fc1_w = make_param(f"{name}.fc1_w", (d_h, hidden), scheme, rng, dtype)
        self.fc1_b = make_zeros(f"{name}.fc1_b", (hidden,), dtype)
        self.fc2_w = make_param(f"{name}.fc2_w", (hidden, d_h), scheme, rng, dtype)
        self.fc2_b = make_zeros(f"{name}.fc2_b", (d_h,), dtype)
        self.dropout_p = config.dropout
        self.linear_mode = linear_mode  # bypass GELU+dropout (oracle tests)

    def params(self):
        return [self.fc1_w, self.fc1_b, self.fc2_w, self.fc2_b]

    def forward(self, x: Tensor, training: bool, rng=None) -> Tensor:
        h = T.matmul(x, self.fc1_w) + self.fc1_b.value
        if not self.linear_mode:
            h = T.dropout(T.gelu(h), self.dropout_p, training, rng)
        return T.matmul(h, self.fc2_w) + self.fc2_b.value


class FreMlpTemporal:
    """Cross-computed frequency-domain MLPs."""

    def __init__(self, config, rng, dtype, name="temporal", linear_mode=False):
        self.t_in = config.t_in
        self.mlp_r = Mlp(config, rng, dtype, f"{name}.mlp_r", linear_mode)
        self.mlp_i = Mlp(config, rng, dtype, f"{name}.mlp_i", linear_mode)

    def params(self):
        return self.mlp_r.params() + self.mlp_i.params()

    def forward(self, z: Tensor, training: bool, rng=None) -> Tensor:
        # time axis to -2 so the FFT sees [..., T, d_h]
        zt = T.transpose(z, (0, 2, 1, 3))  # [B, N, T, d_h]
        zf = T.rfft_time(zt)
        out_r = self.mlp_r.forward(zf.real, training, rng) - self.mlp_i.forward(
            zf.imag, training, rng
        )
        out_i = self.mlp_i.forward(zf.real, training, rng) + self.mlp_r.forward(
            zf.imag, training, rng
        )
        back = T.irfft_time(T.ComplexTensor(out_r, out_i), self.t_in)
        return T.transpose(back, (0, 2, 1, 3))


class TimeMlpTemporal:
    """Single time-domain MLP (the FFT-ablated temporal layer)."""

    def __init__(self, config, rng, dtype, name="temporal"):
        self.mlp = Mlp(config, rng, dtype, f"{name}.mlp")

    def params(self):
        return self.mlp.params()

    def forward(self, z: Tensor, training: bool, rng=None) -> Tensor:
        return self.mlp.forward(z, training, rng)


class CnnTemporal:
    """Causal 1-D convolution over the time axis, shape-preserving."""

    def __init__(self, config, rng, dtype, name="temporal"):
        d_h = config.d_h
        self.kernel = config.cnn_kernel
        self.dtype = dtype
        self.w = make_param(
            f"{name}.cnn_w", (d_h, d_h, self.kernel), config.init_scheme, rng, dtype
        )
        self.b = make_zeros(f"{name}.cnn_b", (d_h,), dtype)

    def params(self):
        return [self.w, self.b]

    def forward(self, z: Tensor, training: bool, rng=None) -> Tensor:
        b, t, n, d_h = z.shape
        x = T.reshape(T.transpose(z, (0, 2, 3, 1)), (b * n, d_h, t))
        pad = Tensor(np.zeros((b * n, d_h, self.kernel - 1), dtype=self.dtype))
        x = T.concat([pad, x], axis=-1)  # left pad keeps the conv causal
        h = T.conv1d(x, self.w, self.b)  # [B*N, d_h, T]
        return T.transpose(T.reshape(h, (b, n, d_h, t)), (0, 3, 1, 2))


class AttentionTemporal:
    """Scaled dot-product self-attention over the time axis."""

    def __init__(self, config, rng, dtype, name="temporal"):
        d_h = config.d_h
        scheme = config.init_scheme
        self.scale = 1.0 / np.sqrt(d_h)
        self.w_q = make_param(f"{name}.att_w_q", (d_h, d_h), scheme, rng, dtype)
        self.w_k = make_param(f"{name}.att_w_k", (d_h, d_h), scheme, rng, dtype)
        self.w_v = make_param(f"{name}.att_w_v", (d_h, d_h), scheme, rng, dtype)

    def params(self):
        return [self.w_q, self.w_k, self.w_v]

    def forward(self, z: Tensor, training: bool, rng=None) -> Tensor:
        zt = T.transpose(z, (0, 2, 1, 3))  # [B, N, T, d_h]
        q = T.matmul(zt, self.w_q)
        k = T.matmul(zt, self.w_k)
        v = T.matmul(zt, self.w_v)
        weights = T.masked_softmax_lastdim(T.scale(T.matmul(q, T.transpose(k)), self.scale))
        return T.transpose(T.matmul(weights, v), (0, 2, 1, 3))


def build_temporal(config, rng, dtype, name="temporal", linear_mode=False):
    if config.variant == "no_fft":
        return TimeMlpTemporal(config, rng, dtype, name)
    if config.temporal_kind == "fre_mlp":
        return FreMlpTemporal(config, rng, dtype, name, linear_mode)
    if config.temporal_kind == "cnn":
        return CnnTemporal(config, rng, dtype, name)
    if config.temporal_kind == "attention":
        return AttentionTemporal(config, rng, dtype, name)
    raise ValueError(f"unknown temporal kind {config.temporal_kind!r}")
