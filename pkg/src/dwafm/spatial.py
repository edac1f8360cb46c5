"""Spatial layer: reduce over time, node self-attention, elevate back.

The two 1D convolutions use the time axis as channels with kernel 1, so
the feature width d_h passes through untouched: T -> ceil(T/2) -> 1 on the
way down and the mirror schedule on the way up.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .optim import make_ones, make_param, make_zeros
from .tensor import Tensor


class SpatialLayer:
    def __init__(self, config, rng, dtype, name="spatial"):
        t_in = config.t_in
        d_h = config.d_h
        t_mid = (t_in + 1) // 2
        scheme = config.init_scheme
        self.t_in = t_in
        self.d_h = d_h
        self.scale = 1.0 / np.sqrt(d_h / 2 if config.scaling_mode == "half_dh" else d_h)

        def conv(tag, c_out, c_in):
            w = make_param(f"{name}.{tag}_w", (c_out, c_in, 1), scheme, rng, dtype)
            b = make_zeros(f"{name}.{tag}_b", (c_out,), dtype)
            return w, b

        self.conv_down_1 = conv("conv_down_1", t_mid, t_in)
        self.conv_down_2 = conv("conv_down_2", 1, t_mid)
        self.w_q = make_param(f"{name}.w_q", (d_h, d_h), scheme, rng, dtype)
        self.w_k = make_param(f"{name}.w_k", (d_h, d_h), scheme, rng, dtype)
        self.w_v = make_param(f"{name}.w_v", (d_h, d_h), scheme, rng, dtype)
        self.conv_up_1 = conv("conv_up_1", t_mid, 1)
        self.conv_up_2 = conv("conv_up_2", t_in, t_mid)
        self.ln_gamma = make_ones(f"{name}.ln_gamma", (d_h,), dtype)
        self.ln_beta = make_zeros(f"{name}.ln_beta", (d_h,), dtype)

    def params(self):
        out = [self.w_q, self.w_k, self.w_v, self.ln_gamma, self.ln_beta]
        for w, b in (self.conv_down_1, self.conv_down_2, self.conv_up_1, self.conv_up_2):
            out.extend([w, b])
        return out

    def reduce(self, z: Tensor) -> Tensor:
        """[B, T, N, d_h] -> [B, N, d_h] via Conv1d(ReLU(Conv1d(.)))."""
        b, t, n, d_h = z.shape
        flat = T.reshape(z, (b, t, n * d_h))
        h = T.relu(T.conv1d(flat, *self.conv_down_1))
        h = T.conv1d(h, *self.conv_down_2)  # [B, 1, N*d_h]
        return T.reshape(h, (b, n, d_h))

    def attention(self, z_r: Tensor) -> Tensor:
        """Unmasked scaled self-attention over nodes."""
        q = T.matmul(z_r, self.w_q)
        k = T.matmul(z_r, self.w_k)
        v = T.matmul(z_r, self.w_v)
        weights = T.masked_softmax_lastdim(T.scale(T.matmul(q, T.transpose(k)), self.scale))
        return T.matmul(weights, v)

    def elevate(self, z_s: Tensor) -> Tensor:
        """[B, N, d_h] -> [B, T, N, d_h], mirror of reduce."""
        b, n, d_h = z_s.shape
        flat = T.reshape(z_s, (b, 1, n * d_h))
        h = T.relu(T.conv1d(flat, *self.conv_up_1))
        h = T.conv1d(h, *self.conv_up_2)  # [B, T, N*d_h]
        return T.reshape(h, (b, self.t_in, n, d_h))

    def forward(self, z: Tensor) -> Tensor:
        """LayerNorm(elevate(attention(reduce(Z))) + Z)."""
        mixed = self.elevate(self.attention(self.reduce(z)))
        return T.layer_norm(mixed + z, self.ln_gamma, self.ln_beta)
