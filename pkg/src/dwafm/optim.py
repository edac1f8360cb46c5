"""Adam with bias correction, plus the initialization schemes."""

from __future__ import annotations

import numpy as np

from .tensor import Parameter

INIT_SCHEMES = ("xavier_uniform", "kaiming_uniform", "orthogonal", "xavier_normal")


def adam_step(params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected Adam update for every parameter; grads are zeroed."""
    for p in params:
        p.step_count += 1
        g = p.grad
        p.adam_m = beta1 * p.adam_m + (1.0 - beta1) * g
        p.adam_v = beta2 * p.adam_v + (1.0 - beta2) * g * g
        m_hat = p.adam_m / (1.0 - beta1**p.step_count)
        v_hat = p.adam_v / (1.0 - beta2**p.step_count)
        p.value.data = p.value.data - lr * m_hat / (np.sqrt(v_hat) + eps)
        p.zero_grad()


def _fans(shape):
    if len(shape) == 1:
        return shape[0], shape[0]
    fan_in = int(np.prod(shape[1:]))
    fan_out = shape[0]
    return fan_in, fan_out


def init_array(shape, scheme, rng, dtype):
    """Draw an initial weight array under one of the four supported schemes."""
    shape = tuple(shape)
    fan_in, fan_out = _fans(shape)
    if scheme == "xavier_uniform":
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        arr = rng.uniform(-limit, limit, size=shape)
    elif scheme == "kaiming_uniform":
        limit = np.sqrt(6.0 / fan_in)
        arr = rng.uniform(-limit, limit, size=shape)
    elif scheme == "xavier_normal":
        std = np.sqrt(2.0 / (fan_in + fan_out))
        arr = rng.normal(0.0, std, size=shape)
    elif scheme == "orthogonal":
        flat = (shape[0], int(np.prod(shape[1:])) if len(shape) > 1 else shape[0])
        a = rng.normal(size=(max(flat), min(flat)))
        q, r = np.linalg.qr(a)
        q = q * np.sign(np.diag(r))
        if flat[0] < flat[1]:
            q = q.T
        arr = q[: flat[0], : flat[1]].reshape(shape)
    else:
        raise ValueError(f"unknown init scheme {scheme!r}; pick from {INIT_SCHEMES}")
    return arr.astype(dtype)


def make_param(name, shape, scheme, rng, dtype) -> Parameter:
    return Parameter(init_array(shape, scheme, rng, dtype), name=name)


def make_zeros(name, shape, dtype) -> Parameter:
    return Parameter(np.zeros(shape, dtype=dtype), name=name)


def make_ones(name, shape, dtype) -> Parameter:
    return Parameter(np.ones(shape, dtype=dtype), name=name)
