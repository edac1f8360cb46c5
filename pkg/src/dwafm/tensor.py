"""Minimal numpy-backed tensors with reverse-mode autodiff.

Every op records its parents and a vjp (vector-Jacobian product) closure.
Calling ``backward`` on a scalar walks the tape in reverse topological
order and accumulates gradients into every reachable Parameter.

Tensors are immutable once produced by an op; only the training step
mutates Parameter values.
"""

from __future__ import annotations

import numpy as np

DTYPES = {"float32": np.float32, "float64": np.float64}


class ShapeError(ValueError):
    """Raised when operand shapes do not satisfy an op's contract."""


class DegenerateRowError(ValueError):
    """A softmax slice whose mask admits no entries (would produce NaN)."""


class Tensor:
    """A dense nd-array plus the tape bookkeeping for autodiff."""

    __slots__ = ("data", "parents", "vjp", "grad", "param")

    def __init__(self, data, parents=(), vjp=None, dtype=None):
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        self.data = arr
        self.parents = tuple(parents)
        self.vjp = vjp
        self.grad = None
        self.param = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype})"

    # operator sugar -------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)


class ComplexTensor:
    """Real/imaginary pair produced by the real FFT."""

    __slots__ = ("real", "imag")

    def __init__(self, real: Tensor, imag: Tensor):
        if real.shape != imag.shape:
            raise ShapeError(
                f"real {real.shape} and imag {imag.shape} parts must match"
            )
        self.real = real
        self.imag = imag

    @property
    def shape(self):
        return self.real.shape


class Parameter:
    """A learnable tensor with its gradient accumulator and Adam state."""

    def __init__(self, data, name=""):
        arr = np.asarray(data)
        self.name = name
        self.value = Tensor(arr)
        self.value.param = self
        self.grad = np.zeros_like(arr)
        self.adam_m = np.zeros_like(arr)
        self.adam_v = np.zeros_like(arr)
        self.step_count = 0

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def assign(self, data):
        """Replace the value in place, resetting nothing else."""
        arr = np.asarray(data, dtype=self.value.data.dtype)
        if arr.shape != self.value.data.shape:
            raise ShapeError(
                f"assign shape {arr.shape} != parameter shape {self.value.data.shape}"
            )
        self.value.data = arr

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.shape})"


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Parameter):
        return x.value
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x), dtype=dtype)


def _unbroadcast(grad, shape):
    """Sum `grad` down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# ---------------------------------------------------------------- arithmetic

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data + b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    return Tensor(out_data, (a, b), vjp)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data - b.data

    def vjp(g):
        return _unbroadcast(g, a.data.shape), -_unbroadcast(g, b.data.shape)

    return Tensor(out_data, (a, b), vjp)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out_data = a.data * b.data

    def vjp(g):
        return (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        )

    return Tensor(out_data, (a, b), vjp)


def scale(a, s: float):
    a = as_tensor(a)
    s = float(s)

    def vjp(g):
        return (g * s,)

    return Tensor(a.data * s, (a,), vjp)


def square(a):
    a = as_tensor(a)

    def vjp(g):
        return (g * (2.0 * a.data),)

    return Tensor(a.data * a.data, (a,), vjp)


def absolute(a):
    a = as_tensor(a)

    def vjp(g):
        return (g * np.sign(a.data),)

    return Tensor(np.abs(a.data), (a,), vjp)


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError(f"matmul needs >=2-d operands, got {a.shape} x {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} x {b.shape}")
    out_data = np.matmul(a.data, b.data)

    def vjp(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    return Tensor(out_data, (a, b), vjp)


# ------------------------------------------------------------- reshaping

def reshape(a, shape):
    a = as_tensor(a)
    out_data = a.data.reshape(shape)

    def vjp(g):
        return (g.reshape(a.data.shape),)

    return Tensor(out_data, (a,), vjp)


def transpose(a, axes=None):
    a = as_tensor(a)
    if axes is None:
        axes = list(range(a.ndim))
        axes[-1], axes[-2] = axes[-2], axes[-1]
    axes = tuple(axes)
    inv = np.argsort(axes)

    def vjp(g):
        return (np.transpose(g, inv),)

    return Tensor(np.transpose(a.data, axes), (a,), vjp)


def concat(tensors, axis=-1):
    tensors = [as_tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def vjp(g):
        return tuple(
            np.take(g, range(offsets[i], offsets[i + 1]), axis=axis)
            for i in range(len(tensors))
        )

    return Tensor(out_data, tensors, vjp)


def take(a, key):
    """Basic slicing; gradient scatters back into the sliced region."""
    a = as_tensor(a)
    out_data = a.data[key]

    def vjp(g):
        full = np.zeros_like(a.data)
        np.add.at(full, key, g)
        return (full,)

    return Tensor(out_data, (a,), vjp)


def gather_rows(table, idx):
    """Row lookup table[idx] for integer index arrays (embedding lookup)."""
    table = as_tensor(table)
    idx = np.asarray(idx)
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise IndexError(
            f"index out of range [0, {table.shape[0]}): "
            f"min={idx.min()}, max={idx.max()}"
        )
    out_data = table.data[idx]

    def vjp(g):
        full = np.zeros_like(table.data)
        np.add.at(full, idx, g)
        return (full,)

    return Tensor(out_data, (table,), vjp)


# ------------------------------------------------------------- reductions

def tensor_sum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def vjp(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.data.shape).copy(),)

    return Tensor(out_data, (a,), vjp)


def tensor_mean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    n = a.size if axis is None else a.data.shape[axis]
    return scale(tensor_sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


# ------------------------------------------------------------ nonlinearities

def relu(a):
    a = as_tensor(a)
    out_data = np.maximum(a.data, 0.0)

    def vjp(g):
        return (g * (a.data > 0),)

    return Tensor(out_data, (a,), vjp)


_GELU_C = np.sqrt(2.0 / np.pi)


def gelu(a):
    """GELU, tanh approximation."""
    a = as_tensor(a)
    x = a.data
    inner = _GELU_C * (x + 0.044715 * x**3)
    t = np.tanh(inner)
    out_data = 0.5 * x * (1.0 + t)

    def vjp(g):
        dinner = _GELU_C * (1.0 + 3 * 0.044715 * x**2)
        d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * dinner
        return (g * d,)

    return Tensor(out_data, (a,), vjp)


def dropout(a, p: float, training: bool, rng=None):
    """Inverted dropout: survivors scaled by 1/(1-p); identity in eval mode."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {p}")
    a = as_tensor(a)
    if not training or p == 0.0:
        return a
    if rng is None:
        raise ValueError("training-mode dropout needs an rng")
    keep = (rng.random(a.data.shape) >= p).astype(a.data.dtype) / (1.0 - p)

    def vjp(g):
        return (g * keep,)

    return Tensor(a.data * keep, (a,), vjp)


def masked_softmax_lastdim(logits, mask=None):
    """Softmax over the last axis; mask==0 positions get probability exactly 0.

    Masked logits are pushed to -1e9 before the max-subtracted softmax and
    the resulting probabilities are forced to exact zero, so no Inf-Inf NaN
    can appear.
    """
    logits = as_tensor(logits)
    x = logits.data
    if mask is not None:
        mask_arr = np.broadcast_to(
            np.asarray(mask) != 0, x.shape
        )
        if not mask_arr.any(axis=-1).all():
            raise DegenerateRowError(
                "softmax slice with every position masked out"
            )
        x = np.where(mask_arr, x, -1e9)
    x = x - x.max(axis=-1, keepdims=True)
    e = np.exp(x)
    if mask is not None:
        e = e * mask_arr
    out_data = e / e.sum(axis=-1, keepdims=True)

    def vjp(g):
        dot = (g * out_data).sum(axis=-1, keepdims=True)
        return (out_data * (g - dot),)

    return Tensor(out_data, (logits,), vjp)


def layer_norm(x, gamma, beta, eps: float = 1e-5):
    """Standardize each last-axis slice, then scale/shift by gamma/beta."""
    x = as_tensor(x)
    gamma_t, beta_t = as_tensor(gamma), as_tensor(beta)
    if gamma_t.shape != (x.shape[-1],) or beta_t.shape != (x.shape[-1],):
        raise ShapeError(
            f"gamma/beta must have shape ({x.shape[-1]},); got "
            f"{gamma_t.shape} and {beta_t.shape}"
        )
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    var = (centered**2).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    out_data = xhat * gamma_t.data + beta_t.data
    n = x.shape[-1]

    def vjp(g):
        sum_axes = tuple(range(g.ndim - 1))
        g_gamma = (g * xhat).sum(axis=sum_axes)
        g_beta = g.sum(axis=sum_axes)
        gx_hat = g * gamma_t.data
        gx = inv * (
            gx_hat
            - gx_hat.mean(axis=-1, keepdims=True)
            - xhat * (gx_hat * xhat).mean(axis=-1, keepdims=True)
        )
        return gx, g_gamma, g_beta

    return Tensor(out_data, (x, gamma_t, beta_t), vjp)


def conv1d(x, weight, bias=None):
    """1-D cross-correlation, stride 1, no padding.

    x: [batch, in_channels, length], weight: [out_channels, in_channels, k].
    """
    x, w = as_tensor(x), as_tensor(weight)
    if x.ndim != 3 or w.ndim != 3:
        raise ShapeError(f"conv1d expects 3-d x and weight, got {x.shape}, {w.shape}")
    batch, c_in, length = x.shape
    c_out, c_in_w, k = w.shape
    if c_in != c_in_w:
        raise ShapeError(f"channel mismatch: input {c_in} vs weight {c_in_w}")
    if k > length:
        raise ShapeError(f"kernel {k} exceeds input length {length}")
    l_out = length - k + 1
    windows = np.lib.stride_tricks.sliding_window_view(x.data, k, axis=2)
    out_data = np.einsum("bclk,ock->bol", windows, w.data, optimize=True)
    b = as_tensor(bias) if bias is not None else None
    if b is not None:
        if b.shape != (c_out,):
            raise ShapeError(f"bias must have shape ({c_out},), got {b.shape}")
        out_data = out_data + b.data[None, :, None]

    def vjp(g):
        gw = np.einsum("bol,bclk->ock", g, windows, optimize=True)
        g_pad = np.pad(g, ((0, 0), (0, 0), (k - 1, k - 1)))
        g_windows = np.lib.stride_tricks.sliding_window_view(g_pad, k, axis=2)
        gx = np.einsum("bolk,ock->bcl", g_windows, w.data[:, :, ::-1], optimize=True)
        if b is not None:
            return gx, gw, g.sum(axis=(0, 2))
        return gx, gw

    parents = (x, w) if b is None else (x, w, b)
    return Tensor(out_data, parents, vjp)


# ------------------------------------------------------------------ FFT

def rfft_time(x) -> ComplexTensor:
    """Real FFT along the time axis (second-to-last), unnormalized forward."""
    x = as_tensor(x)
    if x.ndim < 2:
        raise ShapeError(f"rfft_time needs >=2 dims [..., T, feat], got {x.shape}")
    t_len = x.shape[-2]
    z = np.fft.rfft(x.data, axis=-2)

    def vjp_real(g):
        full = np.zeros(x.data.shape, dtype=complex)
        full[..., : g.shape[-2], :] = g
        return ((np.fft.ifft(full, axis=-2) * t_len).real.astype(x.data.dtype),)

    def vjp_imag(g):
        full = np.zeros(x.data.shape, dtype=complex)
        full[..., : g.shape[-2], :] = 1j * g
        return ((np.fft.ifft(full, axis=-2) * t_len).real.astype(x.data.dtype),)

    real = Tensor(z.real.astype(x.data.dtype), (x,), vjp_real)
    imag = Tensor(z.imag.astype(x.data.dtype), (x,), vjp_imag)
    return ComplexTensor(real, imag)


def irfft_time(z: ComplexTensor, t_len: int) -> Tensor:
    """Inverse real FFT along the time axis; needs t_len for parity."""
    zr, zi = z.real, z.imag
    n_bins = t_len // 2 + 1
    if zr.shape[-2] != n_bins:
        raise ShapeError(
            f"{zr.shape[-2]} frequency bins inconsistent with T={t_len} "
            f"(expected {n_bins})"
        )
    out_data = np.fft.irfft(zr.data + 1j * zi.data, n=t_len, axis=-2).astype(
        zr.data.dtype
    )
    # weights: interior bins represent a conjugate pair, DC/Nyquist appear once
    w = np.full(n_bins, 2.0)
    w[0] = 1.0
    if t_len % 2 == 0:
        w[-1] = 1.0
    w_col = w[:, None]

    def vjp(g):
        gz = np.fft.rfft(g, axis=-2) * (w_col / t_len)
        gzi = gz.imag.copy()
        gzi[..., 0, :] = 0.0  # irfft ignores the imag part at DC
        if t_len % 2 == 0:
            gzi[..., -1, :] = 0.0  # ... and at Nyquist for even T
        return gz.real.astype(zr.data.dtype), gzi.astype(zi.data.dtype)

    return Tensor(out_data, (zr, zi), vjp)


# ---------------------------------------------------------------- backward

def backward(loss: Tensor):
    """Accumulate d loss / d param into every reachable Parameter's grad."""
    if loss.size != 1:
        raise ValueError(f"backward requires a scalar, got shape {loss.shape}")

    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in visited:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.param is not None:
            node.param.grad += g
        if node.vjp is None:
            continue
        parent_grads = node.vjp(g)
        for parent, pg in zip(node.parents, parent_grads):
            if pg is None:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg


def assert_finite(t: Tensor, what: str = "tensor"):
    if not np.isfinite(t.data).all():
        raise FloatingPointError(f"non-finite values in {what}")
