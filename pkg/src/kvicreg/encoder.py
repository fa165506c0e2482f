"""Small ReLU MLP encoder/projector with explicit backprop, Adam, and checkpoints."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

MAGIC = b"KVRG"
FORMAT_VERSION = 1


class EncoderError(ValueError):
    pass


@dataclass
class MlpNetwork:
    layer_dims: list[int]
    weights: list[np.ndarray]  # layer k: (dims[k], dims[k+1])
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise EncoderError("parameter count does not match layer_dims")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_dims[k], self.layer_dims[k + 1]) or b.shape != (self.layer_dims[k + 1],):
                raise EncoderError(f"layer {k} parameter shapes {w.shape}, {b.shape} do not chain")

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def parameters(self) -> list[np.ndarray]:
        """Flat list [W0, b0, W1, b1, ...]; the arrays are live, not copies."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    def copy(self) -> "MlpNetwork":
        return MlpNetwork(list(self.layer_dims), [w.copy() for w in self.weights],
                          [b.copy() for b in self.biases])


@dataclass
class Tape:
    inputs: list[np.ndarray]  # input to each layer
    preacts: list[np.ndarray]  # affine output of each layer


def _check_dims(layer_dims):
    dims = [int(d) for d in layer_dims]
    if len(dims) < 2 or any(d < 1 for d in dims) or any(d != x for d, x in zip(dims, layer_dims)):
        raise EncoderError(f"layer_dims must be >= 2 positive integers, got {layer_dims}")
    return dims


def init(layer_dims, seed: int) -> MlpNetwork:
    """Glorot-uniform weights, zero biases."""
    dims = _check_dims(layer_dims)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-s, s, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(dims, weights, biases)


def forward(net: MlpNetwork, batch):
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.layer_dims[0]:
        raise EncoderError(f"expected input of width {net.layer_dims[0]}, got shape {x.shape}")
    tape = Tape([], [])
    h = x
    last = net.num_layers - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        tape.inputs.append(h)
        a = h @ w + b
        tape.preacts.append(a)
        h = a if k == last else np.maximum(a, 0.0)
    return h, tape


def backward(net: MlpNetwork, tape: Tape, grad_output):
    """Return (param_grads, grad_input); param_grads is laid out like ``parameters()``."""
    g = np.asarray(grad_output, dtype=np.float64)
    expected = tape.preacts[-1].shape
    if g.shape != expected:
        raise EncoderError(f"grad_output shape {g.shape} does not match output {expected}")
    grads: list[np.ndarray] = [None] * (2 * net.num_layers)
    for k in range(net.num_layers - 1, -1, -1):
        if k != net.num_layers - 1:
            g = g * (tape.preacts[k] > 0.0)
        grads[2 * k] = tape.inputs[k].T @ g
        grads[2 * k + 1] = g.sum(axis=0)
        g = g @ net.weights[k].T
    return grads, g


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    step: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net: MlpNetwork, **kwargs) -> "AdamState":
        params = net.parameters()
        return cls(first_moment=[np.zeros_like(p) for p in params],
                   second_moment=[np.zeros_like(p) for p in params], **kwargs)


def adam_step(net: MlpNetwork, grads, state: AdamState):
    """One bias-corrected Adam update, applied in place; returns (net, state)."""
    params = net.parameters()
    if len(grads) != len(params):
        raise EncoderError(f"expected {len(params)} gradient arrays, got {len(grads)}")
    for p, g in zip(params, grads):
        if g.shape != p.shape:
            raise EncoderError(f"gradient shape {g.shape} does not match parameter {p.shape}")
        if not np.all(np.isfinite(g)):
            raise EncoderError("non-finite gradient passed to adam_step")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.adam_eps)
    return net, state


# -- checkpoint container ---------------------------------------------------------
#
#   "KVRG" | u32 version | u32 layer count | per layer: u32 rows, u32 cols,
#   rows*cols f64 weights (row-major), cols f64 biases.  All little-endian.

def save_checkpoint(net: MlpNetwork, path) -> None:
    chunks = [MAGIC, struct.pack("<II", FORMAT_VERSION, net.num_layers)]
    for w, b in zip(net.weights, net.biases):
        chunks.append(struct.pack("<II", *w.shape))
        chunks.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path) -> MlpNetwork:
    data = Path(path).read_bytes()
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise EncoderError(f"checkpoint truncated at offset {len(data)}")
        out = data[pos:pos + n]
        pos += n
        return out

    if take(4) != MAGIC:
        raise EncoderError("bad checkpoint magic at offset 0")
    version, layers = struct.unpack("<II", take(8))
    if version != FORMAT_VERSION:
        raise EncoderError(f"unsupported checkpoint version {version} at offset 4")
    dims, weights, biases = [], [], []
    for _ in range(layers):
        rows, cols = struct.unpack("<II", take(8))
        if dims and dims[-1] != rows:
            raise EncoderError(f"layer dims do not chain at offset {pos - 8}")
        if not dims:
            dims.append(rows)
        dims.append(cols)
        weights.append(np.frombuffer(take(8 * rows * cols), dtype="<f8").reshape(rows, cols).astype(np.float64))
        biases.append(np.frombuffer(take(8 * cols), dtype="<f8").astype(np.float64))
    if pos != len(data):
        raise EncoderError(f"trailing bytes after offset {pos}")
    return MlpNetwork(dims, weights, biases)
