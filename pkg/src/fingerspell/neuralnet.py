"""From-scratch fully-connected classifier.

Forward pass with a numerically stable softmax head, categorical
cross-entropy, exact backpropagation, Adam updates, and a versioned
little-endian binary model format. Everything is float64 and seeded, so
identical inputs reproduce bit-identical models.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .landmarks import LABELS

LOSS_FLOOR = 1e-12  # clamp for log() on degenerate probabilities

MAGIC = b"LMT1"
FORMAT_VERSION = 1
_ACTIVATION_TAGS = {"relu": 1}
_TAG_ACTIVATIONS = {tag: name for name, tag in _ACTIVATION_TAGS.items()}


class ModelFormatError(ValueError):
    """Malformed model bytes."""


class BadMagicError(ModelFormatError):
    pass


class UnsupportedVersionError(ModelFormatError):
    pass


class TruncatedPayloadError(ModelFormatError):
    pass


class ShapeMismatchError(ModelFormatError):
    pass


@dataclass
class Model:
    """Layer dims, per-layer weights (out x in) and biases, plus vocabulary.

    weights[l] maps activations of width dims[l] to width dims[l+1].
    Hidden layers apply the rectifier; the last layer applies softmax.
    """

    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "relu"
    vocab: tuple[str, ...] = ()


@dataclass
class Gradients:
    """Loss gradients, shape-mirroring a Model's weights and biases."""

    d_weights: list[np.ndarray]
    d_biases: list[np.ndarray]


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters and step count."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    t: int = 0
    m_weights: list[np.ndarray] = field(default_factory=list)
    v_weights: list[np.ndarray] = field(default_factory=list)
    m_biases: list[np.ndarray] = field(default_factory=list)
    v_biases: list[np.ndarray] = field(default_factory=list)


@dataclass
class ForwardCache:
    """Activations retained by forward for the matching backward call."""

    model: Model
    activations: list[np.ndarray]  # a0 = input ... aL = probabilities, (B, d)


def _default_vocab(n_classes: int) -> tuple[str, ...]:
    if n_classes == len(LABELS):
        return LABELS
    return tuple(str(i) for i in range(n_classes))


def init_model(
    dims: tuple[int, ...] | list[int],
    seed: int,
    vocab: tuple[str, ...] | None = None,
) -> Model:
    """Seeded fan-in-scaled uniform weights, zero biases.

    Identical (dims, seed) produce bit-identical parameters.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2 or any(d < 1 for d in dims):
        raise ValueError(f"degenerate layer dims: {dims}")
    if vocab is None:
        vocab = _default_vocab(dims[-1])
    if len(vocab) != dims[-1]:
        raise ValueError(f"vocabulary size {len(vocab)} != output width {dims[-1]}")

    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        limit = math.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out, dtype=np.float64))
    return Model(dims=dims, weights=weights, biases=biases, vocab=tuple(vocab))


def param_count(model: Model) -> int:
    return sum(w.size + b.size for w, b in zip(model.weights, model.biases))


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=1, keepdims=True)


def forward_batch(model: Model, inputs: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Run a (batch, d0) matrix through the network.

    Returns (probabilities of shape (batch, dL), cache for backward).
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != model.dims[0]:
        raise ValueError(
            f"input shape {inputs.shape} incompatible with d0={model.dims[0]}"
        )
    activations = [inputs]
    current = inputs
    last = len(model.weights) - 1
    for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = current @ w.T + b
        current = _softmax_rows(z) if layer == last else np.maximum(0.0, z)
        activations.append(current)
    return current, ForwardCache(model=model, activations=activations)


def forward(model: Model, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Single-sample forward: probabilities (length dL) plus cache."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expected a 1-D input, got shape {x.shape}")
    probs, cache = forward_batch(model, x[None, :])
    return probs[0], cache


def loss_ce(probabilities: np.ndarray, target: int) -> float:
    """Categorical cross-entropy -ln p[target], floored at LOSS_FLOOR."""
    p = float(probabilities[target])
    return -math.log(max(p, LOSS_FLOOR))


def backward_batch(
    model: Model, cache: ForwardCache, targets: np.ndarray
) -> Gradients:
    """Mean-reduced analytic gradients of cross-entropy over the batch."""
    if cache.model is not model:
        raise ValueError("activation cache was produced by a different model")
    probs = cache.activations[-1]
    batch = probs.shape[0]
    targets = np.asarray(targets)
    if targets.shape != (batch,):
        raise ValueError(f"expected {batch} targets, got shape {targets.shape}")

    # Output-layer logit gradient: (p - onehot) / batch.
    delta = probs.copy()
    delta[np.arange(batch), targets] -= 1.0
    delta /= batch

    d_weights: list[np.ndarray] = [None] * len(model.weights)  # type: ignore[list-item]
    d_biases: list[np.ndarray] = [None] * len(model.biases)  # type: ignore[list-item]
    for layer in range(len(model.weights) - 1, -1, -1):
        below = cache.activations[layer]
        d_weights[layer] = delta.T @ below
        d_biases[layer] = delta.sum(axis=0)
        if layer > 0:
            # Rectifier subgradient at 0 is 0, so the > 0 mask is exact.
            delta = (delta @ model.weights[layer]) * (below > 0.0)
    return Gradients(d_weights=d_weights, d_biases=d_biases)


def backward(model: Model, cache: ForwardCache, target: int) -> Gradients:
    """Single-sample gradients of loss_ce(forward(model, x), target)."""
    if cache.activations[-1].shape[0] != 1:
        raise ValueError("cache holds a batch; use backward_batch")
    return backward_batch(model, cache, np.array([target]))


def init_adam(
    model: Model,
    learning_rate: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    epsilon: float = 1e-8,
) -> AdamState:
    return AdamState(
        learning_rate=learning_rate,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
        t=0,
        m_weights=[np.zeros_like(w) for w in model.weights],
        v_weights=[np.zeros_like(w) for w in model.weights],
        m_biases=[np.zeros_like(b) for b in model.biases],
        v_biases=[np.zeros_like(b) for b in model.biases],
    )


def adam_step(
    model: Model, grads: Gradients, state: AdamState
) -> tuple[Model, AdamState]:
    """One Adam update. Returns fresh (Model, AdamState); inputs untouched."""
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t

    def update(theta, g, m, v):
        if g.shape != theta.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter {theta.shape}")
        m_new = b1 * m + (1.0 - b1) * g
        v_new = b2 * v + (1.0 - b2) * g * g
        m_hat = m_new / bias1
        v_hat = v_new / bias2
        theta_new = theta - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
        return theta_new, m_new, v_new

    new_w, new_b = [], []
    m_w, v_w, m_b, v_b = [], [], [], []
    for layer in range(len(model.weights)):
        w, mw, vw = update(
            model.weights[layer],
            grads.d_weights[layer],
            state.m_weights[layer],
            state.v_weights[layer],
        )
        b, mb, vb = update(
            model.biases[layer],
            grads.d_biases[layer],
            state.m_biases[layer],
            state.v_biases[layer],
        )
        new_w.append(w)
        new_b.append(b)
        m_w.append(mw)
        v_w.append(vw)
        m_b.append(mb)
        v_b.append(vb)

    new_model = Model(
        dims=model.dims,
        weights=new_w,
        biases=new_b,
        activation=model.activation,
        vocab=model.vocab,
    )
    new_state = AdamState(
        learning_rate=state.learning_rate,
        beta1=b1,
        beta2=b2,
        epsilon=state.epsilon,
        t=t,
        m_weights=m_w,
        v_weights=v_w,
        m_biases=m_b,
        v_biases=v_b,
    )
    return new_model, new_state


def copy_model(model: Model) -> Model:
    """Deep copy; snapshots during training must not alias live parameters."""
    return Model(
        dims=model.dims,
        weights=[w.copy() for w in model.weights],
        biases=[b.copy() for b in model.biases],
        activation=model.activation,
        vocab=model.vocab,
    )


# ---------------------------------------------------------------------------
# Binary model format (little-endian):
#   magic "LMT1" | version u32 | layer count u32 | dims u32 each |
#   activation tag u8 | vocab count u32 | per token: u16 length + UTF-8 |
#   per layer: W row-major float64, then b float64.
# ---------------------------------------------------------------------------


def serialize(model: Model) -> bytes:
    buf = bytearray()
    buf += MAGIC
    buf += struct.pack("<I", FORMAT_VERSION)
    buf += struct.pack("<I", len(model.dims))
    buf += struct.pack(f"<{len(model.dims)}I", *model.dims)
    buf += struct.pack("<B", _ACTIVATION_TAGS[model.activation])
    buf += struct.pack("<I", len(model.vocab))
    for token in model.vocab:
        raw = token.encode("utf-8")
        buf += struct.pack("<H", len(raw))
        buf += raw
    for w, b in zip(model.weights, model.biases):
        buf += np.ascontiguousarray(w, dtype=np.float64).tobytes()
        buf += np.ascontiguousarray(b, dtype=np.float64).tobytes()
    return bytes(buf)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedPayloadError(
                f"need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos}"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u8(self) -> int:
        return self.take(1)[0]


def deserialize(data: bytes) -> Model:
    reader = _Reader(data)
    if reader.take(4) != MAGIC:
        raise BadMagicError("bad magic bytes; not a model file")
    version = reader.u32()
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported format version {version}")
    n_dims = reader.u32()
    if n_dims < 2:
        raise ShapeMismatchError(f"layer count {n_dims} < 2")
    dims = tuple(reader.u32() for _ in range(n_dims))
    if any(d < 1 for d in dims):
        raise ShapeMismatchError(f"zero-width layer in dims {dims}")
    tag = reader.u8()
    if tag not in _TAG_ACTIVATIONS:
        raise ModelFormatError(f"unknown activation tag {tag}")
    vocab_count = reader.u32()
    if vocab_count != dims[-1]:
        raise ShapeMismatchError(
            f"vocabulary count {vocab_count} != output width {dims[-1]}"
        )
    vocab = []
    for _ in range(vocab_count):
        length = reader.u16()
        vocab.append(reader.take(length).decode("utf-8"))

    weights, biases = [], []
    for fan_in, fan_out in zip(dims, dims[1:]):
        w_raw = reader.take(8 * fan_out * fan_in)
        b_raw = reader.take(8 * fan_out)
        weights.append(
            np.frombuffer(w_raw, dtype="<f8").reshape(fan_out, fan_in).copy()
        )
        biases.append(np.frombuffer(b_raw, dtype="<f8").copy())
    if reader.pos != len(data):
        raise ShapeMismatchError(
            f"{len(data) - reader.pos} trailing bytes after parameters"
        )
    return Model(
        dims=dims,
        weights=weights,
        biases=biases,
        activation=_TAG_ACTIVATIONS[tag],
        vocab=tuple(vocab),
    )


def save_model(model: Model, path) -> None:
    with open(path, "wb") as f:
        f.write(serialize(model))


def load_model(path) -> Model:
    with open(path, "rb") as f:
        return deserialize(f.read())
