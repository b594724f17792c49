"""The video-text matching network.

Two projection layers map the 2480-wide video vector and the 768-wide text
vector to 1024 each; the projections are fused by pointwise multiplication
and scored by a 3-layer fully connected head ending in a sigmoid, so the
output always lands strictly inside (0, 1). A video and a text are
considered matched when the output exceeds 0.5 exactly.

Everything runs in double precision on plain numpy: forward, exact
backprop (respecting ReLU masks, inverted-dropout masks, and the
product-fusion rule that each branch's gradient is scaled by the other
branch's activation), plain SGD without momentum, binary cross-entropy
with clamped predictions, a binary checkpoint format, and a
finite-difference gradient checker.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    CorruptCheckpoint,
    DimensionMismatch,
    EmptyTrainingSet,
    StaleCache,
    VersionMismatch,
)

logger = logging.getLogger("vtmm.net")

CHECKPOINT_MAGIC = b"VTMM"
CHECKPOINT_VERSION = 1

LOSS_CLAMP = 1e-7

# Hyperparameters behind the "paper" preset: the original full-scale
# pretraining recipe. At desk scale this learning rate tends to diverge
# with cross-entropy, so the default preset is the tamer one below.
PAPER_EPOCHS = 2000
PAPER_LEARNING_RATE = 0.5
PAPER_DROPOUT = 0.5
PAPER_BATCH_SIZE = 1024


@dataclass(frozen=True)
class NetDims:
    video_dim: int = 2480
    text_dim: int = 768
    proj_dim: int = 1024
    head_dims: tuple[int, ...] = (512, 128, 1)
    projection_activation: str = "relu"  # or "identity"
    hidden_activation: str = "relu"      # or "identity"

    def __post_init__(self):
        if self.head_dims[-1] != 1:
            raise ValueError("final head layer must have a single output unit")
        for name in (self.projection_activation, self.hidden_activation):
            if name not in ("relu", "identity"):
                raise ValueError(f"unknown activation {name!r}")

    def to_dict(self) -> dict:
        return {
            "video_dim": self.video_dim,
            "text_dim": self.text_dim,
            "proj_dim": self.proj_dim,
            "head_dims": list(self.head_dims),
            "projection_activation": self.projection_activation,
            "hidden_activation": self.hidden_activation,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetDims":
        return cls(
            video_dim=int(d["video_dim"]),
            text_dim=int(d["text_dim"]),
            proj_dim=int(d["proj_dim"]),
            head_dims=tuple(int(x) for x in d["head_dims"]),
            projection_activation=d.get("projection_activation", "relu"),
            hidden_activation=d.get("hidden_activation", "relu"),
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 0.05
    batch_size: int = 64
    dropout: float = 0.0
    seed: int = 0
    shuffle: bool = True

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must not be negative")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")


def desk_preset(seed: int = 0, **overrides) -> TrainConfig:
    """Small-scale defaults that converge on synthetic data."""
    return replace(TrainConfig(seed=seed), **overrides)


def paper_preset(seed: int = 0, **overrides) -> TrainConfig:
    return replace(
        TrainConfig(
            epochs=PAPER_EPOCHS,
            learning_rate=PAPER_LEARNING_RATE,
            batch_size=PAPER_BATCH_SIZE,
            dropout=PAPER_DROPOUT,
            seed=seed,
        ),
        **overrides,
    )


class DenseLayer:
    """weights (out, in) and bias (out,), both float64."""

    def __init__(self, weights: np.ndarray, bias: np.ndarray):
        self.weights = np.asarray(weights, dtype=np.float64)
        self.bias = np.asarray(bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("bias length must equal the weight matrix's output dimension")

    @classmethod
    def initialized(cls, out_dim: int, in_dim: int, rng: np.random.Generator) -> "DenseLayer":
        # Bias drawn from the same range: zero biases put pre-activations
        # exactly on the ReLU kink whenever an input goes all-zero (dead
        # units, dropout), which breaks finite-difference verification.
        bound = np.sqrt(6.0 / (in_dim + out_dim))
        return cls(
            rng.uniform(-bound, bound, size=(out_dim, in_dim)),
            rng.uniform(-bound, bound, size=out_dim),
        )

    @classmethod
    def zeros(cls, out_dim: int, in_dim: int) -> "DenseLayer":
        return cls(np.zeros((out_dim, in_dim)), np.zeros(out_dim))

    def apply(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weights.T + self.bias


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    return z


def _act_grad(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    return np.ones_like(z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class DropoutMasks:
    """Binary keep-masks, one per dropout site, in forward order."""

    video: np.ndarray
    text: np.ndarray
    head: list[np.ndarray]


@dataclass
class ForwardCache:
    version: int
    video: np.ndarray
    text: np.ndarray
    z_video: np.ndarray
    kept_video: np.ndarray
    z_text: np.ndarray
    kept_text: np.ndarray
    fused: np.ndarray
    z_head: list[np.ndarray]
    kept_head: list[np.ndarray]
    prediction: np.ndarray
    masks: DropoutMasks | None
    keep_prob: float


@dataclass
class Gradients:
    """Same structure as the network parameters."""

    video_proj: tuple[np.ndarray, np.ndarray]
    text_proj: tuple[np.ndarray, np.ndarray]
    head: list[tuple[np.ndarray, np.ndarray]]

    def flat(self) -> list[np.ndarray]:
        out = [*self.video_proj, *self.text_proj]
        for w, b in self.head:
            out.extend((w, b))
        return out


class MatchingNetwork:
    def __init__(
        self,
        video_proj: DenseLayer,
        text_proj: DenseLayer,
        head: list[DenseLayer],
        dims: NetDims,
        dropout_rate: float = 0.0,
        rng_seed: int = 0,
    ):
        if not 0.0 <= dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")
        self.video_proj = video_proj
        self.text_proj = text_proj
        self.head = head
        self.dims = dims
        self.dropout_rate = float(dropout_rate)
        self.rng_seed = int(rng_seed)
        self._version = 0
        self._check_chain()

    def _check_chain(self):
        d = self.dims
        expect = [
            (self.video_proj, (d.proj_dim, d.video_dim)),
            (self.text_proj, (d.proj_dim, d.text_dim)),
        ]
        in_dim = d.proj_dim
        for layer, out_dim in zip(self.head, d.head_dims):
            expect.append((layer, (out_dim, in_dim)))
            in_dim = out_dim
        if len(self.head) != len(d.head_dims):
            raise DimensionMismatch("head layer count does not match the dimension table")
        for layer, shape in expect:
            if layer.weights.shape != shape:
                raise DimensionMismatch(f"layer has weights {layer.weights.shape}, expected {shape}")

    @classmethod
    def create(cls, dims: NetDims | None = None, dropout_rate: float = 0.0, rng_seed: int = 0) -> "MatchingNetwork":
        dims = dims or NetDims()
        rng = np.random.default_rng(rng_seed)
        video_proj = DenseLayer.initialized(dims.proj_dim, dims.video_dim, rng)
        text_proj = DenseLayer.initialized(dims.proj_dim, dims.text_dim, rng)
        head = []
        in_dim = dims.proj_dim
        for out_dim in dims.head_dims:
            head.append(DenseLayer.initialized(out_dim, in_dim, rng))
            in_dim = out_dim
        return cls(video_proj, text_proj, head, dims, dropout_rate, rng_seed)

    @classmethod
    def zeros(cls, dims: NetDims | None = None) -> "MatchingNetwork":
        dims = dims or NetDims()
        video_proj = DenseLayer.zeros(dims.proj_dim, dims.video_dim)
        text_proj = DenseLayer.zeros(dims.proj_dim, dims.text_dim)
        head = []
        in_dim = dims.proj_dim
        for out_dim in dims.head_dims:
            head.append(DenseLayer.zeros(out_dim, in_dim))
            in_dim = out_dim
        return cls(video_proj, text_proj, head, dims)

    def parameters(self) -> list[np.ndarray]:
        """All parameter arrays in the documented checkpoint order."""
        out = [self.video_proj.weights, self.video_proj.bias,
               self.text_proj.weights, self.text_proj.bias]
        for layer in self.head:
            out.extend((layer.weights, layer.bias))
        return out

    def copy(self) -> "MatchingNetwork":
        net = MatchingNetwork(
            DenseLayer(self.video_proj.weights.copy(), self.video_proj.bias.copy()),
            DenseLayer(self.text_proj.weights.copy(), self.text_proj.bias.copy()),
            [DenseLayer(l.weights.copy(), l.bias.copy()) for l in self.head],
            self.dims,
            self.dropout_rate,
            self.rng_seed,
        )
        net._version = self._version
        return net

    # --- forward ---

    def _coerce_inputs(self, video, text) -> tuple[np.ndarray, np.ndarray, bool]:
        v = np.asarray(video, dtype=np.float64)
        t = np.asarray(text, dtype=np.float64)
        single = v.ndim == 1
        if single:
            v = v[None, :]
        if t.ndim == 1:
            t = t[None, :]
        if v.shape[1:] != (self.dims.video_dim,):
            raise DimensionMismatch(f"video input has shape {v.shape}, expected (*, {self.dims.video_dim})")
        if t.shape[1:] != (self.dims.text_dim,):
            raise DimensionMismatch(f"text input has shape {t.shape}, expected (*, {self.dims.text_dim})")
        if v.shape[0] != t.shape[0]:
            raise DimensionMismatch(f"batch sizes differ: {v.shape[0]} videos vs {t.shape[0]} texts")
        return v, t, single

    def forward_infer(self, video, text):
        """Matching degree in (0, 1); dropout disabled, pure function."""
        v, t, single = self._coerce_inputs(video, text)
        d = self.dims
        hv = _act(d.projection_activation, self.video_proj.apply(v))
        ht = _act(d.projection_activation, self.text_proj.apply(t))
        x = hv * ht
        for i, layer in enumerate(self.head):
            z = layer.apply(x)
            if i < len(self.head) - 1:
                x = _act(d.hidden_activation, z)
            else:
                x = _sigmoid(z)
        out = x[:, 0]
        return float(out[0]) if single else out

    def _draw_masks(self, batch: int, rng: np.random.Generator) -> DropoutMasks:
        keep = 1.0 - self.dropout_rate
        d = self.dims
        video = (rng.random((batch, d.proj_dim)) < keep).astype(np.float64)
        text = (rng.random((batch, d.proj_dim)) < keep).astype(np.float64)
        head = [
            (rng.random((batch, out_dim)) < keep).astype(np.float64)
            for out_dim in d.head_dims[:-1]
        ]
        return DropoutMasks(video=video, text=text, head=head)

    def forward_train(
        self,
        video,
        text,
        rng: np.random.Generator | None = None,
        masks: DropoutMasks | None = None,
    ) -> tuple[np.ndarray, ForwardCache]:
        """Forward pass caching every activation needed by backward().

        With a nonzero dropout rate, masks are drawn from `rng` unless an
        explicit DropoutMasks is supplied (the gradient checker passes a
        fixed one so finite differences see the same subnetwork).
        """
        v, t, single = self._coerce_inputs(video, text)
        d = self.dims
        keep = 1.0 - self.dropout_rate
        if self.dropout_rate > 0.0 and masks is None:
            if rng is None:
                raise ValueError("training forward with dropout needs an rng or explicit masks")
            masks = self._draw_masks(v.shape[0], rng)

        z_video = self.video_proj.apply(v)
        a_video = _act(d.projection_activation, z_video)
        kept_video = a_video if masks is None else a_video * masks.video / keep

        z_text = self.text_proj.apply(t)
        a_text = _act(d.projection_activation, z_text)
        kept_text = a_text if masks is None else a_text * masks.text / keep

        fused = kept_video * kept_text

        x = fused
        z_head: list[np.ndarray] = []
        kept_head: list[np.ndarray] = []
        for i, layer in enumerate(self.head):
            z = layer.apply(x)
            z_head.append(z)
            if i < len(self.head) - 1:
                a = _act(d.hidden_activation, z)
                x = a if masks is None else a * masks.head[i] / keep
                kept_head.append(x)
            else:
                x = _sigmoid(z)
        prediction = x[:, 0]

        cache = ForwardCache(
            version=self._version,
            video=v, text=t,
            z_video=z_video, kept_video=kept_video,
            z_text=z_text, kept_text=kept_text,
            fused=fused,
            z_head=z_head, kept_head=kept_head,
            prediction=prediction,
            masks=masks, keep_prob=keep,
        )
        return (prediction[0] if single else prediction), cache

    # --- loss and backward ---

    def backward(self, cache: ForwardCache, label) -> Gradients:
        """Exact gradients of the mean clamped cross-entropy over the batch."""
        if cache.version != self._version:
            raise StaleCache("cached activations predate a parameter update")
        d = self.dims
        y = np.atleast_1d(np.asarray(label, dtype=np.float64))
        p = cache.prediction
        if y.shape != p.shape:
            raise DimensionMismatch(f"labels have shape {y.shape}, predictions {p.shape}")
        n = p.shape[0]

        # d(loss)/d(prediction) of the function actually computed: the clamp
        # zeroes the gradient outside (LOSS_CLAMP, 1 - LOSS_CLAMP).
        pc = np.clip(p, LOSS_CLAMP, 1.0 - LOSS_CLAMP)
        inside = (p > LOSS_CLAMP) & (p < 1.0 - LOSS_CLAMP)
        dl_dp = np.where(inside, (pc - y) / (pc * (1.0 - pc)), 0.0) / n
        g = (dl_dp * p * (1.0 - p))[:, None]  # d(mean loss)/d(final pre-activation)

        head_grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(self.head)
        for i in range(len(self.head) - 1, -1, -1):
            inputs = cache.fused if i == 0 else cache.kept_head[i - 1]
            head_grads[i] = (g.T @ inputs, g.sum(axis=0))
            g = g @ self.head[i].weights
            if i > 0:
                if cache.masks is not None:
                    g = g * cache.masks.head[i - 1] / cache.keep_prob
                g = g * _act_grad(d.hidden_activation, cache.z_head[i - 1])

        # Product fusion: each branch is scaled by the other branch's output.
        g_video = g * cache.kept_text
        g_text = g * cache.kept_video
        if cache.masks is not None:
            g_video = g_video * cache.masks.video / cache.keep_prob
            g_text = g_text * cache.masks.text / cache.keep_prob
        g_video = g_video * _act_grad(d.projection_activation, cache.z_video)
        g_text = g_text * _act_grad(d.projection_activation, cache.z_text)

        return Gradients(
            video_proj=(g_video.T @ cache.video, g_video.sum(axis=0)),
            text_proj=(g_text.T @ cache.text, g_text.sum(axis=0)),
            head=head_grads,
        )

    def sgd_step(self, grads: Gradients, learning_rate: float) -> "MatchingNetwork":
        """Plain SGD, no momentum: p <- p - lr * g, in place."""
        for param, grad in zip(self.parameters(), grads.flat()):
            param -= learning_rate * grad
        self._version += 1
        return self


def loss(prediction, label) -> float:
    """Binary cross-entropy with predictions clamped for numerical safety."""
    p = np.clip(np.atleast_1d(np.asarray(prediction, dtype=np.float64)),
                LOSS_CLAMP, 1.0 - LOSS_CLAMP)
    y = np.atleast_1d(np.asarray(label, dtype=np.float64))
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def is_match(degree: float) -> bool:
    """Threshold semantics: matched means strictly above 0.5."""
    return degree > 0.5


def train(
    net: MatchingNetwork,
    pairs: list[tuple[np.ndarray, np.ndarray, int]],
    cfg: TrainConfig,
) -> tuple[MatchingNetwork, list[float]]:
    """Mini-batch SGD; returns the trained net and the per-epoch mean loss.

    Deterministic given cfg.seed: shuffle order and dropout masks both come
    from one generator seeded with it. Gradients are averaged over each
    mini-batch before the update.
    """
    if len(pairs) == 0:
        raise EmptyTrainingSet("no training pairs")
    videos = np.stack([np.asarray(p[0], dtype=np.float64) for p in pairs])
    texts = np.stack([np.asarray(p[1], dtype=np.float64) for p in pairs])
    labels = np.array([p[2] for p in pairs], dtype=np.float64)

    net.dropout_rate = float(cfg.dropout)
    rng = np.random.default_rng(cfg.seed)
    n = len(pairs)
    trace: list[float] = []
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle else np.arange(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            pred, cache = net.forward_train(videos[idx], texts[idx], rng=rng)
            total += loss(pred, labels[idx]) * len(idx)
            grads = net.backward(cache, labels[idx])
            net.sgd_step(grads, cfg.learning_rate)
        trace.append(total / n)
        if (epoch + 1) % 50 == 0:
            logger.info("epoch %d/%d mean loss %.6f", epoch + 1, cfg.epochs, trace[-1])
    return net, trace


# --- checkpointing ---

def save_checkpoint(net: MatchingNetwork, path) -> None:
    """Header (magic, version u32, length-prefixed dims JSON) then all
    parameters as little-endian float64 in the documented fixed order."""
    meta = dict(net.dims.to_dict(), dropout_rate=net.dropout_rate, rng_seed=net.rng_seed)
    blob = json.dumps(meta, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for param in net.parameters():
            fh.write(np.ascontiguousarray(param, dtype="<f8").tobytes())


def load_checkpoint(path, expected_dims: NetDims | None = None) -> MatchingNetwork:
    with open(path, "rb") as fh:
        raw = fh.read()
    off = 0

    def take(n: int, what: str) -> bytes:
        nonlocal off
        if off + n > len(raw):
            raise CorruptCheckpoint(f"{path}: truncated while reading {what}")
        chunk = raw[off : off + n]
        off += n
        return chunk

    if take(4, "magic") != CHECKPOINT_MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic bytes")
    (version,) = struct.unpack("<I", take(4, "format version"))
    if version != CHECKPOINT_VERSION:
        raise VersionMismatch(f"{path}: format version {version}, supported {CHECKPOINT_VERSION}")
    (blob_len,) = struct.unpack("<I", take(4, "dimension table length"))
    try:
        meta = json.loads(take(blob_len, "dimension table").decode("utf-8"))
        dims = NetDims.from_dict(meta)
    except (ValueError, KeyError) as exc:
        raise CorruptCheckpoint(f"{path}: unreadable dimension table: {exc}") from exc
    if expected_dims is not None and dims != expected_dims:
        raise DimensionMismatch(
            f"{path}: checkpoint dims {dims.to_dict()} do not match expected {expected_dims.to_dict()}"
        )

    net = MatchingNetwork.zeros(dims)
    net.dropout_rate = float(meta.get("dropout_rate", 0.0))
    net.rng_seed = int(meta.get("rng_seed", 0))
    for param in net.parameters():
        data = take(param.size * 8, "parameters")
        param[...] = np.frombuffer(data, dtype="<f8").reshape(param.shape)
    if off != len(raw):
        raise CorruptCheckpoint(f"{path}: {len(raw) - off} unexpected trailing bytes")
    return net


# --- gradient verification ---

def gradient_check(
    trials: int = 100,
    seed: int = 0,
    step: float = 1e-5,
    dims: NetDims | None = None,
) -> float:
    """Max relative error between backprop and central finite differences.

    Runs `trials` randomized toy networks (small dims unless given), a third
    of them with a fixed nonzero dropout mask so the masked paths are
    exercised too. Relative error is |analytic - numeric| / max(1, |numeric|).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for trial in range(trials):
        if dims is None:
            h1 = int(rng.integers(2, 5))
            h2 = int(rng.integers(2, 4))
            toy = NetDims(
                video_dim=int(rng.integers(3, 8)),
                text_dim=int(rng.integers(3, 8)),
                proj_dim=int(rng.integers(2, 6)),
                head_dims=(h1, h2, 1),
            )
        else:
            toy = dims
        dropout = 0.3 if trial % 3 == 0 else 0.0
        net = MatchingNetwork.create(toy, dropout_rate=dropout, rng_seed=int(rng.integers(0, 2**31)))
        batch = int(rng.integers(1, 4))
        video = rng.standard_normal((batch, toy.video_dim))
        text = rng.standard_normal((batch, toy.text_dim))
        label = rng.integers(0, 2, size=batch).astype(np.float64)
        masks = net._draw_masks(batch, rng) if dropout > 0 else None

        _, cache = net.forward_train(video, text, masks=masks)
        analytic = net.backward(cache, label).flat()

        for param, grad in zip(net.parameters(), analytic):
            flat_param = param.reshape(-1)
            flat_grad = grad.reshape(-1)
            for i in range(flat_param.size):
                orig = flat_param[i]
                flat_param[i] = orig + step
                up, _ = net.forward_train(video, text, masks=masks)
                flat_param[i] = orig - step
                down, _ = net.forward_train(video, text, masks=masks)
                flat_param[i] = orig
                numeric = (loss(up, label) - loss(down, label)) / (2.0 * step)
                rel = abs(flat_grad[i] - numeric) / max(1.0, abs(numeric))
                worst = max(worst, rel)
    return worst
