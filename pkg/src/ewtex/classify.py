"""Supervised pixelwise classification over texture feature vectors.

A softmax regression (optionally with one tanh hidden layer) is trained
by mini-batch Adam with decoupled weight decay on the mean cross-entropy
over pixels.  Predictions are per-pixel argmax class maps; a refinement
pass reabsorbs connected components smaller than a fraction of the image
into their largest adjacent region.
"""

from __future__ import annotations

import heapq
import json
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from .features import FeatureTensor

ARCH_SOFTMAX = "softmax_linear"
ARCH_MLP = "mlp_1hidden"

MODEL_FORMAT = "ewtex-model"
MODEL_VERSION = 1

#: fraction of the pixel count below which regions get reabsorbed
DEFAULT_MIN_FRACTION = 0.005


@dataclass
class SegmentationMap:
    """Per-pixel integer class labels."""

    labels: np.ndarray  # (height, width) ints
    num_classes: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels)
        if self.labels.ndim != 2 or not np.issubdtype(self.labels.dtype, np.integer):
            raise ValueError("labels must be a 2D integer array")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if self.labels.size and (
            self.labels.min() < 0 or self.labels.max() >= self.num_classes
        ):
            raise ValueError("labels must lie in [0, num_classes)")

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings (Adam with decoupled weight decay)."""

    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    beta1: float = 0.95
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    epochs: int = 200
    batch_size: int = 0  # 0 means full batch
    rng_seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.epochs < 0 or self.batch_size < 0:
            raise ValueError("epochs and batch_size must be >= 0")


@dataclass
class ClassifierModel:
    """Layer parameters of the pixel classifier.

    ``weights``/``biases`` hold one entry per layer; the last layer has
    ``num_classes`` outputs.
    """

    architecture: str
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    input_dim: int
    num_classes: int
    hidden: int = 0

    def __post_init__(self):
        if self.architecture not in (ARCH_SOFTMAX, ARCH_MLP):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        for arr in self.weights + self.biases:
            if not np.all(np.isfinite(arr)):
                raise ValueError("model parameters must be finite")
        if self.biases[-1].shape != (self.num_classes,):
            raise ValueError("output layer width must equal the class count")

    def parameters(self) -> list[np.ndarray]:
        return list(self.weights) + list(self.biases)

    def with_parameters(self, params: list[np.ndarray]) -> "ClassifierModel":
        nw = len(self.weights)
        return replace(self, weights=list(params[:nw]), biases=list(params[nw:]))


@dataclass
class AdamState:
    """First/second moment accumulators and the step counter."""

    step: int
    m: list[np.ndarray]
    v: list[np.ndarray]

    @classmethod
    def zeros_like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(
            step=0,
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
        )


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: AdamState,
    cfg: TrainConfig,
) -> tuple[list[np.ndarray], AdamState]:
    """One bias-corrected Adam update with decoupled weight decay.

    The decay multiplies parameters by ``1 - lr * weight_decay`` before
    the moment update; gradients themselves are used unmodified.
    """
    if len(params) != len(grads):
        raise ValueError("params and grads must align")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite gradient")
    lr = cfg.learning_rate
    t = state.step + 1
    c1 = 1.0 - cfg.beta1 ** t
    c2 = 1.0 - cfg.beta2 ** t
    new_params = []
    new_m = []
    new_v = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        p = p * (1.0 - lr * cfg.weight_decay)
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
        p = p - lr * (m / c1) / (np.sqrt(v / c2) + cfg.adam_epsilon)
        new_params.append(p)
        new_m.append(m)
        new_v.append(v)
    return new_params, AdamState(step=t, m=new_m, v=new_v)


def _logits(params: list[np.ndarray], x: np.ndarray, architecture: str):
    """Class scores plus the hidden activation (None for the linear model)."""
    if architecture == ARCH_SOFTMAX:
        w, b = params
        return x @ w + b, None
    w1, w2, b1, b2 = params
    hidden = np.tanh(x @ w1 + b1)
    return hidden @ w2 + b2, hidden


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(
    params: list[np.ndarray],
    x: np.ndarray,
    y: np.ndarray,
    architecture: str,
) -> tuple[float, list[np.ndarray]]:
    """Mean cross-entropy over pixels and its parameter gradients."""
    n = x.shape[0]
    z, hidden = _logits(params, x, architecture)
    zs = z - z.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(zs).sum(axis=1))
    loss = float(np.mean(log_norm - zs[np.arange(n), y]))
    dz = _softmax(z)
    dz[np.arange(n), y] -= 1.0
    dz /= n
    if architecture == ARCH_SOFTMAX:
        return loss, [x.T @ dz, dz.sum(axis=0)]
    w1, w2, _, _ = params
    dw2 = hidden.T @ dz
    db2 = dz.sum(axis=0)
    dh = (dz @ w2.T) * (1.0 - hidden * hidden)
    dw1 = x.T @ dh
    db1 = dh.sum(axis=0)
    return loss, [dw1, dw2, db1, db2]


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_model(
    input_dim: int,
    num_classes: int,
    architecture: str = ARCH_SOFTMAX,
    hidden: int = 16,
    rng_seed: int = 0,
) -> ClassifierModel:
    """Seeded uniform-range initialization; biases start at zero."""
    rng = np.random.default_rng(rng_seed)
    if architecture == ARCH_SOFTMAX:
        weights = [_glorot(rng, input_dim, num_classes)]
        biases = [np.zeros(num_classes)]
        hidden = 0
    elif architecture == ARCH_MLP:
        if hidden < 1:
            raise ValueError("hidden unit count must be >= 1")
        weights = [_glorot(rng, input_dim, hidden), _glorot(rng, hidden, num_classes)]
        biases = [np.zeros(hidden), np.zeros(num_classes)]
    else:
        raise ValueError(f"unknown architecture {architecture!r}")
    return ClassifierModel(
        architecture=architecture,
        weights=weights,
        biases=biases,
        input_dim=input_dim,
        num_classes=num_classes,
        hidden=hidden,
    )


def _gather_training_data(features, labels):
    feats = features if isinstance(features, list) else [features]
    labs = labels if isinstance(labels, list) else [labels]
    if len(feats) != len(labs):
        raise ValueError("need one label map per feature tensor")
    xs, ys = [], []
    for f, l in zip(feats, labs):
        if (f.height, f.width) != l.shape:
            raise ValueError(
                f"feature grid {(f.height, f.width)} does not match labels {l.shape}"
            )
        xs.append(f.values)
        ys.append(l.labels.ravel())
    x = np.concatenate(xs, axis=0)
    y = np.concatenate(ys, axis=0).astype(np.int64)
    num_classes = max(l.num_classes for l in labs)
    return x, y, num_classes


def train(
    features,
    labels,
    architecture: str = ARCH_SOFTMAX,
    hidden: int = 16,
    cfg: TrainConfig = TrainConfig(),
) -> ClassifierModel:
    """Fit the classifier on one or more (FeatureTensor, SegmentationMap)
    pairs by mini-batch Adam on the mean cross-entropy.

    Fully deterministic for a fixed ``cfg.rng_seed``.  A class index with
    no training pixels only triggers a warning.
    """
    x, y, num_classes = _gather_training_data(features, labels)
    if num_classes < 2:
        raise ValueError("need at least 2 classes")
    present = np.unique(y)
    missing = sorted(set(range(num_classes)) - set(present.tolist()))
    if missing:
        warnings.warn(f"classes absent from training labels: {missing}", stacklevel=2)

    model = init_model(
        x.shape[1], num_classes, architecture, hidden, rng_seed=cfg.rng_seed
    )
    params = model.parameters()
    state = AdamState.zeros_like(params)
    rng = np.random.default_rng(cfg.rng_seed + 1)
    n = x.shape[0]
    batch = cfg.batch_size if 0 < cfg.batch_size < n else n
    for _ in range(cfg.epochs):
        order = rng.permutation(n) if batch < n else np.arange(n)
        for start in range(0, n, batch):
            sel = order[start : start + batch]
            _, grads = loss_and_grads(params, x[sel], y[sel], architecture)
            params, state = adam_step(params, grads, state, cfg)
    return model.with_parameters(params)


def predict(features: FeatureTensor, model: ClassifierModel) -> SegmentationMap:
    """Per-pixel argmax class map (ties go to the lower class index)."""
    if features.n_features != model.input_dim:
        raise ValueError(
            f"feature dimension {features.n_features} does not match "
            f"model input {model.input_dim}"
        )
    scores, _ = _logits(model.parameters(), features.values, model.architecture)
    labels = np.argmax(scores, axis=1).reshape(features.height, features.width)
    return SegmentationMap(labels=labels, num_classes=model.num_classes)


_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def _component_graph(labels: np.ndarray):
    """4-connected components of a label map plus their adjacency.

    Returns (pixel->id map, sizes, classes, first scan-order pixel per id,
    adjacency sets); ids start at 1.
    """
    comp = np.zeros(labels.shape, dtype=np.int64)
    classes = [0]  # id 0 unused
    next_id = 1
    for c in np.unique(labels):
        lab, n = ndimage.label(labels == c, structure=_FOUR_CONN)
        comp[lab > 0] = lab[lab > 0] + (next_id - 1)
        classes.extend([int(c)] * n)
        next_id += n
    sizes = np.bincount(comp.ravel(), minlength=next_id)
    flat = comp.ravel()
    first = np.full(next_id, flat.size, dtype=np.int64)
    starts = np.flatnonzero(np.r_[True, flat[1:] != flat[:-1]])
    np.minimum.at(first, flat[starts], starts)
    adjacency: list[set[int]] = [set() for _ in range(next_id)]
    for a, b in ((comp[:, :-1], comp[:, 1:]), (comp[:-1, :], comp[1:, :])):
        touching = a != b
        for i, j in zip(a[touching].ravel(), b[touching].ravel()):
            adjacency[i].add(int(j))
            adjacency[j].add(int(i))
    return comp, sizes, np.array(classes), first, adjacency


def refine(seg: SegmentationMap, min_fraction: float = DEFAULT_MIN_FRACTION) -> SegmentationMap:
    """Reabsorb small connected components into their largest neighbour.

    Components (4-connectivity) with fewer pixels than
    ``min_fraction * Np`` take the class of their largest adjacent
    component, smallest component first (ties to the earlier component in
    scan order), until none remain.  Relabeled components merge with
    every now-same-class neighbour, so the fixpoint is reached without
    relabeling the full map per step.
    """
    if not 0 <= min_fraction < 1:
        raise ValueError("min_fraction must lie in [0, 1)")
    threshold = min_fraction * seg.labels.size
    comp, sizes, classes, first, adjacency = _component_graph(seg.labels)

    parent = np.arange(sizes.size)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return int(i)

    def neighbours_of(i: int) -> set[int]:
        canon = {find(j) for j in adjacency[i]}
        canon.discard(i)
        adjacency[i] = canon
        return canon

    heap = [
        (int(sizes[i]), int(first[i]), i)
        for i in range(1, sizes.size)
        if sizes[i] < threshold
    ]
    heapq.heapify(heap)
    while heap:
        size, _, target = heapq.heappop(heap)
        if parent[target] != target or sizes[target] != size:
            continue  # stale entry
        around = neighbours_of(target)
        if not around:
            break  # a single region covers everything
        winner = max(around, key=lambda i: (sizes[i], -first[i]))
        classes[target] = classes[winner]
        # absorb target and every now-same-class neighbour into one blob
        group = [target] + [j for j in around if classes[j] == classes[target]]
        root = winner
        merged_adj: set[int] = set()
        for j in group:
            merged_adj |= neighbours_of(j)
        merged_adj -= set(group)
        for j in group:
            if j != root:
                parent[j] = root
                sizes[root] += sizes[j]
                first[root] = min(first[root], first[j])
        adjacency[root] = merged_adj
        if sizes[root] < threshold:
            heapq.heappush(heap, (int(sizes[root]), int(first[root]), root))

    roots = np.array([find(i) for i in range(sizes.size)])
    labels = classes[roots[comp]]
    return SegmentationMap(labels=labels, num_classes=seg.num_classes)


def model_to_dict(model: ClassifierModel) -> dict:
    """JSON-ready dict; float lists round-trip exactly through json."""
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "architecture": model.architecture,
        "input_dim": model.input_dim,
        "num_classes": model.num_classes,
        "hidden": model.hidden,
        "weights": [w.ravel().tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }


def model_from_dict(doc: dict) -> ClassifierModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError("not a classifier model document")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    arch = doc["architecture"]
    k = doc["input_dim"]
    c = doc["num_classes"]
    h = doc.get("hidden", 0)
    if arch == ARCH_SOFTMAX:
        shapes = [(k, c)]
    elif arch == ARCH_MLP:
        shapes = [(k, h), (h, c)]
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    weights = [
        np.array(flat, dtype=float).reshape(shape)
        for flat, shape in zip(doc["weights"], shapes)
    ]
    biases = [np.array(b, dtype=float) for b in doc["biases"]]
    return ClassifierModel(
        architecture=arch,
        weights=weights,
        biases=biases,
        input_dim=k,
        num_classes=c,
        hidden=h,
    )


def model_to_json(model: ClassifierModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> ClassifierModel:
    return model_from_dict(json.loads(text))
