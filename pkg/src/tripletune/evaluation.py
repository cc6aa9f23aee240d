"""Evaluation tasks: predicate-label classification, clusterability, correlations."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy import stats as sp_stats

from .graph import KnowledgeGraph, multi_predicate_triple_ids
from .optim import Adam

CH_DEGENERATE = float("inf")


@dataclass
class ClassifierSpec:
    kind: str = "logreg-ovr"          # logreg-ovr | mlp
    hidden: int = 512                 # mlp only
    mlp_batch: int = 256
    mlp_epochs: int = 10
    mlp_learning_rate: float = 1e-3
    logreg_l2: float = 1.0
    logreg_iters: int = 200
    logreg_learning_rate: float = 0.1
    standardize: bool = False
    rng_seed: int = 0


@dataclass
class EvalReport:
    micro_f1_per_fold: dict[str, list[float]]
    micro_f1_mean: dict[str, float]
    ch_index: float
    ch_degenerate: bool
    restricted_to_multi_predicate: bool
    correlations: dict[str, float] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = asdict(self)
        payload["ch_index"] = None if self.ch_degenerate else self.ch_index
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        payload = json.loads(text)
        if payload["ch_index"] is None:
            payload["ch_index"] = CH_DEGENERATE
        return cls(**payload)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "EvalReport":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def micro_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Micro-averaged F1 from global confusion counts.

    For single-label multi-class predictions every false positive is also a
    false negative, so this equals plain accuracy.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) != len(y_pred):
        raise ValueError("length mismatch")
    classes = np.unique(np.concatenate([y_true, y_pred]))
    tp = fp = fn = 0
    for c in classes:
        tp += int(np.sum((y_pred == c) & (y_true == c)))
        fp += int(np.sum((y_pred == c) & (y_true != c)))
        fn += int(np.sum((y_pred != c) & (y_true == c)))
    if 2 * tp + fp + fn == 0:
        return 0.0
    return 2 * tp / (2 * tp + fp + fn)


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 2:
        raise ValueError("need two equal-length sequences of length >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = float(np.sqrt(np.sum(xc * xc) * np.sum(yc * yc)))
    if denom == 0.0:
        raise ValueError("zero variance input")
    return max(-1.0, min(1.0, float(np.sum(xc * yc) / denom)))


def spearman(x, y) -> float:
    rho = sp_stats.spearmanr(x, y).statistic
    return float(rho)


def calinski_harabasz(features: np.ndarray, assignment: np.ndarray, k: int) -> float:
    """Between/within dispersion ratio scaled by (n - k)/(k - 1).

    Returns the +inf sentinel when within-cluster dispersion is exactly zero.
    """
    features = np.asarray(features, dtype=np.float64)
    assignment = np.asarray(assignment)
    n = features.shape[0]
    if k < 2:
        raise ValueError("k must be >= 2")
    if n <= k:
        raise ValueError("need more points than clusters")
    labels = np.unique(assignment)
    if len(labels) != k:
        raise ValueError("every cluster must be nonempty")
    global_mean = features.mean(axis=0)
    tr_b = 0.0
    tr_w = 0.0
    for c in labels:
        pts = features[assignment == c]
        mean_c = pts.mean(axis=0)
        tr_b += len(pts) * float(np.sum((mean_c - global_mean) ** 2))
        tr_w += float(np.sum((pts - mean_c) ** 2))
    if tr_w == 0.0:
        return CH_DEGENERATE
    return (tr_b / tr_w) * ((n - k) / (k - 1))


# ---------------------------------------------------------------------------
# folds and classifiers
# ---------------------------------------------------------------------------

def kfold_split(n: int, folds: int = 5, rng_seed: int = 0):
    """Disjoint test folds partitioning range(n); train = complement."""
    if n < folds:
        raise ValueError(f"need at least {folds} items, got {n}")
    rng = np.random.default_rng(rng_seed)
    perm = rng.permutation(n)
    out = []
    bounds = np.linspace(0, n, folds + 1).astype(int)
    for i in range(folds):
        test = np.sort(perm[bounds[i]:bounds[i + 1]])
        train = np.sort(np.concatenate([perm[:bounds[i]], perm[bounds[i + 1]:]]))
        out.append((train, test))
    return out


class LogisticOvR:
    """One-vs-rest binary logistic regression trained by Adam with L2 penalty."""

    def __init__(self, l2: float = 1.0, iters: int = 200, learning_rate: float = 0.1):
        self.l2 = l2
        self.iters = iters
        self.learning_rate = learning_rate
        self.classes_: np.ndarray | None = None
        self.weights: np.ndarray | None = None   # (C, d)
        self.bias: np.ndarray | None = None      # (C,)

    def fit(self, x: np.ndarray, y: np.ndarray, classes: np.ndarray | None = None):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y)
        self.classes_ = np.unique(y) if classes is None else np.asarray(classes)
        n, d = x.shape
        c = len(self.classes_)
        onehot = (y[:, None] == self.classes_[None, :]).astype(np.float64)
        w = np.zeros((c, d))
        b = np.zeros(c)
        opt = Adam({"w": w, "b": b}, lr=self.learning_rate)
        for _ in range(self.iters):
            scores = x @ w.T + b
            prob = 1.0 / (1.0 + np.exp(-np.clip(scores, -500, 500)))
            err = (prob - onehot) / n
            gw = err.T @ x + (self.l2 / n) * w
            gb = err.sum(axis=0)
            opt.begin_step()
            opt.step("w", gw)
            opt.step("b", gb)
        self.weights, self.bias = w, b
        return self

    def decision(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x) @ self.weights.T + self.bias

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.classes_[np.argmax(self.decision(x), axis=1)]


class MlpClassifier:
    """Single hidden layer (relu) with softmax output, trained by mini-batch Adam."""

    def __init__(self, hidden: int = 512, batch_size: int = 256, epochs: int = 10,
                 learning_rate: float = 1e-3, rng_seed: int = 0):
        self.hidden = hidden
        self.batch_size = batch_size
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.rng_seed = rng_seed
        self.classes_: np.ndarray | None = None
        self.params: dict[str, np.ndarray] | None = None

    def fit(self, x: np.ndarray, y: np.ndarray, classes: np.ndarray | None = None):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y)
        self.classes_ = np.unique(y) if classes is None else np.asarray(classes)
        n, d = x.shape
        c = len(self.classes_)
        class_pos = {cls: i for i, cls in enumerate(self.classes_)}
        yi = np.array([class_pos[v] for v in y])
        rng = np.random.default_rng(self.rng_seed)
        p = {
            "w1": rng.normal(0.0, np.sqrt(2.0 / d), size=(self.hidden, d)),
            "b1": np.zeros(self.hidden),
            "w2": rng.normal(0.0, np.sqrt(2.0 / self.hidden), size=(c, self.hidden)),
            "b2": np.zeros(c),
        }
        opt = Adam(p, lr=self.learning_rate)
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                idx = order[start:start + self.batch_size]
                xb, yb = x[idx], yi[idx]
                z1 = xb @ p["w1"].T + p["b1"]
                a1 = np.maximum(z1, 0.0)
                logits = a1 @ p["w2"].T + p["b2"]
                logits -= logits.max(axis=1, keepdims=True)
                e = np.exp(logits)
                prob = e / e.sum(axis=1, keepdims=True)
                prob[np.arange(len(idx)), yb] -= 1.0
                prob /= len(idx)
                gw2 = prob.T @ a1
                gb2 = prob.sum(axis=0)
                da1 = prob @ p["w2"]
                dz1 = da1 * (z1 > 0)
                gw1 = dz1.T @ xb
                gb1 = dz1.sum(axis=0)
                opt.begin_step()
                for name, grad in (("w1", gw1), ("b1", gb1), ("w2", gw2), ("b2", gb2)):
                    opt.step(name, grad)
        self.params = p
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        p = self.params
        a1 = np.maximum(np.asarray(x) @ p["w1"].T + p["b1"], 0.0)
        logits = a1 @ p["w2"].T + p["b2"]
        return self.classes_[np.argmax(logits, axis=1)]


def _make_classifier(spec: ClassifierSpec, fold_seed: int):
    if spec.kind == "logreg-ovr":
        return LogisticOvR(l2=spec.logreg_l2, iters=spec.logreg_iters,
                           learning_rate=spec.logreg_learning_rate)
    if spec.kind == "mlp":
        return MlpClassifier(hidden=spec.hidden, batch_size=spec.mlp_batch,
                             epochs=spec.mlp_epochs, learning_rate=spec.mlp_learning_rate,
                             rng_seed=fold_seed)
    raise ValueError(f"unknown classifier kind {spec.kind!r}")


def train_classify(features: np.ndarray, labels: np.ndarray, spec: ClassifierSpec,
                   folds) -> list[float]:
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    if features.shape[0] != len(labels):
        raise ValueError("features/labels length mismatch")
    if spec.standardize:
        mu = features.mean(axis=0)
        sd = features.std(axis=0)
        sd[sd == 0] = 1.0
        features = (features - mu) / sd
    all_classes = np.unique(labels)
    scores = []
    for fold_idx, (train_idx, test_idx) in enumerate(folds):
        train_classes = np.unique(labels[train_idx])
        if len(train_classes) < 2:
            raise ValueError("need at least 2 classes in every training fold")
        if len(train_classes) < len(all_classes):
            warnings.warn(
                f"fold {fold_idx}: {len(all_classes) - len(train_classes)} classes absent "
                "from the training split and cannot be predicted", stacklevel=2)
        clf = _make_classifier(spec, fold_seed=spec.rng_seed * 1000 + fold_idx)
        clf.fit(features[train_idx], labels[train_idx])
        pred = clf.predict(features[test_idx])
        scores.append(micro_f1(labels[test_idx], pred))
    return scores


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

@dataclass
class KMeansResult:
    assignment: np.ndarray
    centers: np.ndarray
    inertia: float
    degenerate: bool
    inertia_history: list[float] = field(default_factory=list)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total == 0.0:
            centers[i] = x[rng.integers(n)]
            continue
        probs = d2 / total
        centers[i] = x[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((x - centers[i]) ** 2, axis=1))
    return centers


def kmeans(features: np.ndarray, k: int, rng_seed: int = 0, restarts: int = 10,
           max_iter: int = 300, tol: float = 1e-6) -> KMeansResult:
    """Lloyd iterations with k-means++ seeding, best of `restarts` by inertia."""
    x = np.asarray(features, dtype=np.float64)
    n = x.shape[0]
    if n < k:
        raise ValueError("fewer points than clusters")
    degenerate = len(np.unique(x, axis=0)) < k
    best: KMeansResult | None = None
    for r in range(restarts):
        rng = np.random.default_rng([rng_seed, r])
        centers = _kmeans_pp_init(x, k, rng)
        history: list[float] = []
        labels = np.zeros(n, dtype=np.int64)
        for _ in range(max_iter):
            d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            labels = np.argmin(d2, axis=1)
            inertia = float(d2[np.arange(n), labels].sum())
            history.append(inertia)
            new_centers = centers.copy()
            for c in range(k):
                members = x[labels == c]
                if len(members):
                    new_centers[c] = members.mean(axis=0)
                else:
                    # re-seed empty cluster at the farthest point
                    far = int(np.argmax(d2[np.arange(n), labels]))
                    new_centers[c] = x[far]
            shift = float(np.sqrt(((new_centers - centers) ** 2).sum(axis=1)).max())
            centers = new_centers
            if shift < tol:
                break
        d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), labels].sum())
        history.append(inertia)
        if best is None or inertia < best.inertia:
            best = KMeansResult(labels, centers, inertia, degenerate, history)
    return best


# ---------------------------------------------------------------------------
# top-level evaluation
# ---------------------------------------------------------------------------

def evaluate(triple_emb: np.ndarray, g: KnowledgeGraph,
             specs: list[ClassifierSpec] | None = None,
             restrict_multi_predicate: bool = False,
             folds: int = 5, rng_seed: int = 0,
             tasks: tuple[str, ...] = ("classify", "cluster"),
             metadata: dict | None = None) -> EvalReport:
    triple_emb = np.asarray(triple_emb, dtype=np.float64)
    if triple_emb.shape[0] != g.num_triples:
        raise ValueError("embedding rows must align with graph triples")
    if specs is None:
        specs = [ClassifierSpec(kind="logreg-ovr"), ClassifierSpec(kind="mlp")]

    labels = np.array([t.predicate for t in g.triples])
    if restrict_multi_predicate:
        keep = np.array(multi_predicate_triple_ids(g), dtype=np.int64)
        if len(keep) < 10:
            raise ValueError("fewer than 10 triples after multi-predicate restriction")
        triple_emb = triple_emb[keep]
        labels = labels[keep]

    per_fold: dict[str, list[float]] = {}
    means: dict[str, float] = {}
    if "classify" in tasks:
        split = kfold_split(len(labels), folds=folds, rng_seed=rng_seed)
        for spec in specs:
            scores = train_classify(triple_emb, labels, spec, split)
            per_fold[spec.kind] = scores
            means[spec.kind] = float(np.mean(scores))

    ch = float("nan")
    ch_degenerate = False
    if "cluster" in tasks:
        k = g.num_predicates
        if k >= 2 and len(labels) > k:
            km = kmeans(triple_emb, k, rng_seed=rng_seed)
            ch = calinski_harabasz(triple_emb, km.assignment, k)
            ch_degenerate = not np.isfinite(ch)
        else:
            ch_degenerate = True
            ch = CH_DEGENERATE

    meta = dict(metadata or {})
    meta.setdefault("dim", int(triple_emb.shape[1]))
    meta.setdefault("rng_seed", rng_seed)
    meta.setdefault("folds", folds)
    return EvalReport(
        micro_f1_per_fold=per_fold,
        micro_f1_mean=means,
        ch_index=ch,
        ch_degenerate=ch_degenerate,
        restricted_to_multi_predicate=restrict_multi_predicate,
        metadata=meta,
    )
