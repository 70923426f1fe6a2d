"""Gradient-boosted decision trees for trace classification, written from scratch.

Multiclass boosting on softmax cross-entropy: every round fits one
regression tree per class to the Newton statistics g_i = p_i - y_i and
h_i = p_i (1 - p_i), with exact greedy split search over the sorted unique
values of each count feature.  Leaves take the damped Newton step
-sum(g) / (sum(h) + l2); the shrinkage factor is applied when scores are
accumulated.  All tie-breaks (equal gains, equal probabilities) resolve to
the lowest feature or class index, so training and prediction are
deterministic functions of the data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import IndexOutOfVocabError, ShapeMismatchError, SingleClassDataError

_FORMAT = "goalrec-gbt"
_VERSION = 1
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class GbtConfig:
    n_rounds: int = 100
    max_depth: int = 3
    shrinkage: float = 0.3
    l2: float = 1.0


@dataclass
class RegressionTree:
    """Array-of-nodes tree; `feature[i] == -1` marks node i as a leaf."""

    feature: list[int]
    threshold: list[float]
    left: list[int]
    right: list[int]
    value: list[float]

    def predict_one(self, x) -> float:
        i = 0
        while self.feature[i] >= 0:
            i = self.left[i] if x[self.feature[i]] < self.threshold[i] else self.right[i]
        return self.value[i]

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(len(X))
        stack = [(0, np.arange(len(X)))]
        while stack:
            node, idx = stack.pop()
            if self.feature[node] < 0:
                out[idx] = self.value[node]
                continue
            go_left = X[idx, self.feature[node]] < self.threshold[node]
            stack.append((self.left[node], idx[go_left]))
            stack.append((self.right[node], idx[~go_left]))
        return out


@dataclass
class GbtEnsemble:
    n_classes: int
    vocab_size: int
    config: GbtConfig
    rounds: list[list[RegressionTree]] = field(default_factory=list)
    train_log: list[float] = field(default_factory=list)  # log-loss before and after each round
    # Node arrays of every tree padded to a common length and stacked, so a
    # whole batch can be pushed through all trees in lockstep.  Built lazily;
    # never serialized.
    _stacked: tuple[np.ndarray, ...] | None = field(
        default=None, repr=False, compare=False)

    def stacked_nodes(self) -> tuple[np.ndarray, ...]:
        if self._stacked is None:
            trees = [t for round_trees in self.rounds for t in round_trees]
            width = max((len(t.feature) for t in trees), default=1)
            n = len(trees)
            feat = np.full((n, width), -1, dtype=np.int64)
            thr = np.zeros((n, width))
            left = np.zeros((n, width), dtype=np.int64)
            right = np.zeros((n, width), dtype=np.int64)
            val = np.zeros((n, width))
            for i, t in enumerate(trees):
                k = len(t.feature)
                feat[i, :k] = t.feature
                thr[i, :k] = t.threshold
                left[i, :k] = t.left
                right[i, :k] = t.right
                val[i, :k] = t.value
            self._stacked = (feat, thr, left, right, val)
        return self._stacked


def featurize(actions: Sequence[int], vocab_size: int) -> np.ndarray:
    """Bag-of-actions count vector for one (possibly truncated) trace."""
    counts = np.zeros(vocab_size, dtype=np.int64)
    for a in actions:
        if not 0 <= a < vocab_size:
            raise IndexOutOfVocabError(f"action id {a} outside vocabulary of {vocab_size}")
        counts[a] += 1
    return counts


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _fit_tree(X: np.ndarray, g: np.ndarray, h: np.ndarray, max_depth: int, l2: float) -> RegressionTree:
    tree = RegressionTree([], [], [], [], [])

    def new_node() -> int:
        tree.feature.append(-1)
        tree.threshold.append(0.0)
        tree.left.append(-1)
        tree.right.append(-1)
        tree.value.append(0.0)
        return len(tree.feature) - 1

    def build(idx: np.ndarray, depth: int) -> int:
        node = new_node()
        G = float(g[idx].sum())
        H = float(h[idx].sum())
        best_gain, best_feat, best_thr = 0.0, -1, 0.0
        if depth < max_depth and len(idx) >= 2:
            base = G * G / (H + l2)
            for j in range(X.shape[1]):
                col = X[idx, j]
                order = np.argsort(col, kind="stable")
                sv = col[order]
                if sv[0] == sv[-1]:
                    continue
                cg = np.cumsum(g[idx][order])
                ch = np.cumsum(h[idx][order])
                cuts = np.nonzero(sv[:-1] != sv[1:])[0]
                gl, hl = cg[cuts], ch[cuts]
                gains = gl * gl / (hl + l2) + (G - gl) ** 2 / (H - hl + l2) - base
                k = int(np.argmax(gains))  # first max: lowest threshold wins ties
                if gains[k] > best_gain + _MIN_GAIN:  # strict: lowest feature wins ties
                    best_gain = float(gains[k])
                    best_feat = j
                    best_thr = (float(sv[cuts[k]]) + float(sv[cuts[k] + 1])) / 2.0
        if best_feat < 0:
            tree.value[node] = -G / (H + l2)
            return node
        go_left = X[idx, best_feat] < best_thr
        tree.feature[node] = best_feat
        tree.threshold[node] = best_thr
        tree.left[node] = build(idx[go_left], depth + 1)
        tree.right[node] = build(idx[~go_left], depth + 1)
        return node

    build(np.arange(len(X)), 0)
    return tree


def train_gbt(data: Sequence[tuple[Sequence[float], int]], config: GbtConfig = GbtConfig(),
              n_classes: int | None = None) -> GbtEnsemble:
    """Fit an ensemble on (feature-vector, label) pairs.

    Records training log-loss into `train_log`, one entry before any round
    and one after each round.
    """
    if not data:
        raise SingleClassDataError("no training data")
    try:
        X = np.asarray([row for row, _ in data], dtype=np.float64)
    except ValueError as err:
        raise ShapeMismatchError("feature vectors have inconsistent lengths") from err
    y = np.asarray([label for _, label in data], dtype=np.int64)
    if X.ndim != 2:
        raise ShapeMismatchError("feature vectors have inconsistent lengths")
    classes = set(int(c) for c in np.unique(y))
    if len(classes) < 2:
        raise SingleClassDataError(f"training data has a single class {classes}")
    k = max(classes) + 1 if n_classes is None else n_classes
    if any(not 0 <= c < k for c in classes):
        raise ShapeMismatchError(f"labels {sorted(classes)} outside {k} classes")

    n = len(X)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    scores = np.zeros((n, k))
    model = GbtEnsemble(k, X.shape[1], config)

    def log_loss() -> float:
        p = _softmax(scores)
        return float(-np.mean(np.log(np.maximum(p[np.arange(n), y], 1e-300))))

    model.train_log.append(log_loss())
    for _ in range(config.n_rounds):
        p = _softmax(scores)
        grad = p - onehot
        hess = p * (1.0 - p)
        round_trees = []
        for c in range(k):
            tree = _fit_tree(X, grad[:, c], hess[:, c], config.max_depth, config.l2)
            scores[:, c] += config.shrinkage * tree.predict_batch(X)
            round_trees.append(tree)
        model.rounds.append(round_trees)
        model.train_log.append(log_loss())
    return model


def predict_scores(model: GbtEnsemble, x: Sequence[float], n_rounds: int | None = None) -> np.ndarray:
    if len(x) != model.vocab_size:
        raise ShapeMismatchError(f"feature vector of length {len(x)}, expected {model.vocab_size}")
    scores = np.zeros(model.n_classes)
    use = model.rounds if n_rounds is None else model.rounds[:n_rounds]
    for round_trees in use:
        for c, tree in enumerate(round_trees):
            scores[c] += model.config.shrinkage * tree.predict_one(x)
    return scores


def predict_gbt(model: GbtEnsemble, x: Sequence[float],
                n_rounds: int | None = None) -> tuple[np.ndarray, int]:
    """Class probabilities (summing to one) and the argmax label, ties to lowest index."""
    probs = _softmax(predict_scores(model, x, n_rounds))
    return probs, int(np.argmax(probs))


def predict_scores_batch(model: GbtEnsemble, X: np.ndarray,
                         n_rounds: int | None = None) -> np.ndarray:
    """Additive scores for a whole batch, walking every tree in lockstep.

    Equivalent to stacking `predict_scores` over the rows of `X`, but the
    descent step runs once per tree level on (n_trees, n_rows) arrays instead
    of once per tree per row.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.vocab_size:
        raise ShapeMismatchError(
            f"feature matrix of shape {X.shape}, expected (*, {model.vocab_size})")
    feat, thr, left, right, val = model.stacked_nodes()
    use = len(model.rounds) if n_rounds is None else min(n_rounds, len(model.rounds))
    n_trees = use * model.n_classes
    n_rows = X.shape[0]
    if n_rows == 0 or n_trees == 0:
        return np.zeros((n_rows, model.n_classes))
    tree_idx = np.arange(n_trees)[:, None]        # (n_trees, 1)
    row_idx = np.arange(n_rows)[None, :]          # (1, n_rows)
    pos = np.zeros((n_trees, n_rows), dtype=np.int64)
    for _ in range(feat.shape[1]):  # a root-to-leaf path never exceeds the node count
        f = feat[tree_idx, pos]                    # (n_trees, n_rows)
        at_leaf = f < 0
        if at_leaf.all():
            break
        go_left = X[row_idx, np.maximum(f, 0)] < thr[tree_idx, pos]
        step = np.where(go_left, left[tree_idx, pos], right[tree_idx, pos])
        pos = np.where(at_leaf, pos, step)
    leaf = val[tree_idx, pos]                      # (n_trees, n_rows)
    per_class = leaf.reshape(use, model.n_classes, n_rows).sum(axis=0)
    return model.config.shrinkage * per_class.T    # (n_rows, n_classes)


def predict_gbt_batch(model: GbtEnsemble, X: np.ndarray,
                      n_rounds: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise probabilities and argmax labels; ties resolve to the lowest index."""
    probs = _softmax(predict_scores_batch(model, X, n_rounds))
    return probs, np.argmax(probs, axis=1)


def save_gbt(model: GbtEnsemble, path: str) -> None:
    blob = {
        "format": _FORMAT,
        "version": _VERSION,
        "n_classes": model.n_classes,
        "vocab_size": model.vocab_size,
        "config": {"n_rounds": model.config.n_rounds, "max_depth": model.config.max_depth,
                   "shrinkage": model.config.shrinkage, "l2": model.config.l2},
        "train_log": model.train_log,
        "rounds": [[{"feature": t.feature, "threshold": t.threshold, "left": t.left,
                     "right": t.right, "value": t.value} for t in round_trees]
                   for round_trees in model.rounds],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(blob, fh)


def load_gbt(path: str) -> GbtEnsemble:
    with open(path, encoding="utf-8") as fh:
        blob = json.load(fh)
    if blob.get("format") != _FORMAT or blob.get("version") != _VERSION:
        raise ValueError(f"not a {_FORMAT} v{_VERSION} file: {path}")
    cfg = GbtConfig(**blob["config"])
    model = GbtEnsemble(blob["n_classes"], blob["vocab_size"], cfg, train_log=blob["train_log"])
    for round_blob in blob["rounds"]:
        model.rounds.append([RegressionTree(t["feature"], t["threshold"], t["left"],
                                            t["right"], t["value"]) for t in round_blob])
    return model
