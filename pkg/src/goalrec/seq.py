"""Recurrent sequence classifier (single-cell LSTM) written from scratch.

One embedding matrix feeds a standard LSTM cell (input, forget, cell and
output gates over the concatenated [embedding, hidden] vector); the final
hidden state feeds a linear softmax head.  Gradients are exact analytic
backpropagation through time, verifiable against central finite
differences via `gradient_check`.  Training is plain minibatch SGD with
global gradient-norm clipping; batches group sequences of equal length so
no padding is ever introduced.  Everything is float64 and every random
choice flows from one seeded generator, so training is bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    EmptySequenceError,
    IndexOutOfVocabError,
    ShapeMismatchError,
    SingleClassDataError,
)

_FORMAT = "goalrec-seq"
_VERSION = 1
_WEIGHTS = ("embed", "w_i", "w_f", "w_g", "w_o", "b_i", "b_f", "b_g", "b_o", "w_out", "b_out")


@dataclass(frozen=True)
class SeqHyper:
    d_embed: int = 32
    d_hidden: int = 32
    lr: float = 0.5
    batch: int = 32
    epochs: int = 20
    clip: float = 5.0


@dataclass
class SeqModel:
    vocab_size: int
    n_classes: int
    hyper: SeqHyper
    params: dict[str, np.ndarray]
    train_log: list[tuple[int, int, float]] = field(default_factory=list)  # (epoch, batch, loss)


def init_seq_model(vocab_size: int, n_classes: int, hyper: SeqHyper, seed: int = 0) -> SeqModel:
    """Uniform init in +-1/sqrt(d_hidden); forget-gate bias starts at 1."""
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(hyper.d_hidden)
    zin = hyper.d_embed + hyper.d_hidden

    def uniform(*shape):
        return rng.uniform(-bound, bound, size=shape)

    params = {
        "embed": uniform(vocab_size, hyper.d_embed),
        "w_i": uniform(zin, hyper.d_hidden),
        "w_f": uniform(zin, hyper.d_hidden),
        "w_g": uniform(zin, hyper.d_hidden),
        "w_o": uniform(zin, hyper.d_hidden),
        "b_i": np.zeros(hyper.d_hidden),
        "b_f": np.ones(hyper.d_hidden),
        "b_g": np.zeros(hyper.d_hidden),
        "b_o": np.zeros(hyper.d_hidden),
        "w_out": uniform(hyper.d_hidden, n_classes),
        "b_out": np.zeros(n_classes),
    }
    return SeqModel(vocab_size, n_classes, hyper, params)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _softmax(z):
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _check_batch(model: SeqModel, ids: np.ndarray):
    if ids.size == 0 or ids.shape[1] == 0:
        raise EmptySequenceError("cannot run the cell over an empty sequence")
    if ids.min() < 0 or ids.max() >= model.vocab_size:
        raise IndexOutOfVocabError(
            f"action id outside vocabulary of {model.vocab_size}")


def _forward_batch(model: SeqModel, ids: np.ndarray):
    """Run the cell over a (B, T) id batch; returns (probs, cache)."""
    _check_batch(model, ids)
    p = model.params
    B, T = ids.shape
    dh = model.hyper.d_hidden
    E = p["embed"][ids]  # (B, T, d_embed)
    h = np.zeros((B, dh))
    c = np.zeros((B, dh))
    steps = []
    for t in range(T):
        z = np.concatenate([E[:, t, :], h], axis=1)
        i = _sigmoid(z @ p["w_i"] + p["b_i"])
        f = _sigmoid(z @ p["w_f"] + p["b_f"])
        g = np.tanh(z @ p["w_g"] + p["b_g"])
        o = _sigmoid(z @ p["w_o"] + p["b_o"])
        c_prev = c
        c = f * c_prev + i * g
        hc = np.tanh(c)
        h = o * hc
        steps.append((z, i, f, g, o, c_prev, hc))
    logits = h @ p["w_out"] + p["b_out"]
    probs = _softmax(logits)
    return probs, (ids, E, steps, h)


def _backward_batch(model: SeqModel, cache, probs: np.ndarray, labels: np.ndarray):
    """Mean cross-entropy loss over the batch and exact parameter gradients."""
    p = model.params
    ids, E, steps, h_last = cache
    B, T = ids.shape
    de = model.hyper.d_embed

    grads = {k: np.zeros_like(v) for k, v in p.items()}
    y = np.zeros_like(probs)
    y[np.arange(B), labels] = 1.0
    loss = float(-np.mean(np.log(np.maximum(probs[np.arange(B), labels], 1e-300))))

    dlogits = (probs - y) / B
    grads["w_out"] = h_last.T @ dlogits
    grads["b_out"] = dlogits.sum(axis=0)
    dh = dlogits @ p["w_out"].T
    dc = np.zeros_like(dh)
    for t in range(T - 1, -1, -1):
        z, i, f, g, o, c_prev, hc = steps[t]
        do = dh * hc
        dc = dc + dh * o * (1.0 - hc * hc)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dc_prev = dc * f
        di_pre = di * i * (1.0 - i)
        df_pre = df * f * (1.0 - f)
        dg_pre = dg * (1.0 - g * g)
        do_pre = do * o * (1.0 - o)
        grads["w_i"] += z.T @ di_pre
        grads["w_f"] += z.T @ df_pre
        grads["w_g"] += z.T @ dg_pre
        grads["w_o"] += z.T @ do_pre
        grads["b_i"] += di_pre.sum(axis=0)
        grads["b_f"] += df_pre.sum(axis=0)
        grads["b_g"] += dg_pre.sum(axis=0)
        grads["b_o"] += do_pre.sum(axis=0)
        dz = (di_pre @ p["w_i"].T + df_pre @ p["w_f"].T
              + dg_pre @ p["w_g"].T + do_pre @ p["w_o"].T)
        np.add.at(grads["embed"], ids[:, t], dz[:, :de])
        dh = dz[:, de:]
        dc = dc_prev
    return loss, grads


def forward(model: SeqModel, sequence: Sequence[int]) -> np.ndarray:
    """Class probabilities for one sequence; they sum to one."""
    ids = np.asarray([sequence], dtype=np.int64)
    probs, _ = _forward_batch(model, ids)
    return probs[0]


def backward(model: SeqModel, sequence: Sequence[int], label: int):
    """Loss and exact gradients for a single labeled sequence."""
    ids = np.asarray([sequence], dtype=np.int64)
    probs, cache = _forward_batch(model, ids)
    return _backward_batch(model, cache, probs, np.asarray([label]))


def predict_seq(model: SeqModel, sequence: Sequence[int]) -> tuple[np.ndarray, int]:
    probs = forward(model, sequence)
    return probs, int(np.argmax(probs))


def _clip_global(grads: dict[str, np.ndarray], clip: float):
    total = float(np.sqrt(sum(float((g * g).sum()) for g in grads.values())))
    if clip > 0 and total > clip:
        scale = clip / total
        for g in grads.values():
            g *= scale
    return grads


def train_seq(data: Sequence[tuple[Sequence[int], int]], hyper: SeqHyper = SeqHyper(),
              seed: int = 0, vocab_size: int | None = None,
              n_classes: int | None = None) -> SeqModel:
    """Minibatch SGD over equal-length groups; bit-reproducible for a fixed seed."""
    if not data:
        raise SingleClassDataError("no training data")
    for seq, _ in data:
        if len(seq) == 0:
            raise EmptySequenceError("training sequence is empty")
    labels = sorted({label for _, label in data})
    if len(labels) < 2:
        raise SingleClassDataError(f"training data has a single class {labels}")
    k = (max(labels) + 1) if n_classes is None else n_classes
    top = max(max(seq) for seq, _ in data)
    v = (top + 1) if vocab_size is None else vocab_size
    if top >= v:
        raise IndexOutOfVocabError(f"action id {top} outside vocabulary of {v}")

    rng = np.random.default_rng(seed)
    model = init_seq_model(v, k, hyper, seed=int(rng.integers(2**32)))
    by_length: dict[int, list[int]] = {}
    for idx, (seq, _) in enumerate(data):
        by_length.setdefault(len(seq), []).append(idx)

    for epoch in range(hyper.epochs):
        batches: list[list[int]] = []
        for length in sorted(by_length):
            members = np.array(by_length[length])
            rng.shuffle(members)
            for start in range(0, len(members), hyper.batch):
                batches.append(members[start:start + hyper.batch].tolist())
        order = rng.permutation(len(batches))
        for bnum, b in enumerate(order):
            batch = batches[b]
            ids = np.asarray([data[i][0] for i in batch], dtype=np.int64)
            ys = np.asarray([data[i][1] for i in batch], dtype=np.int64)
            probs, cache = _forward_batch(model, ids)
            loss, grads = _backward_batch(model, cache, probs, ys)
            _clip_global(grads, hyper.clip)
            for name, g in grads.items():
                model.params[name] -= hyper.lr * g
            model.train_log.append((epoch, bnum, loss))
    return model


def gradient_check(model: SeqModel, sequence: Sequence[int], label: int,
                   epsilon: float = 1e-4) -> float:
    """Max relative error between analytic and central finite-difference gradients.

    Relative error per scalar is |analytic - numeric| / max(1, |analytic|).
    """
    _, grads = backward(model, sequence, label)

    def loss_now() -> float:
        probs = forward(model, sequence)
        return float(-np.log(max(probs[label], 1e-300)))

    worst = 0.0
    for name, tensor in model.params.items():
        flat = tensor.reshape(-1)
        gflat = grads[name].reshape(-1)
        for j in range(flat.size):
            keep = flat[j]
            flat[j] = keep + epsilon
            up = loss_now()
            flat[j] = keep - epsilon
            down = loss_now()
            flat[j] = keep
            numeric = (up - down) / (2.0 * epsilon)
            err = abs(gflat[j] - numeric) / max(1.0, abs(gflat[j]))
            worst = max(worst, err)
    return worst


def learning_curve(train_sets: Sequence[Sequence[tuple[Sequence[int], int]]],
                   hyper: SeqHyper, eval_set: Sequence[tuple[Sequence[int], int]],
                   seed: int = 0) -> list[tuple[int, float]]:
    """Accuracy on a fixed eval set after training on each (growing) train set."""
    sizes = [len(ts) for ts in train_sets]
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError(f"training-set sizes must strictly increase, got {sizes}")
    out = []
    for ts in train_sets:
        model = train_seq(ts, hyper, seed)
        hits = sum(1 for seq, label in eval_set if predict_seq(model, seq)[1] == label)
        out.append((len(ts), hits / len(eval_set)))
    return out


def save_seq(model: SeqModel, path: str) -> None:
    meta = {
        "format": _FORMAT,
        "version": _VERSION,
        "vocab_size": model.vocab_size,
        "n_classes": model.n_classes,
        "hyper": {"d_embed": model.hyper.d_embed, "d_hidden": model.hyper.d_hidden,
                  "lr": model.hyper.lr, "batch": model.hyper.batch,
                  "epochs": model.hyper.epochs, "clip": model.hyper.clip},
        "train_log": [[e, b, l] for e, b, l in model.train_log],
    }
    arrays = {name: model.params[name] for name in _WEIGHTS}
    with open(path, "wb") as fh:
        np.savez(fh, meta=np.array(json.dumps(meta)), **arrays)


def load_seq(path: str) -> SeqModel:
    with np.load(path) as blob:
        meta = json.loads(str(blob["meta"].item()))
        if meta.get("format") != _FORMAT or meta.get("version") != _VERSION:
            raise ValueError(f"not a {_FORMAT} v{_VERSION} file: {path}")
        params = {name: blob[name].astype(np.float64) for name in _WEIGHTS}
    model = SeqModel(meta["vocab_size"], meta["n_classes"], SeqHyper(**meta["hyper"]), params,
                     [(e, b, l) for e, b, l in meta["train_log"]])
    return model
